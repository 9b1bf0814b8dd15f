"""Polynomial dynamics: escape radii, Green functions, preimages, sampling.

A degree-d polynomial P with leading coefficient gamma carries an escape
radius R = max(1, (2 + sum |a_i|) / |gamma|) guaranteeing |P(z)| >= 2|z|
outside the disk of radius R, so orbits either stay in a compact set or run
to infinity at doubling speed.  Everything else follows from iteration: the
Green function from escape times, the filled set from non-escape, and the
balanced sampling measure from backward orbits with uniform branch choice.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._seeds import derive_seed
from .grids import GridField, Rectangle
from .measures import EmpiricalMeasure

K_MAX_DEFAULT = 200
GREEN_TOL_DEFAULT = 1e-10
ROOT_TOL_DEFAULT = 1e-12
BURN_IN_DEFAULT = 50
CHAINS_DEFAULT = 64

_EPS = float(np.finfo(float).eps)


class RootSolveError(RuntimeError):
    """Simultaneous root iteration failed to meet the residual target."""

    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals


def escape_radius(coeffs) -> float:
    """R = max(1, (2 + sum_{i<d} |a_i|) / |gamma|) for ascending coeffs."""
    c = np.asarray(coeffs, dtype=complex)
    if c.size < 3:
        raise ValueError("polynomial degree must be at least 2")
    if c[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    return float(max(1.0, (2.0 + float(np.abs(c[:-1]).sum())) / abs(c[-1])))


@dataclass(frozen=True)
class PolyDyn:
    """A polynomial of degree >= 2 with its escape radius.

    coeffs are monomial coefficients in ascending order; radius is the
    doubling radius computed at construction and spot-checked on a sampled
    circle just outside it.
    """

    coeffs: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex))

    @classmethod
    def from_coeffs(cls, coeffs) -> "PolyDyn":
        c = np.asarray(coeffs, dtype=complex)
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        r = escape_radius(c)
        p = cls(coeffs=c, radius=r)
        z = r * (1 + 1e-9) * np.exp(2j * np.pi * (np.arange(32) + 0.5) / 32)
        vals = np.abs(_poly_eval(c, z))
        if np.any(vals < 2 * np.abs(z) * (1 - 1e-12)):
            raise ValueError("escape radius fails its doubling contract")
        return p

    @property
    def degree(self) -> int:
        return int(self.coeffs.size - 1)

    @property
    def gamma(self) -> complex:
        return complex(self.coeffs[-1])

    def __call__(self, z):
        return _poly_eval(self.coeffs, z)


def _poly_eval(coeffs, z):
    z_arr = np.asarray(z, dtype=complex)
    out = np.full(z_arr.shape, coeffs[-1], dtype=complex)
    for k in range(len(coeffs) - 2, -1, -1):
        out = out * z_arr + coeffs[k]
    if z_arr.ndim == 0:
        return complex(out)
    return out


def capacity_julia(p: PolyDyn) -> float:
    """Capacity of the filled set, |gamma|^(-1/(d-1))."""
    return abs(p.gamma) ** (-1.0 / (p.degree - 1))


# ---------------------------------------------------------------------------
# Green function


def _log_switch(degree: int) -> float:
    # keep z^degree representable in float64 during plain iteration
    return min(1e8, 10.0 ** (250.0 / degree))


def green_value(p: PolyDyn, z: complex, k_max: int = K_MAX_DEFAULT,
                tol: float = GREEN_TOL_DEFAULT) -> float:
    """Escape-rate Green value at ``z``; 0 if no escape within k_max iterates.

    Iterates until the orbit is far outside the escape radius, then continues
    the recursion on complex logarithms, where the remaining correction
    series can be followed to full precision.
    """
    d, g = p.degree, p.gamma
    tail = math.log(abs(g)) / (d - 1)
    switch = _log_switch(d)
    zz = complex(z)
    prev = None
    for k in range(1, k_max + 1):
        zz = _poly_eval(p.coeffs, zz)
        az = abs(zz)
        if az > switch:
            return _green_log_tail(p, zz, k, k_max, tail)
        if az > p.radius:
            est = (math.log(az) + tail) * math.exp(-k * math.log(d))
            if prev is not None and abs(est - prev) < tol:
                return max(est, 0.0)
            prev = est
    return 0.0 if prev is None else max(prev, 0.0)


def _green_log_tail(p: PolyDyn, z_big: complex, k: int, k_max: int,
                    tail: float) -> float:
    d, g = p.degree, p.gamma
    u = cmath.log(z_big)
    log_g = cmath.log(g)
    reduced = p.coeffs[:-1] / g
    while k < k_max:
        w = 0j
        for i, ci in enumerate(reduced):
            if ci != 0:
                w += ci * cmath.exp((i - d) * u)
        if abs(w) < 1e-18:
            break
        u = d * u + log_g + cmath.log(1 + w)
        k += 1
    est = (u.real + tail) * math.exp(-k * math.log(d))
    return max(est, 0.0)


def filled_julia_grid(p: PolyDyn, rect: Rectangle, resolution: int = 512,
                      k_max: int = K_MAX_DEFAULT) -> GridField:
    """Escape times and Green values over a pixel grid.

    The rectangle must contain the escape disk D(0, R) so that the whole
    filled set is visible.  escaped_at holds the first iterate exceeding R
    (0 = never within k_max); values hold the Green estimates, 0 exactly on
    the non-escaping pixels.
    """
    if not rect.contains_disk(0j, p.radius):
        raise ValueError("grid rectangle must contain the escape-radius disk")
    d, g = p.degree, p.gamma
    tail = math.log(abs(g)) / (d - 1)
    switch = _log_switch(d)
    z0 = rect.pixel_centers(resolution, resolution)
    ny, nx = z0.shape
    n = z0.size

    zz = z0.ravel().astype(complex)
    esc = np.zeros(n, dtype=np.int32)
    u_log = np.zeros(n, dtype=complex)   # complex log at freeze
    k_at = np.zeros(n, dtype=np.int32)
    frozen = np.zeros(n, dtype=bool)
    active = np.arange(n)
    for k in range(1, k_max + 1):
        if active.size == 0:
            break
        za = _poly_eval(p.coeffs, zz[active])
        zz[active] = za
        mag = np.abs(za)
        first = (esc[active] == 0) & (mag > p.radius)
        esc[active[first]] = k
        big = mag > switch
        if np.any(big):
            bidx = active[big]
            u_log[bidx] = np.log(za[big])
            k_at[bidx] = k
            frozen[bidx] = True
            active = active[~big]

    values = np.zeros(n, dtype=float)
    fr = np.where(frozen)[0]
    if fr.size:
        values[fr] = _green_log_tail_vec(p, u_log[fr], k_at[fr], k_max, tail)
    # escaped R but never crossed the log switch within k_max: estimate from
    # the final iterate, kept strictly positive to preserve the invariant
    slow = np.where((esc > 0) & ~frozen)[0]
    if slow.size:
        est = (np.log(np.abs(zz[slow])) + tail) * math.exp(-k_max * math.log(d))
        values[slow] = np.maximum(est, 1e-300)
    return GridField(rect, values.reshape(ny, nx), esc.reshape(ny, nx))


def _green_log_tail_vec(p: PolyDyn, u: np.ndarray, k: np.ndarray,
                        k_max: int, tail: float) -> np.ndarray:
    d, g = p.degree, p.gamma
    log_g = cmath.log(g)
    reduced = p.coeffs[:-1] / g
    k = k.astype(np.int64).copy()
    u = u.copy()
    for _ in range(k_max):
        w = np.zeros(u.shape, dtype=complex)
        for i, ci in enumerate(reduced):
            if ci != 0:
                w += ci * np.exp((i - d) * u)
        live = (np.abs(w) >= 1e-18) & (k < k_max)
        if not np.any(live):
            break
        u[live] = d * u[live] + log_g + np.log(1 + w[live])
        k[live] += 1
    est = (u.real + tail) * np.exp(-k * math.log(d))
    return np.maximum(est, 1e-300)


def functional_equation_residual(p: PolyDyn, points,
                                 k_max: int = K_MAX_DEFAULT,
                                 tol: float = GREEN_TOL_DEFAULT) -> float:
    """max |g(P(z)) - d g(z)| over the given points."""
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    worst = 0.0
    for z in pts:
        g_z = green_value(p, z, k_max=k_max, tol=tol)
        g_pz = green_value(p, complex(_poly_eval(p.coeffs, z)),
                           k_max=k_max, tol=tol)
        worst = max(worst, abs(g_pz - p.degree * g_z))
    return worst


# ---------------------------------------------------------------------------
# Simultaneous roots (Aberth iteration with Newton polish)


def _eval_batch(coeffs, z):
    out = np.full(z.shape, coeffs[-1], dtype=complex)
    for k in range(len(coeffs) - 2, -1, -1):
        out = out * z + coeffs[k]
    return out


def _aberth_batch(coeffs, targets, max_iter: int = 200):
    """Roots of P(z) = w for each w in ``targets``; returns (B, d) roots.

    Deterministic: fixed initial circle (per-row geometric-mean radius with
    an asymmetric angular offset), Aberth corrections until the iteration
    stalls, then three Newton polishing steps.
    """
    c = np.asarray(coeffs, dtype=complex)
    d = c.size - 1
    t = np.asarray(targets, dtype=complex).ravel()
    dc = c[1:] * np.arange(1, d + 1)
    lead = abs(c[-1])

    const = np.abs(c[0] - t)
    r = (const / lead) ** (1.0 / d)
    fallback = 1.0 + (np.abs(c[:-1]).max() + np.abs(t)) / lead
    r = np.where(r > 1e-12, r, fallback ** (1.0 / d))
    angles = 2 * np.pi * (np.arange(d) + 0.375) / d + 0.1
    z = r[:, None] * np.exp(1j * angles)[None, :]

    eye = np.eye(d, dtype=bool)
    for _ in range(max_iter):
        pv = _eval_batch(c, z) - t[:, None]
        dv = _eval_batch(dc, z)
        dv = np.where(dv == 0, _EPS, dv)
        newton = pv / dv
        diff = z[:, :, None] - z[:, None, :]
        diff[:, eye] = 1.0
        s = (1.0 / diff).sum(axis=2) - 1.0
        denom = 1.0 - newton * s
        denom = np.where(np.abs(denom) < 1e-300, 1.0, denom)
        step = newton / denom
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(z))):
            break
    for _ in range(3):
        pv = _eval_batch(c, z) - t[:, None]
        dv = _eval_batch(dc, z)
        dv = np.where(dv == 0, _EPS, dv)
        z = z - pv / dv
    return z


def _residual_bound(coeffs, roots, targets, tol):
    """tol*(1+|w|) plus the float64 evaluation floor 64 eps sum |c_i||z|^i."""
    mags = np.abs(np.asarray(coeffs, dtype=complex))
    scale = _eval_batch(mags.astype(complex), np.abs(roots).astype(complex)).real
    return tol * (1.0 + np.abs(targets)[..., None]) + 64 * _EPS * scale


def poly_roots(coeffs, tol: float = ROOT_TOL_DEFAULT) -> np.ndarray:
    """All d roots of the ascending-coefficient polynomial, multiplicity kept.

    Exact zero low-order coefficients are deflated first, so pure powers
    report the origin with full multiplicity instead of a numerical cluster.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.size < 2 or c[-1] == 0:
        raise ValueError("need a nonzero leading coefficient and degree >= 1")
    scale = np.abs(c).max()
    m = 0
    while m < c.size - 1 and abs(c[m]) <= 1e-13 * scale:
        m += 1
    roots = [np.zeros(m, dtype=complex)]
    rest = c[m:]
    if rest.size > 1:
        if rest.size == 2:  # linear factor
            roots.append(np.array([-rest[0] / rest[1]]))
        else:
            roots.append(_aberth_batch(rest, np.zeros(1))[0])
    out = np.concatenate(roots)
    res = np.abs(_eval_batch(c, out))
    bound = _residual_bound(c, out, np.zeros(1), tol)[0]
    if np.any(res > bound):
        raise RootSolveError(
            f"root residual {res.max():.3e} exceeds bound {bound.max():.3e}",
            residuals=res)
    return out


def preimages(p: PolyDyn, w: complex, tol: float = ROOT_TOL_DEFAULT) -> np.ndarray:
    """The d preimages of ``w`` under P, multiplicity kept.

    Each root satisfies |P(z) - w| <= tol*(1+|w|) plus the float64
    evaluation floor; otherwise :class:`RootSolveError` is raised.
    """
    shifted = p.coeffs.copy()
    shifted[0] -= w
    roots = poly_roots(shifted, tol=tol)
    res = np.abs(_eval_batch(p.coeffs, roots) - w)
    bound = _residual_bound(p.coeffs, roots, np.array([w]), tol)[0]
    if np.any(res > bound):
        raise RootSolveError(
            f"preimage residual {res.max():.3e} exceeds bound {bound.max():.3e}",
            residuals=res)
    return roots


# ---------------------------------------------------------------------------
# Backward-orbit sampling


def brolin_sample(p: PolyDyn, n_samples: int, seed: int,
                  burn_in: int = BURN_IN_DEFAULT,
                  chains: int = CHAINS_DEFAULT,
                  tol: float = ROOT_TOL_DEFAULT) -> EmpiricalMeasure:
    """Sample the balanced measure of P by backward iteration.

    ``chains`` independently seeded chains start at z = R on the real axis;
    each step replaces the current point by one of its d preimages chosen
    uniformly by the chain's generator (multiplicity respected).  After
    ``burn_in`` discarded steps, states are recorded round by round, striped
    across chains in fixed order, until n_samples points exist.  Chain c uses
    seed derive_seed(seed, c), so the result is bit-identical for identical
    arguments.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if burn_in < 20:
        raise ValueError("burn_in must be >= 20")
    if chains < 1:
        raise ValueError("chains must be >= 1")
    d = p.degree
    rngs = [np.random.default_rng(derive_seed(seed, c)) for c in range(chains)]
    z = np.full(chains, p.radius + 0j)
    rounds = -(-n_samples // chains)
    samples = np.empty(rounds * chains, dtype=complex)
    rows = np.arange(chains)
    for step in range(burn_in + rounds):
        roots = _aberth_batch(p.coeffs, z)
        res = np.abs(_eval_batch(p.coeffs, roots) - z[:, None])
        bound = _residual_bound(p.coeffs, roots, z, tol)
        if np.any(res > bound):
            raise RootSolveError(
                f"backward step residual {res.max():.3e} exceeds bound",
                residuals=res)
        picks = np.fromiter((rngs[c].integers(0, d) for c in range(chains)),
                            dtype=np.int64, count=chains)
        z = roots[rows, picks]
        if step >= burn_in:
            base = (step - burn_in) * chains
            samples[base:base + chains] = z
    pts = samples[:n_samples]
    return EmpiricalMeasure(pts, np.full(n_samples, 1.0 / n_samples),
                            seed=seed, provenance="brolin")
