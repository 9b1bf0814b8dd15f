"""Deterministic 64-bit seed derivation for parallel sampling streams."""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 output for state ``x``.

    Standard finalizer constants; the full generator is splitmix64(x + k*GOLDEN)
    for k = 0, 1, 2, ...
    """
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, *path: int) -> int:
    """Derive a child seed from ``master`` and an index path.

    Each path component is xor-folded into the running state and passed through
    one splitmix64 step, so derive_seed(s, 3, 7) and derive_seed(s, 7, 3) are
    unrelated streams.  Used for (degree, chain) sampling hierarchies.
    """
    state = master & _MASK64
    for component in path:
        state = splitmix64(state ^ (component & _MASK64))
    return state
