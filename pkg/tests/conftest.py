"""Shared fixtures and the acceptance-criteria result ledger."""

import pytest


def pytest_configure(config):
    config._criterion_lines = []


@pytest.fixture(scope="session")
def criterion(request):
    """Record one pass/fail line per acceptance criterion, then assert.

    The lines are replayed in the terminal summary so the verdicts stay
    visible even when a later criterion errors out.
    """
    lines = request.config._criterion_lines

    def record(name: str, passed: bool, detail: str = ""):
        tag = "PASS" if passed else "FAIL"
        line = f"[{tag}] {name}" + (f" ({detail})" if detail else "")
        lines.append(line)
        print(line)
        assert passed, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criterion_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
