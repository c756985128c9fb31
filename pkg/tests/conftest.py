from __future__ import annotations

import pytest

from qhdshock.profile import fig1_shock, solve_profile

LADDER = (0.1, 0.05, 0.025, 0.0125)

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def ladder_grids():
    """Reference-family profiles over the eps ladder, default options."""
    return {eps: solve_profile(fig1_shock(eps)) for eps in LADDER}


@pytest.fixture(scope="session")
def small_run():
    """Spectrum of the eps = 0.1 reference shock at n = 500 (a few seconds)."""
    from qhdshock.spectrum import analyze_spectrum

    return analyze_spectrum(fig1_shock(0.1), n=500)


@pytest.fixture
def criterion():
    """record(number, ok, detail): print one pass/fail line and keep it for the summary."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _CRITERIA[number] = (bool(ok), detail)
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
