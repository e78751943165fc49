from __future__ import annotations

import functools
import time

import pytest

from triplewell.potential import TripleWellParams
from triplewell.precision import PrecisionContext
from triplewell.report import ENERGY_DIGITS, PRECISION_FLOORS, table_target_digits
from triplewell.solver import converged_spectrum


# wall-clock seconds of the first (uncached) solve per omega
SOLVE_SECONDS: dict = {}


@functools.lru_cache(maxsize=None)
def converged(omega: int):
    """Converged (triplet, EigenResult) at the table precision floor, cached per session.

    The target covers both tables: every printed energy and ten digits of dE21.
    """
    target = max(ENERGY_DIGITS[omega], table_target_digits(omega, 1))
    start = time.perf_counter()
    out = converged_spectrum(TripleWellParams(omega), target, PrecisionContext(PRECISION_FLOORS[omega]))
    SOLVE_SECONDS[omega] = time.perf_counter() - start
    return out


@pytest.fixture(scope="session")
def table_spectrum():
    return converged


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, after the usual summary."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance.py" not in rep.nodeid:
                continue
            props = dict(rep.user_properties)
            if "criterion" not in props:
                continue
            lines.append((props["criterion"], rep.nodeid.split("::")[-1], outcome, props.get("measured", "")))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, name, outcome, measured in sorted(lines):
        tag = "PASS" if outcome == "passed" else "FAIL"
        extra = f"  [{measured}]" if measured else ""
        terminalreporter.write_line(f"{tag}  {criterion}  {name}{extra}")
