import time
from contextlib import contextmanager

import numpy as np
import pytest

ACCEPTANCE = {}


@contextmanager
def criterion(number, title, budget):
    """Record pass/fail and wall time for one acceptance criterion."""
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed < budget
        ACCEPTANCE[number] = (title, ok and within, elapsed, budget)
    assert within, f"criterion {number} took {elapsed:.2f} s (budget {budget} s)"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, elapsed, budget = ACCEPTANCE[number]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:>2} {status}  {title}  ({elapsed:.2f} s of {budget:g} s)")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
