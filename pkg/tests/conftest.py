import numpy as np
import pytest

from frozencoh.m3 import M3Triple, is_valid_triple


@pytest.fixture
def rng():
    return np.random.default_rng(20150527)


def random_triple(rng, n=2):
    while True:
        c = rng.uniform(-1, 1, 3)
        if is_valid_triple(*c, n):
            return M3Triple(*c, n)


def random_freezing_pair(rng):
    """(c1, c3) with both coordinates bounded away from zero."""
    c1, c3 = rng.uniform(0.05, 0.95, 2) * rng.choice([-1, 1], 2)
    return float(c1), float(c3)


# one summary line per acceptance criterion, shown even when output is captured
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
