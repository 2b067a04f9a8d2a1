import numpy as np
import pytest

from mr_qmem import analytic
from mr_qmem.core import SystemParams, rect_comb_init

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def at_optimum(n, comb_spacing=1.0, light_speed=1.0, **kw):
    base = SystemParams(n, comb_spacing, 0.0, light_speed, **kw)
    return base.with_coupling(analytic.optimal_coupling(base))


@pytest.fixture
def paper7():
    """N = 7 comb at the matching optimum."""
    return at_optimum(7)


@pytest.fixture
def paper6():
    return at_optimum(6)


@pytest.fixture
def rng():
    return np.random.default_rng(20161)


def random_state(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rect7(paper7):
    return rect_comb_init(paper7)
