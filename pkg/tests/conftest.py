import numpy as np
import pytest

from ctrw_heat.grid import Grid
from ctrw_heat.kernels import bump_product, heatball, kernel_alpha
from ctrw_heat.solver import prepare

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def H1():
    return heatball(1)


@pytest.fixture(scope="session")
def H2():
    return heatball(2)


@pytest.fixture(scope="session")
def bump1():
    return bump_product(1)


@pytest.fixture(scope="session")
def alpha1(H1):
    return kernel_alpha(H1)


@pytest.fixture(scope="session")
def disc256(H1, alpha1):
    """Heat ball on 256 points, m = 8 strip lags, horizon 4 alpha."""
    return prepare(H1, Grid.from_horizon(1, 1.0, 256, alpha1 / 16, 4 * alpha1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
