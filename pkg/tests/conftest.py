import numpy as np
import pytest

from couplelab import logcosh_potential, quadratic_potential


@pytest.fixture(scope="session")
def quad1():
    return quadratic_potential(1.0, dim=1)


@pytest.fixture(scope="session")
def quad2():
    return quadratic_potential([1.0, 2.0])


@pytest.fixture(scope="session")
def lc2():
    return logcosh_potential(2)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
