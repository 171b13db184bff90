import numpy as np
import pytest

from vibench import suite_problems


@pytest.fixture(scope="session")
def suite():
    return suite_problems()


@pytest.fixture(scope="session")
def lipschitz_suite(suite):
    return [p for p in suite if p.known_nu == 1.0]


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
