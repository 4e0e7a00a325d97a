import numpy as np
import pytest

from gpbound.model import Potential


@pytest.fixture(scope="session")
def linear_well():
    return Potential.square_well(6.0, 1.0)


@pytest.fixture(scope="session")
def tau_grid():
    return np.linspace(-5.0, 5.0, 1001)
