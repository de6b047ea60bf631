import numpy as np
import pytest

from nsvlab.spectral import TorusGrid


@pytest.fixture
def grid2():
    return TorusGrid(2, 32)


@pytest.fixture
def grid3():
    return TorusGrid(3, 12)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
