import numpy as np
import pytest

from hallmhd.spectral import PeriodicGrid


@pytest.fixture
def grid2d():
    return PeriodicGrid(2, 32)


@pytest.fixture
def grid3d():
    return PeriodicGrid(3, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
