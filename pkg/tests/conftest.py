import numpy as np
import pytest

from nls_stability.delta import DeltaNLS, default_grid, profile


@pytest.fixture(scope="session")
def delta_p3():
    """Profile at p=3, gamma=1, omega=-1 on a 1001-node full-line grid."""
    prof = profile(3.0, 1.0, -1.0, default_grid(-1.0, 1001))
    return prof


@pytest.fixture(scope="session")
def delta_p6_even():
    prof = profile(6.0, 1.0, -2.0, default_grid(-2.0, 1001)).sector("even")
    return prof


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_field(model, rng, smooth=True):
    z = rng.standard_normal(model.shape) + 1j * rng.standard_normal(model.shape)
    if smooth:
        z = z * np.exp(-np.abs(np.asarray(model.grid.x)) ** 2 / 4)
    return z


@pytest.fixture
def free_model():
    return DeltaNLS(2.0, 0.0, default_grid(-1.0, 2001))
