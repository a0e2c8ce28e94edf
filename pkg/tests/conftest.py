import numpy as np
import pytest
from hypothesis import settings

from lpregularity.grid import Field, PeriodicGrid

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_field(grid, rng, real=False):
    z = rng.standard_normal(grid.shape)
    if not real:
        z = z + 1j * rng.standard_normal(grid.shape)
    return Field(grid, z)


@pytest.fixture
def grid2():
    return PeriodicGrid(2, 32)
