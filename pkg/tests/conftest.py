import numpy as np
import pytest
from hypothesis import settings

# first calls pay numba compilation, so per-example deadlines are meaningless
settings.register_profile("specrad", deadline=None)
settings.load_profile("specrad")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
