import numpy as np
import pytest

from hkwave.rootsys import build_space
from hkwave.specfunc import build_shift_operator

PRESET_NAMES = ("s3", "s5", "s7", "su2", "su3")


@pytest.fixture(scope="session")
def spaces():
    return {name: build_space(name) for name in PRESET_NAMES}


@pytest.fixture(scope="session")
def operators(spaces):
    return {name: build_shift_operator(d) for name, d in spaces.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
