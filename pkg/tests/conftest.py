import numpy as np
import pytest

from mbloch import SystemParams


@pytest.fixture
def params():
    return SystemParams(-1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_params(rng, lo=-5.0, hi=-0.1):
    return SystemParams(float(rng.uniform(lo, hi)))
