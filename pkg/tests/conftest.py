import numpy as np
import pytest

from series import Series
from synth import GenSpec, gen_series


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def brownian(rng):
    """Random walk of 2^16 unit Gaussian steps."""
    return Series.from_values(np.cumsum(rng.standard_normal(2 ** 16)), label="brownian")


def make(kind, length=None, seed=1, **params):
    return gen_series(GenSpec(kind, length, seed, params))
