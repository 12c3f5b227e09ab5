import numpy as np
import pytest

from mmbeam.array_channel import ArrayGeometry


def crandn(rng, *shape):
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2)


def unit_columns(rng, n, k=2):
    W = crandn(rng, n, k)
    return W / np.linalg.norm(W, axis=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def bs_array():
    return ArrayGeometry.planar(8, 8)


@pytest.fixture
def ue_array():
    return ArrayGeometry.linear(8)
