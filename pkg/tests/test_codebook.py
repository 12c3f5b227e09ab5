import itertools
import math

import numpy as np
import pytest

from mmbeam.array_channel import ArrayGeometry, steering_vector
from mmbeam.codebook import build_codebook
from mmbeam.exceptions import ConfigurationError


def test_ue_codebook_size(ue_array):
    assert len(build_codebook(ue_array, 16, 1)) == 16


def test_bs_codebook_size(bs_array):
    cb = build_codebook(bs_array, 32, 16)
    assert len(cb) == 512
    assert cb.entries.shape == (512, 64)


def test_single_entry_at_grid_origin(bs_array):
    cb = build_codebook(bs_array, 1, 1)
    assert len(cb) == 1
    assert cb.azimuths[0] == -math.pi
    assert cb.elevations[0] == -math.pi / 2
    np.testing.assert_allclose(cb[0], steering_vector(bs_array, -math.pi, -math.pi / 2))


def test_azimuth_fastest_ordering(bs_array):
    cb = build_codebook(bs_array, 4, 3)
    for j, i in itertools.product(range(3), range(4)):
        k = j * 4 + i
        assert cb.azimuths[k] == pytest.approx(-math.pi + i * math.pi / 2)
        assert cb.elevations[k] == pytest.approx(-math.pi / 2 + j * math.pi / 3)
        np.testing.assert_allclose(cb[k], steering_vector(bs_array, cb.azimuths[k], cb.elevations[k]),
                                   atol=1e-14)


def test_linear_rejects_elevation_grid(ue_array):
    with pytest.raises(ConfigurationError):
        build_codebook(ue_array, 16, 2)


def test_deterministic(bs_array):
    assert np.array_equal(build_codebook(bs_array, 8, 4).entries, build_codebook(bs_array, 8, 4).entries)


def test_entries_constant_modulus(bs_array):
    e = build_codebook(bs_array, 32, 16).entries
    assert np.ptp(np.abs(e)) < 1e-12
    np.testing.assert_allclose(np.linalg.norm(e, axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("geo,ka,ke", [
    (ArrayGeometry.linear(8), 16, 1),
    (ArrayGeometry.linear(8), 8, 1),
    (ArrayGeometry.planar(8, 8), 16, 16),
    (ArrayGeometry.planar(4, 4), 8, 8),
])
def test_entries_pairwise_distinct(geo, ka, ke):
    e = build_codebook(geo, ka, ke).entries
    gram = np.abs(e.conj() @ e.T)
    np.fill_diagonal(gram, 0.0)
    assert gram.max() < 1 - 1e-9


def test_orthogonal_when_grid_matches_array(ue_array):
    e = build_codebook(ue_array, 8, 1).entries
    np.testing.assert_allclose(e.conj() @ e.T, np.eye(8), atol=1e-12)
