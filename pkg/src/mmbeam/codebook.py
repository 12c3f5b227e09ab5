"""Analog beamforming codebooks on a uniform steering-angle grid."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .array_channel import LINEAR, ArrayGeometry, steering_matrix
from .exceptions import ConfigurationError

BS1 = "bs1"
BS2 = "bs2"


@dataclass(frozen=True)
class Codebook:
    """Steering beams on an azimuth x elevation grid.

    Entry ``k = j * k_azimuth + i`` points at azimuth ``-pi + 2*pi*i/k_azimuth``
    and elevation ``-pi/2 + pi*j/k_elevation``.
    """

    geometry: ArrayGeometry
    entries: np.ndarray
    azimuths: np.ndarray
    elevations: np.ndarray
    k_azimuth: int
    k_elevation: int

    def __len__(self):
        return self.entries.shape[0]

    def __getitem__(self, k):
        return self.entries[k]


@dataclass(frozen=True, order=True)
class BeamPair:
    bs_index: int
    ue_index: int
    node: str = BS1


def build_codebook(geometry: ArrayGeometry, k_azimuth: int, k_elevation: int = 1) -> Codebook:
    if k_azimuth < 1 or k_elevation < 1:
        raise ConfigurationError("codebook grid sizes must be >= 1")
    if geometry.kind == LINEAR and k_elevation != 1:
        raise ConfigurationError(
            f"a linear array cannot be steered in elevation (k_elevation={k_elevation})",
            key="k_elevation")
    i = np.arange(k_azimuth)
    j = np.arange(k_elevation)
    az = -math.pi + i * (2 * math.pi / k_azimuth)
    el = -math.pi / 2 + j * (math.pi / k_elevation)
    az_grid = np.tile(az, k_elevation)
    el_grid = np.repeat(el, k_azimuth)
    entries = steering_matrix(geometry, az_grid, el_grid)
    entries.setflags(write=False)
    return Codebook(geometry, entries, az_grid, el_grid, k_azimuth, k_elevation)


def codebook_rows(cb: Codebook):
    """Rows ``(index, azimuth, elevation, re_0.., im_0..)`` for CSV export."""
    for k in range(len(cb)):
        e = cb.entries[k]
        yield [k, cb.azimuths[k], cb.elevations[k], *e.real, *e.imag]


def codebook_header(cb: Codebook):
    n = cb.geometry.n_elements
    return (["index", "azimuth_rad", "elevation_rad"]
            + [f"re_{i}" for i in range(n)] + [f"im_{i}" for i in range(n)])
