"""Antenna array geometry, steering vectors and clustered channel generation.

Angles are mapped to normalized spatial frequencies before the phase
progression is applied: azimuth in [-pi, pi) maps to ``u = azimuth / pi`` and
elevation in [-pi/2, pi/2) maps to ``v = elevation / (pi/2)``, both in
[-1, 1). The element phase is ``2*pi*d*(m*u + n*v)`` for horizontal index
``m`` and vertical index ``n``. With half-wavelength spacing a uniform grid
over the full angle domains is then an oversampled DFT codebook whose entries
are all distinct.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .exceptions import ConfigurationError

PLANAR = "planar"
LINEAR = "linear"


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform rectangular (``planar``) or uniform linear (``linear``) array."""

    kind: str
    n_horizontal: int
    n_vertical: int = 1
    element_spacing: float = 0.5

    def __post_init__(self):
        if self.kind not in (PLANAR, LINEAR):
            raise ConfigurationError(f"unknown array kind {self.kind!r}", key="kind")
        if int(self.n_horizontal) < 1 or int(self.n_vertical) < 1:
            raise ConfigurationError("array dimensions must be positive")
        if self.kind == LINEAR and self.n_vertical != 1:
            raise ConfigurationError("a linear array has n_vertical = 1", key="n_vertical")
        if not self.element_spacing > 0:
            raise ConfigurationError("element_spacing must be positive", key="element_spacing")

    @classmethod
    def planar(cls, n_horizontal, n_vertical, element_spacing=0.5):
        return cls(PLANAR, n_horizontal, n_vertical, element_spacing)

    @classmethod
    def linear(cls, n_elements, element_spacing=0.5):
        return cls(LINEAR, n_elements, 1, element_spacing)

    @property
    def n_elements(self) -> int:
        return self.n_horizontal * self.n_vertical

    def element_indices(self) -> Tuple[np.ndarray, np.ndarray]:
        """Horizontal and vertical index of every element, horizontal fastest."""
        n, m = np.divmod(np.arange(self.n_elements), self.n_horizontal)
        return m, n


@dataclass(frozen=True)
class ClusterChannelParams:
    n_clusters: int = 5
    rays_per_cluster: int = 10
    angle_spread_deg: float = 5.0
    power_decay_db_per_cluster: float = 3.0
    seed: int = 0

    def validate(self):
        if self.n_clusters < 1:
            raise ConfigurationError("n_clusters must be >= 1", key="n_clusters")
        if self.rays_per_cluster < 1:
            raise ConfigurationError("rays_per_cluster must be >= 1", key="rays_per_cluster")
        if self.angle_spread_deg < 0:
            raise ConfigurationError("angle_spread_deg must be >= 0", key="angle_spread_deg")


@dataclass
class Ray:
    gain: complex
    tx_azimuth: float
    tx_elevation: float
    rx_azimuth: float


@dataclass
class ChannelRealization:
    """Propagation matrix of shape (N_UE, N_BS) and the rays that built it."""

    matrix: np.ndarray
    ray_list: List[Ray] = field(default_factory=list)

    @property
    def frobenius_norm_sq(self) -> float:
        return float(np.sum(np.abs(self.matrix) ** 2))

    @property
    def shape(self):
        return self.matrix.shape

    def scaled(self, amplitude: float) -> "ChannelRealization":
        rays = [Ray(r.gain * amplitude, r.tx_azimuth, r.tx_elevation, r.rx_azimuth)
                for r in self.ray_list]
        return ChannelRealization(self.matrix * amplitude, rays)


def steering_vector(geometry: ArrayGeometry, azimuth: float, elevation: float = 0.0) -> np.ndarray:
    """Unit-norm, constant-modulus array response toward ``(azimuth, elevation)``."""
    return steering_matrix(geometry, np.atleast_1d(azimuth), np.atleast_1d(elevation))[0]


def steering_matrix(geometry: ArrayGeometry, azimuths, elevations) -> np.ndarray:
    """Stacked steering vectors, one row per (azimuth, elevation) pair."""
    az = np.asarray(azimuths, dtype=float).reshape(-1)
    el = np.broadcast_to(np.asarray(elevations, dtype=float).reshape(-1), az.shape)
    m, n = geometry.element_indices()
    u = az / math.pi
    v = el / (math.pi / 2)
    phase = 2 * math.pi * geometry.element_spacing * (np.outer(u, m) + np.outer(v, n))
    return np.exp(1j * phase) / math.sqrt(geometry.n_elements)


def _wrap(angle, low, span):
    return (angle - low) % span + low


def channel_from_rays(rays, tx: ArrayGeometry, rx: ArrayGeometry) -> ChannelRealization:
    """Sum-of-rays matrix ``sqrt(N_UE*N_BS) * sum_i g_i a_rx(i) a_tx(i)^H``."""
    if len(rays) == 0:
        return ChannelRealization(np.zeros((rx.n_elements, tx.n_elements), complex), [])
    gains = np.array([r.gain for r in rays], dtype=complex)
    a_tx = steering_matrix(tx, [r.tx_azimuth for r in rays], [r.tx_elevation for r in rays])
    a_rx = steering_matrix(rx, [r.rx_azimuth for r in rays], np.zeros(len(rays)))
    matrix = (a_rx.T * gains) @ a_tx.conj()
    matrix *= math.sqrt(tx.n_elements * rx.n_elements)
    return ChannelRealization(matrix, list(rays))


def generate_channel(params: ClusterChannelParams, tx: ArrayGeometry, rx: ArrayGeometry,
                     rng: np.random.Generator) -> ChannelRealization:
    """Draw one clustered sum-of-rays channel from ``rng``.

    Cluster mean angles are uniform over the codebook angle domains, rays
    scatter around them with a Gaussian spread, and cluster powers decay
    exponentially with cluster index. Ray powers sum to one in expectation
    so that ``E[||H||_F^2] = N_UE * N_BS``.
    """
    params.validate()
    c, k = params.n_clusters, params.rays_per_cluster
    decay = 10.0 ** (-params.power_decay_db_per_cluster * np.arange(c) / 10.0)
    cluster_power = decay / decay.sum()

    mean_tx_az = rng.uniform(-math.pi, math.pi, c)
    mean_tx_el = rng.uniform(-math.pi / 2, math.pi / 2, c)
    mean_rx_az = rng.uniform(-math.pi, math.pi, c)
    spread = math.radians(params.angle_spread_deg)
    offsets = rng.normal(0.0, spread, (3, c, k))
    gains = (rng.normal(size=(c, k)) + 1j * rng.normal(size=(c, k))) / math.sqrt(2)
    gains *= np.sqrt(cluster_power / k)[:, None]

    tx_az = _wrap(mean_tx_az[:, None] + offsets[0], -math.pi, 2 * math.pi)
    tx_el = _wrap(mean_tx_el[:, None] + offsets[1], -math.pi / 2, math.pi)
    rx_az = _wrap(mean_rx_az[:, None] + offsets[2], -math.pi, 2 * math.pi)
    rays = [Ray(complex(g), float(a), float(e), float(b))
            for g, a, e, b in zip(gains.ravel(), tx_az.ravel(), tx_el.ravel(), rx_az.ravel())]
    return channel_from_rays(rays, tx, rx)
