"""Parallel beam training: frame synthesis, observations and beam scoring.

Each training slot-pair ``p`` transmits the mixed matrix::

    S_p = [[S1_p, S2_p],
           [0,    Sp_p]]

where the first row carries baseline data in two consecutive symbol slots
and the pilot for the test beam overlaps the second slot. The UE sees
``Y_p = H S_p + N_p``.

Three scorers rank test beam pairs from the observations:

* ``phbf1``: least-squares estimate of the effective channel with the data
  symbols known, then the determinant sum-rate cost.
* ``phbf2``: element powers plus the cross products ``h11*h22`` and
  ``h12*h21``, which need the pilot to be the conjugated first data stream.
* ``phbf3``: element powers only, with the cross term replaced by its
  amplitude.

All arrays may carry leading batch axes (one per test pair); the slot axis
sits just before the trailing 2x2 axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import ConfigurationError
from .link import EffectiveChannel2x2, PowerConfig, g2_approx_from_powers

CONJUGATE_DATA = "conjugate_data"
INDEPENDENT = "independent"
PILOT_MODES = (CONJUGATE_DATA, INDEPENDENT)

QPSK = "qpsk"
GAUSSIAN = "gaussian"

_QPSK_POINTS = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / math.sqrt(2)


@dataclass
class UnitDraws:
    """Unit-power randomness behind one or more training runs.

    ``data`` has shape ``(..., P, 2)``, ``pilot`` ``(..., P)`` and ``noise``
    ``(..., P, 2, 2)`` with i.i.d. CN(0, 1) entries.
    """

    data: np.ndarray
    pilot: np.ndarray
    noise: np.ndarray

    @property
    def p_length(self):
        return self.data.shape[-2]


def _symbols(rng, shape, alphabet):
    if alphabet == QPSK:
        return _QPSK_POINTS[rng.integers(0, 4, size=shape)]
    if alphabet == GAUSSIAN:
        return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / math.sqrt(2)
    raise ConfigurationError(f"unknown symbol alphabet {alphabet!r}", key="alphabet")


def _cn(rng, shape):
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / math.sqrt(2)


def draw_unit(rng: np.random.Generator, p_length: int, alphabet: str = QPSK) -> UnitDraws:
    data = _symbols(rng, (p_length, 2), alphabet)
    pilot = _symbols(rng, (p_length,), alphabet)
    noise = _cn(rng, (p_length, 2, 2))
    return UnitDraws(data, pilot, noise)


def pair_rng(seed: int, k1: int, k2: int) -> np.random.Generator:
    """Independent stream for test pair ``(k1, k2)`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(k1, k2)))


def draw_unit_pairs(seed: int, k1s, k2s, p_length: int, alphabet: str = QPSK) -> UnitDraws:
    """Stacked per-pair draws; identical to drawing each pair on its own."""
    draws = [draw_unit(pair_rng(seed, int(a), int(b)), p_length, alphabet)
             for a, b in zip(k1s, k2s)]
    if not draws:
        return UnitDraws(np.zeros((0, p_length, 2), complex), np.zeros((0, p_length), complex),
                         np.zeros((0, p_length, 2, 2), complex))
    return UnitDraws(np.stack([d.data for d in draws]), np.stack([d.pilot for d in draws]),
                     np.stack([d.noise for d in draws]))


@dataclass
class TrainingFrame:
    data_symbols: np.ndarray
    pilot_symbols: np.ndarray
    pilot_mode: str
    sigma_s_sq: float
    sigma_sp_sq: float

    @property
    def p_length(self):
        return self.data_symbols.shape[-2]

    def mixed_matrices(self) -> np.ndarray:
        s = np.zeros(self.data_symbols.shape[:-1] + (2, 2), dtype=complex)
        s[..., 0, 0] = self.data_symbols[..., 0]
        s[..., 0, 1] = self.data_symbols[..., 1]
        s[..., 1, 1] = self.pilot_symbols
        return s


def frame_from_draws(draws: UnitDraws, p: PowerConfig, pilot_mode: str = CONJUGATE_DATA) -> TrainingFrame:
    """Scale unit draws to data power ``sigma_s^2`` and pilot power ``sigma_sp^2``.

    In ``conjugate_data`` mode the pilot is ``conj(S1) / sqrt(beta)``, which
    has power ``sigma_sp^2`` and makes the cross-term estimator unbiased.
    """
    if pilot_mode not in PILOT_MODES:
        raise ConfigurationError(f"unknown pilot mode {pilot_mode!r}", key="pilot_mode")
    sigma_s = math.sqrt(p.sigma_s_sq)
    data = draws.data * sigma_s
    if pilot_mode == CONJUGATE_DATA:
        pilot = np.conj(data[..., 0]) / math.sqrt(p.beta)
    else:
        pilot = draws.pilot * math.sqrt(p.sigma_sp_sq)
    return TrainingFrame(data, pilot, pilot_mode, p.sigma_s_sq, p.sigma_sp_sq)


def synth_frame(p_length: int, p: PowerConfig, pilot_mode: str, rng: np.random.Generator,
                alphabet: str = QPSK) -> TrainingFrame:
    if p_length < 1:
        raise ConfigurationError("pilot length P must be >= 1", key="p_length")
    data = _symbols(rng, (p_length, 2), alphabet)
    pilot = _symbols(rng, (p_length,), alphabet)
    empty = np.zeros((p_length, 2, 2), complex)
    return frame_from_draws(UnitDraws(data, pilot, empty), p, pilot_mode)


@dataclass
class Observation:
    y: np.ndarray
    frame: TrainingFrame
    noise_realization_seed: Optional[int] = None


def _psd_sqrt(r):
    vals, vecs = np.linalg.eigh(r)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))[..., None, :]) @ np.swapaxes(vecs.conj(), -1, -2)


def observe_from_noise(h, r, frame: TrainingFrame, p: PowerConfig, unit_noise=None) -> np.ndarray:
    """``Y_p = H S_p + sigma_n R^{1/2} Z_p``; ``unit_noise=None`` is noiseless."""
    h = np.asarray(h)
    s = frame.mixed_matrices()
    y = h[..., None, :, :] @ s
    if unit_noise is not None:
        root = _psd_sqrt(np.asarray(r))
        y = y + math.sqrt(p.sigma_n_sq) * (root[..., None, :, :] @ unit_noise)
    return y


def observe(eff: EffectiveChannel2x2, frame: TrainingFrame, p: PowerConfig,
            rng: Optional[np.random.Generator] = None, noiseless: bool = False) -> Observation:
    """Observations for one test pair.

    The noise columns are independent CN(0, sigma_n^2 R).
    """
    noise = None
    if not noiseless:
        if rng is None:
            raise ValueError("a noisy observation needs an rng")
        noise = _cn(rng, frame.data_symbols.shape[:-1] + (2, 2))
    return Observation(observe_from_noise(eff.h, eff.r, frame, p, noise), frame)


def estimate_ls(obs: Observation) -> np.ndarray:
    """Average of the per-slot least-squares estimates ``Y_p S_p^-1``."""
    s = obs.frame.mixed_matrices()
    a, b, c = s[..., 0, 0], s[..., 0, 1], s[..., 1, 1]
    if np.any(a == 0) or np.any(c == 0):
        raise np.linalg.LinAlgError("singular data/pilot matrix")
    inv = np.zeros_like(s)
    inv[..., 0, 0] = 1 / a
    inv[..., 0, 1] = -b / (a * c)
    inv[..., 1, 1] = 1 / c
    return np.mean(obs.y @ inv, axis=-3)


class PowerTerms(NamedTuple):
    p11: np.ndarray
    p21: np.ndarray
    p12: np.ndarray
    p22: np.ndarray


def estimate_power_terms(obs: Observation) -> PowerTerms:
    """Element power estimates without demodulation.

    The second-column powers come from differencing the two slots, so they
    can be negative for short frames; no clamping here.
    """
    y = obs.y
    e = np.abs(y) ** 2
    ss, ssp = obs.frame.sigma_s_sq, obs.frame.sigma_sp_sq
    p11 = e[..., 0, 0].mean(axis=-1) / ss
    p21 = e[..., 1, 0].mean(axis=-1) / ss
    p12 = (e[..., 0, 1] - e[..., 0, 0]).mean(axis=-1) / ssp
    p22 = (e[..., 1, 1] - e[..., 1, 0]).mean(axis=-1) / ssp
    return PowerTerms(p11, p21, p12, p22)


def estimate_cross_term(obs: Observation):
    """Estimates of ``h11*h22`` and ``h12*h21``; needs conjugated-data pilots."""
    if obs.frame.pilot_mode != CONJUGATE_DATA:
        raise ConfigurationError("cross-term estimation requires conjugate_data pilots",
                                 key="pilot_mode")
    y = obs.y
    scale = math.sqrt(obs.frame.sigma_sp_sq * obs.frame.sigma_s_sq)
    c1122 = (y[..., 0, 0] * y[..., 1, 1]).mean(axis=-1) / scale
    c1221 = (y[..., 0, 1] * y[..., 1, 0]).mean(axis=-1) / scale
    return c1122, c1221


def _normalizer(r, rho):
    det_r = (r[..., 0, 0] * r[..., 1, 1] - r[..., 0, 1] * r[..., 1, 0]).real
    return rho ** 2 / det_r


def g1_amplitude(p11, p21, p12, p22):
    """G1 with ``Re[h11 h22 (h12 h21)^*]`` replaced by its magnitude."""
    p11, p21, p12, p22 = (np.clip(x, 0.0, None) for x in (p11, p21, p12, p22))
    return p11 * p22 + p12 * p21 - 2 * np.sqrt(p11 * p22 * p12 * p21)


def g1_from_cross(p11, p21, p12, p22, c1122, c1221):
    return p11 * p22 + p12 * p21 - 2 * np.real(c1122 * np.conj(c1221))


def phbf2_score(powers: PowerTerms, c1122, c1221, r, rho):
    g1 = g1_from_cross(*powers, c1122, c1221)
    g2 = g2_approx_from_powers(*powers, r, rho)
    return _normalizer(r, rho) * (g1 + g2)


def phbf3_score(powers: PowerTerms, r, rho):
    g1 = g1_amplitude(*powers)
    g2 = g2_approx_from_powers(*powers, r, rho)
    return _normalizer(r, rho) * (g1 + g2)


def true_power_terms(h) -> PowerTerms:
    a = np.abs(np.asarray(h)) ** 2
    return PowerTerms(a[..., 0, 0], a[..., 1, 0], a[..., 0, 1], a[..., 1, 1])


def cost_phbf2(obs: Observation, p: PowerConfig, r) -> float:
    c1122, c1221 = estimate_cross_term(obs)
    return phbf2_score(estimate_power_terms(obs), c1122, c1221, np.asarray(r), p.rho)


def cost_phbf3(obs: Observation, p: PowerConfig, r) -> float:
    return phbf3_score(estimate_power_terms(obs), np.asarray(r), p.rho)
