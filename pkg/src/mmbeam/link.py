"""Effective 2x2 channel algebra and the link metrics built on it.

Beamformers follow the transpose convention ``w^T H f`` for the received
signal while the combiner correlation is ``R = W^H W``. Every kernel here
accepts stacks of 2x2 matrices with shape ``(..., 2, 2)`` so a whole beam
sweep is scored in one call; the scalar wrappers take
:class:`EffectiveChannel2x2`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import SingularCombinerError

SINGULAR_DET_TOL = 1e-12


@dataclass(frozen=True)
class PowerConfig:
    """Transmit, noise and pilot powers (linear).

    ``beta`` is the data-to-pilot power ratio; data keeps the full transmit
    power during training, so the pilot power is ``sigma_x_sq / beta``.
    """

    sigma_x_sq: float = 1.0
    sigma_n_sq: float = 0.1
    beta: float = 1.0

    def __post_init__(self):
        if not (self.sigma_x_sq > 0 and self.sigma_n_sq > 0 and self.beta > 0):
            raise ValueError("powers and beta must be positive")

    @classmethod
    def from_snr_db(cls, snr_db, beta=1.0, sigma_x_sq=1.0):
        """Per-antenna received SNR ``sigma_x_sq / sigma_n_sq`` in dB."""
        return cls(sigma_x_sq, sigma_x_sq / 10.0 ** (snr_db / 10.0), beta)

    @property
    def sigma_s_sq(self) -> float:
        return self.sigma_x_sq

    @property
    def sigma_sp_sq(self) -> float:
        return self.sigma_x_sq / self.beta

    @property
    def rho(self) -> float:
        return self.sigma_x_sq / (2.0 * self.sigma_n_sq)

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.sigma_x_sq / self.sigma_n_sq)


@dataclass(frozen=True)
class EffectiveChannel2x2:
    h: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        if self.h.shape != (2, 2) or self.r.shape != (2, 2):
            raise ValueError("effective channel and correlation must be 2x2")

    @property
    def h11(self):
        return self.h[0, 0]

    @property
    def h12(self):
        return self.h[0, 1]

    @property
    def h21(self):
        return self.h[1, 0]

    @property
    def h22(self):
        return self.h[1, 1]


def _matrix(H):
    return H.matrix if hasattr(H, "matrix") else np.asarray(H)


def _check_dims(H, f, w):
    if H.shape != (w.shape[-1], f.shape[-1]):
        raise ValueError(f"beam sizes {w.shape[-1]}x{f.shape[-1]} do not match channel {H.shape}")


def baseline_gain(H, f, w) -> complex:
    """Scalar analog link gain ``w^T H f``."""
    H = _matrix(H)
    f, w = np.asarray(f), np.asarray(w)
    _check_dims(H, f, w)
    return complex(w @ H @ f)


def combiner_correlation(w_base, w_test) -> np.ndarray:
    """``R = W^H W`` for ``W = [w_base w_test]``; accepts stacked ``w_test``."""
    w_base = np.asarray(w_base)
    w_test = np.asarray(w_test)
    W = np.stack(np.broadcast_arrays(w_base, w_test), axis=-1)
    return np.swapaxes(W.conj(), -1, -2) @ W


def effective_channel_single_node(H1, f_base, f_test, w_base, w_test) -> EffectiveChannel2x2:
    H = _matrix(H1)
    _check_dims(H, np.asarray(f_test), np.asarray(w_test))
    W = np.column_stack([w_base, w_test])
    F = np.column_stack([f_base, f_test])
    return EffectiveChannel2x2(W.T @ H @ F, W.conj().T @ W)


def effective_channel_two_node(H1, H2, f_base, f_test, w_base, w_test) -> EffectiveChannel2x2:
    H1, H2 = _matrix(H1), _matrix(H2)
    _check_dims(H1, np.asarray(f_base), np.asarray(w_base))
    _check_dims(H2, np.asarray(f_test), np.asarray(w_test))
    W = np.column_stack([w_base, w_test])
    cols = np.column_stack([H1 @ f_base, H2 @ f_test])
    return EffectiveChannel2x2(W.T @ cols, W.conj().T @ W)


def _det2(a):
    return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]


def _check_invertible(r):
    d = np.abs(_det2(r))
    if np.any(d <= SINGULAR_DET_TOL):
        raise SingularCombinerError("combiner correlation is singular (duplicate UE beams?)")


def sum_rate_cost_batch(h, r, rho) -> np.ndarray:
    """``det(I + rho R^-1 H^H H)`` over stacks; singular ``R`` scores ``-inf``.

    ``rho`` is a scalar or broadcasts against the stack shape.
    """
    h = np.asarray(h)
    r = np.asarray(r)
    rho = np.asarray(rho, dtype=float)[..., None, None]
    singular = np.abs(_det2(r)) <= SINGULAR_DET_TOL
    r_safe = np.where(singular[..., None, None], np.eye(2), r)
    gram = np.swapaxes(h.conj(), -1, -2) @ h
    m = np.eye(2) + rho * np.linalg.solve(r_safe, gram)
    cost = np.linalg.det(m).real
    return np.where(singular, -np.inf, cost)


def sum_rate_cost(eff: EffectiveChannel2x2, p: PowerConfig) -> float:
    _check_invertible(eff.r)
    return float(sum_rate_cost_batch(eff.h, eff.r, p.rho))


def sum_rate_cost_factored(eff: EffectiveChannel2x2, p: PowerConfig) -> float:
    """Same cost via ``det(rho R^-1) * det(H^H H + R / rho)``."""
    _check_invertible(eff.r)
    rho = p.rho
    a = np.linalg.det(rho * np.linalg.inv(eff.r))
    b = np.linalg.det(eff.h.conj().T @ eff.h + eff.r / rho)
    return float((a * b).real)


def rate_bits(cost):
    return np.log2(cost)


class GTerms(NamedTuple):
    g1: float
    g2: float
    g2_exact: float


def g1_exact_batch(h):
    h11, h12, h21, h22 = h[..., 0, 0], h[..., 0, 1], h[..., 1, 0], h[..., 1, 1]
    return (np.abs(h11) ** 2 * np.abs(h22) ** 2 + np.abs(h12) ** 2 * np.abs(h21) ** 2
            - 2 * np.real(h11 * h22 * np.conj(h12 * h21)))


def g2_approx_from_powers(p11, p21, p12, p22, r, rho):
    """G2 with the off-diagonal correlation cross terms dropped.

    Column powers pair with the opposite diagonal correlation entry; the two
    coincide for unit-norm combiners.
    """
    r11 = r[..., 0, 0].real
    r22 = r[..., 1, 1].real
    r12r21 = (r[..., 0, 1] * r[..., 1, 0]).real
    return (r22 * (p11 + p21) / rho + r11 * (p12 + p22) / rho
            + (r11 * r22 - r12r21) / rho ** 2)


def g2_exact_batch(h, r, rho):
    h11, h12, h21, h22 = h[..., 0, 0], h[..., 0, 1], h[..., 1, 0], h[..., 1, 1]
    a = np.abs(h) ** 2
    approx = g2_approx_from_powers(a[..., 0, 0], a[..., 1, 0], a[..., 0, 1], a[..., 1, 1], r, rho)
    r12, r21 = r[..., 0, 1], r[..., 1, 0]
    cross = (r12 * (h11 * np.conj(h12) + h21 * np.conj(h22))
             + r21 * (h12 * np.conj(h11) + h22 * np.conj(h21))) / rho
    return approx - cross.real


def g_terms_exact(eff: EffectiveChannel2x2, p: PowerConfig) -> GTerms:
    """Split ``det(H^H H + R/rho)`` into G1 and G2.

    ``g2`` drops the terms linear in ``r12``/``r21``; ``g2_exact`` keeps them
    so that ``g1 + g2_exact`` equals the determinant.
    """
    h, r, rho = eff.h, eff.r, p.rho
    a = np.abs(h) ** 2
    g2 = g2_approx_from_powers(a[0, 0], a[1, 0], a[0, 1], a[1, 1], r, rho)
    return GTerms(float(g1_exact_batch(h)), float(g2), float(g2_exact_batch(h, r, rho)))


def digital_beamforming_reference(H, p: PowerConfig, n_streams: int = 2) -> float:
    """Equal-power rate over the strongest ``n_streams`` singular modes of ``H``."""
    s = np.linalg.svd(_matrix(H), compute_uv=False)[:n_streams]
    return float(np.sum(np.log2(1.0 + p.rho * s ** 2)))


def baseline_sinr_batch(h, r, p: PowerConfig):
    num = p.sigma_s_sq * np.abs(h[..., 0, 0]) ** 2
    den = p.sigma_sp_sq * np.abs(h[..., 0, 1]) ** 2 + p.sigma_n_sq * r[..., 0, 0].real
    return num / den


def baseline_sinr_during_training(eff: EffectiveChannel2x2, p: PowerConfig) -> float:
    """Stream-1 SINR while the test pair is probed.

    Signal through the baseline pair against pilot leakage through ``h12``
    plus combined noise.
    """
    return float(baseline_sinr_batch(eff.h, eff.r, p))
