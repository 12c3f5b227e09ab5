"""Baseline beam acquisition and exhaustive secondary beam-pair search."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import training
from .codebook import BS1, BS2, BeamPair, Codebook
from .exceptions import ConfigurationError
from .link import PowerConfig, _matrix, sum_rate_cost_batch

SINGLE_NODE = "single_node"
TWO_NODE = "two_node"
MODES = (SINGLE_NODE, TWO_NODE)

PERFECT_CSI = "perfect_csi"
PHBF1 = "phbf1"
PHBF2 = "phbf2"
PHBF3 = "phbf3"
ESTIMATORS = (PERFECT_CSI, PHBF1, PHBF2, PHBF3)


@dataclass
class PairSet:
    """Admissible test pairs with their true effective channels."""

    mode: str
    k1: np.ndarray
    k2: np.ndarray
    h: np.ndarray
    r: np.ndarray

    def __len__(self):
        return len(self.k1)


@dataclass
class SearchResult:
    best_pair: BeamPair
    best_score: float
    ranked_pairs: List[Tuple[BeamPair, float]]
    n_evaluated: int
    estimator_used: str
    pairs: Optional[PairSet] = field(default=None, repr=False)
    scores: Optional[np.ndarray] = field(default=None, repr=False)


def select_baseline(H1, bs_cb: Codebook, ue_cb: Codebook) -> BeamPair:
    """Analog pair maximizing ``|w^T H f|^2``; ties go to the smallest ``(k1, k2)``."""
    if len(bs_cb) == 0 or len(ue_cb) == 0:
        raise ConfigurationError("codebooks must be nonempty")
    gains = ue_cb.entries @ _matrix(H1) @ bs_cb.entries.T
    power = np.abs(gains.T) ** 2
    k1, k2 = np.unravel_index(int(np.argmax(power)), power.shape)
    return BeamPair(int(k1), int(k2), BS1)


def expected_pair_count(mode, k_bs, k_ue):
    if mode == SINGLE_NODE:
        return (k_bs - 1) * (k_ue - 1)
    return k_bs * (k_ue - 1)


def admissible_pairs(mode, k_bs, k_ue, baseline: BeamPair):
    """Test pairs in ascending ``(k1, k2)`` order.

    The baseline UE beam is never reused; in single-node mode the baseline
    BS beam is excluded as well.
    """
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}", key="mode")
    k1 = np.arange(k_bs)
    if mode == SINGLE_NODE:
        k1 = k1[k1 != baseline.bs_index]
    k2 = np.arange(k_ue)
    k2 = k2[k2 != baseline.ue_index]
    g1, g2 = np.meshgrid(k1, k2, indexing="ij")
    return g1.ravel(), g2.ravel()


def build_pair_set(mode, H1, H2, baseline: BeamPair, bs_cb: Codebook, ue_cb: Codebook,
                   bs2_cb: Optional[Codebook] = None) -> PairSet:
    """True 2x2 effective channels and combiner correlations for every test pair."""
    H1 = _matrix(H1)
    test_cb = bs_cb
    if mode == TWO_NODE:
        if H2 is None:
            raise ConfigurationError("two-node search needs the BS #2 channel")
        test_cb = bs2_cb if bs2_cb is not None else bs_cb
        H_test = _matrix(H2)
    else:
        H_test = H1
    k1, k2 = admissible_pairs(mode, len(test_cb), len(ue_cb), baseline)

    f_base = bs_cb.entries[baseline.bs_index]
    w_base = ue_cb.entries[baseline.ue_index]
    hf_base = H1 @ f_base
    hf_test = H_test @ test_cb.entries.T

    h = np.empty((len(k1), 2, 2), dtype=complex)
    h[:, 0, 0] = w_base @ hf_base
    h[:, 0, 1] = (w_base @ hf_test)[k1]
    h[:, 1, 0] = (ue_cb.entries @ hf_base)[k2]
    h[:, 1, 1] = (ue_cb.entries @ hf_test)[k2, k1]

    w_test = ue_cb.entries[k2]
    r = np.empty_like(h)
    r[:, 0, 0] = np.vdot(w_base, w_base).real
    r[:, 1, 1] = np.sum(np.abs(w_test) ** 2, axis=-1)
    r[:, 0, 1] = w_test @ w_base.conj()
    r[:, 1, 0] = np.conj(r[:, 0, 1])
    return PairSet(mode, k1, k2, h, r)


def score_pairs(estimator, pairs: PairSet, p: PowerConfig, draws: Optional[training.UnitDraws] = None,
                pilot_mode=training.CONJUGATE_DATA) -> np.ndarray:
    """Score every test pair with ``estimator``; larger is better.

    ``draws`` supplies the per-pair training symbols and noise and is
    required by every estimator except ``perfect_csi``.
    """
    if estimator == PERFECT_CSI:
        return sum_rate_cost_batch(pairs.h, pairs.r, p.rho)
    if estimator not in ESTIMATORS:
        raise ConfigurationError(f"unknown estimator {estimator!r}", key="estimators")
    if draws is None:
        raise ValueError(f"estimator {estimator} needs training draws")
    if estimator == PHBF2 and pilot_mode != training.CONJUGATE_DATA:
        raise ConfigurationError("phbf2 requires conjugate_data pilots", key="pilot_mode")

    frame = training.frame_from_draws(draws, p, pilot_mode)
    y = training.observe_from_noise(pairs.h, pairs.r, frame, p, draws.noise)
    obs = training.Observation(y, frame)
    if estimator == PHBF1:
        return sum_rate_cost_batch(training.estimate_ls(obs), pairs.r, p.rho)
    if estimator == PHBF2:
        return training.cost_phbf2(obs, p, pairs.r)
    return training.cost_phbf3(obs, p, pairs.r)


def rank(pairs: PairSet, scores, estimator, node) -> SearchResult:
    if len(pairs) == 0:
        raise ConfigurationError("no admissible test pairs (codebooks too small)")
    scores = np.asarray(scores, dtype=float)
    order = np.lexsort((pairs.k2, pairs.k1, -scores))
    ranked = [(BeamPair(int(pairs.k1[i]), int(pairs.k2[i]), node), float(scores[i])) for i in order]
    return SearchResult(ranked[0][0], ranked[0][1], ranked, len(pairs), estimator,
                        pairs=pairs, scores=scores)


def search_secondary(mode, H1, H2, baseline: BeamPair, bs_cb: Codebook, ue_cb: Codebook,
                     estimator, p: PowerConfig, p_length: int = 10, seed: int = 0,
                     pilot_mode=training.CONJUGATE_DATA, alphabet=training.QPSK,
                     bs2_cb: Optional[Codebook] = None, draws=None) -> SearchResult:
    """Exhaustive search over all admissible secondary beam pairs.

    Training randomness for pair ``(k1, k2)`` comes from its own stream
    derived from ``(seed, k1, k2)``, so results do not depend on evaluation
    order.
    """
    pairs = build_pair_set(mode, H1, H2, baseline, bs_cb, ue_cb, bs2_cb)
    if estimator != PERFECT_CSI and draws is None:
        if p_length < 1:
            raise ConfigurationError("pilot length P must be >= 1", key="p_length")
        draws = training.draw_unit_pairs(seed, pairs.k1, pairs.k2, p_length, alphabet)
    scores = score_pairs(estimator, pairs, p, draws, pilot_mode)
    node = BS1 if mode == SINGLE_NODE else BS2
    return rank(pairs, scores, estimator, node)


def backup_pair(result: SearchResult) -> BeamPair:
    """Pair to fall back on if the baseline link is blocked."""
    if not result.ranked_pairs:
        raise ValueError("empty search result")
    return result.ranked_pairs[0][0]
