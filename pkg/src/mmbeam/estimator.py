"""scikit-learn style wrapper around the two-step beam acquisition."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import training
from ._validation import check_channel, check_seed
from .array_channel import ArrayGeometry
from .codebook import build_codebook
from .link import PowerConfig, effective_channel_single_node, effective_channel_two_node, sum_rate_cost
from .search import ESTIMATORS, MODES, SINGLE_NODE, TWO_NODE, backup_pair, search_secondary, select_baseline


class SequentialBeamformer(BaseEstimator):
    """Analog baseline pair plus a secondary pair found by parallel training.

    ``fit(H1, H2=None)`` selects the baseline pair on ``H1`` and then searches
    the secondary pair (on ``H1`` for ``mode='single_node'``, on ``H2`` for
    ``mode='two_node'``) with the chosen scorer. ``transform`` returns the
    2x2 effective channel the fitted beams produce on a channel, and
    ``score`` its achievable sum rate in bits/s/Hz.

    Parameters
    ----------
    mode : {'single_node', 'two_node'}
    bs_shape : (int, int)
        Horizontal and vertical element counts of the planar BS array.
    ue_elements : int
        Elements of the UE linear array.
    codebook_sizes : (int, int, int)
        BS azimuth and elevation grid sizes and UE azimuth grid size.
    estimator : {'perfect_csi', 'phbf1', 'phbf2', 'phbf3'}
    snr_db, beta, p_length, pilot_mode
        Per-antenna SNR, data-to-pilot power ratio, training length and
        pilot construction.
    random_state : int, numpy Generator or None
        Seeds the training symbols and noise.

    Attributes
    ----------
    baseline_pair_, secondary_pair_, backup_pair_ : BeamPair
    search_result_ : SearchResult
    n_evaluated_ : int
    """

    def __init__(self, mode=SINGLE_NODE, bs_shape=(8, 8), ue_elements=8, codebook_sizes=(32, 16, 16),
                 estimator="phbf3", snr_db=10.0, beta=1.0, p_length=10,
                 pilot_mode=training.CONJUGATE_DATA, random_state=None):
        self.mode = mode
        self.bs_shape = bs_shape
        self.ue_elements = ue_elements
        self.codebook_sizes = codebook_sizes
        self.estimator = estimator
        self.snr_db = snr_db
        self.beta = beta
        self.p_length = p_length
        self.pilot_mode = pilot_mode
        self.random_state = random_state

    def _check_params(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")

    def _channels(self, H1, H2):
        n = self.bs_array_.n_elements
        H1 = check_channel(H1, (self.ue_array_.n_elements, n), "H1")
        if self.mode == TWO_NODE:
            if H2 is None:
                raise ValueError("two_node mode needs the BS #2 channel H2")
            H2 = check_channel(H2, H1.shape, "H2")
        return H1, H2

    def fit(self, H1, H2=None):
        self._check_params()
        self.bs_array_ = ArrayGeometry.planar(*self.bs_shape)
        self.ue_array_ = ArrayGeometry.linear(self.ue_elements)
        ka, ke, ku = self.codebook_sizes
        self.bs_codebook_ = build_codebook(self.bs_array_, ka, ke)
        self.ue_codebook_ = build_codebook(self.ue_array_, ku, 1)
        H1, H2 = self._channels(H1, H2)
        self.power_ = PowerConfig.from_snr_db(self.snr_db, self.beta)
        self.baseline_pair_ = select_baseline(H1, self.bs_codebook_, self.ue_codebook_)
        self.search_result_ = search_secondary(
            self.mode, H1, H2, self.baseline_pair_, self.bs_codebook_, self.ue_codebook_,
            self.estimator, self.power_, self.p_length, check_seed(self.random_state),
            self.pilot_mode)
        self.secondary_pair_ = self.search_result_.best_pair
        self.backup_pair_ = backup_pair(self.search_result_)
        self.n_evaluated_ = self.search_result_.n_evaluated
        return self

    def transform(self, H1, H2=None):
        check_is_fitted(self, "secondary_pair_")
        H1, H2 = self._channels(H1, H2)
        bs, ue = self.bs_codebook_, self.ue_codebook_
        base, sec = self.baseline_pair_, self.secondary_pair_
        args = (bs[base.bs_index], bs[sec.bs_index], ue[base.ue_index], ue[sec.ue_index])
        if self.mode == SINGLE_NODE:
            return effective_channel_single_node(H1, *args)
        return effective_channel_two_node(H1, H2, *args)

    def fit_transform(self, H1, H2=None):
        return self.fit(H1, H2).transform(H1, H2)

    def score(self, H1, H2=None):
        """True sum rate (bits/s/Hz) of the fitted beams on the given channel."""
        return float(np.log2(sum_rate_cost(self.transform(H1, H2), self.power_)))
