"""Monte-Carlo experiment engine and result aggregation.

Each trial draws the channels, acquires the baseline pair, and then scores
every admissible secondary pair with each requested estimator at each SNR
point (and each pilot power ratio for the training-based estimators). The
estimators only decide *which* pair is chosen; the reported rate is always
the true sum-rate of that pair.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import training
from .array_channel import ArrayGeometry, ClusterChannelParams, generate_channel
from .codebook import BS1, BS2, BeamPair, Codebook, build_codebook
from .exceptions import ConfigurationError
from .link import (PowerConfig, baseline_sinr_batch, digital_beamforming_reference,
                   sum_rate_cost_batch)
from .search import (ESTIMATORS, MODES, PERFECT_CSI, SINGLE_NODE, TWO_NODE,
                     build_pair_set, score_pairs, select_baseline)

logger = logging.getLogger(__name__)

DB = "db"
ALL_ESTIMATORS = (DB,) + ESTIMATORS
TRAINED = tuple(e for e in ESTIMATORS if e != PERFECT_CSI)

SINR_POPULATION = ("baseline stream-1 SINR during training, one sample per admissible "
                   "test pair per trial")


@dataclass
class ScenarioConfig:
    mode: str = SINGLE_NODE
    bs_array: ArrayGeometry = field(default_factory=lambda: ArrayGeometry.planar(8, 8))
    ue_array: ArrayGeometry = field(default_factory=lambda: ArrayGeometry.linear(8))
    codebook_sizes: Tuple[int, int, int] = (32, 16, 16)
    channel_params: ClusterChannelParams = field(default_factory=ClusterChannelParams)
    snr_grid_db: List[float] = field(default_factory=lambda: [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0])
    beta_list: List[float] = field(default_factory=lambda: [1.0])
    p_length: int = 10
    estimators: List[str] = field(default_factory=lambda: list(ALL_ESTIMATORS))
    n_trials: int = 100
    bs2_power_offset_db: float = -6.0
    master_seed: int = 0
    pilot_mode: str = training.CONJUGATE_DATA
    alphabet: str = training.QPSK
    sinr_snr_db: float = 10.0

    def validate(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}", key="mode")
        if self.n_trials < 1:
            raise ConfigurationError("n_trials must be >= 1", key="n_trials")
        if not self.snr_grid_db:
            raise ConfigurationError("snr_grid_db must be nonempty", key="snr_grid_db")
        if not self.beta_list or any(not b > 0 for b in self.beta_list):
            raise ConfigurationError("beta_list must hold positive values", key="beta_list")
        if self.p_length < 1:
            raise ConfigurationError("p_length must be >= 1", key="p_length")
        if not self.estimators:
            raise ConfigurationError("at least one estimator is required", key="estimators")
        for e in self.estimators:
            if e not in ALL_ESTIMATORS:
                raise ConfigurationError(f"unknown estimator {e!r}", key="estimators")
        if math.isfinite(self.bs2_power_offset_db) and self.bs2_power_offset_db > -6.0:
            raise ConfigurationError("bs2_power_offset_db must be <= -6 dB or -inf",
                                     key="bs2_power_offset_db")
        if not math.isfinite(self.bs2_power_offset_db) and self.bs2_power_offset_db > 0:
            raise ConfigurationError("bs2_power_offset_db cannot be +inf", key="bs2_power_offset_db")
        if self.pilot_mode not in training.PILOT_MODES:
            raise ConfigurationError(f"unknown pilot mode {self.pilot_mode!r}", key="pilot_mode")
        if "phbf2" in self.estimators and self.pilot_mode != training.CONJUGATE_DATA:
            raise ConfigurationError("phbf2 requires pilot_mode conjugate_data", key="pilot_mode")
        if self.alphabet not in (training.QPSK, training.GAUSSIAN):
            raise ConfigurationError(f"unknown alphabet {self.alphabet!r}", key="alphabet")
        if self.master_seed < 0:
            raise ConfigurationError("master_seed must be non-negative", key="master_seed")
        self.channel_params.validate()
        ka, ke, ku = self.codebook_sizes
        if min(ka, ke, ku) < 1:
            raise ConfigurationError("codebook sizes must be >= 1", key="codebook_sizes")
        if ku < 2:
            raise ConfigurationError("the UE codebook needs at least 2 beams", key="codebook_sizes")
        if self.mode == SINGLE_NODE and ka * ke < 2:
            raise ConfigurationError("single-node search needs at least 2 BS beams",
                                     key="codebook_sizes")
        build_codebook(self.bs_array, ka, ke)
        build_codebook(self.ue_array, ku, 1)
        return self

    def codebooks(self) -> Tuple[Codebook, Codebook]:
        ka, ke, ku = self.codebook_sizes
        return build_codebook(self.bs_array, ka, ke), build_codebook(self.ue_array, ku, 1)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["codebook_sizes"] = list(self.codebook_sizes)
        d["bs2_power_offset_db"] = _encode_float(self.bs2_power_offset_db)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigurationError(f"unknown config key {key!r}", key=key)
        try:
            if "bs_array" in d:
                d["bs_array"] = _geometry(d["bs_array"], "bs_array")
            if "ue_array" in d:
                d["ue_array"] = _geometry(d["ue_array"], "ue_array")
            if "channel_params" in d:
                d["channel_params"] = ClusterChannelParams(**d["channel_params"])
            if "codebook_sizes" in d:
                sizes = tuple(int(x) for x in d["codebook_sizes"])
                if len(sizes) != 3:
                    raise ConfigurationError("codebook_sizes is [K_BS_az, K_BS_el, K_UE_az]",
                                             key="codebook_sizes")
                d["codebook_sizes"] = sizes
            if "bs2_power_offset_db" in d:
                d["bs2_power_offset_db"] = _decode_float(d["bs2_power_offset_db"])
            for k in ("snr_grid_db", "beta_list"):
                if k in d:
                    d[k] = [float(x) for x in d[k]]
            for k in ("n_trials", "p_length", "master_seed"):
                if k in d:
                    d[k] = _as_int(d[k], k)
            for k in ("sinr_snr_db",):
                if k in d:
                    d[k] = float(d[k])
            if "estimators" in d:
                d["estimators"] = list(d["estimators"])
        except ConfigurationError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(str(exc)) from exc
        return cls(**d).validate()


def _as_int(v, key):
    if isinstance(v, bool) or float(v) != int(float(v)):
        raise ConfigurationError(f"{key} must be an integer", key=key)
    return int(float(v))


def _geometry(d, key):
    if isinstance(d, ArrayGeometry):
        return d
    try:
        return ArrayGeometry(**d)
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), key=key) from exc
    except TypeError as exc:
        raise ConfigurationError(f"{key}: {exc}", key=key) from exc


def _encode_float(x):
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return x


def _decode_float(x):
    if x is None:
        return -math.inf
    return float(x)


@dataclass
class TrialRecord:
    trial_id: int
    snr_db: float
    beta: Optional[float]
    estimator: str
    chosen_pair: Optional[BeamPair]
    achieved_rate_bits: float
    baseline_rate_bits: float
    baseline_snr_db: float
    baseline_sinr_db: Optional[float]
    db_rate_bits: float
    probe_symbols: int
    sinr_samples_db: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def label(self):
        return self.estimator if self.beta is None else f"{self.estimator}[beta={self.beta:g}]"


RECORD_COLUMNS = ["trial_id", "snr_db", "beta", "estimator", "k1", "k2", "node",
                  "achieved_rate_bits", "baseline_rate_bits", "baseline_snr_db",
                  "baseline_sinr_db", "db_rate_bits", "probe_symbols"]


def record_row(rec: TrialRecord):
    pair = rec.chosen_pair
    return [rec.trial_id, rec.snr_db, rec.beta, rec.estimator,
            None if pair is None else pair.bs_index, None if pair is None else pair.ue_index,
            None if pair is None else pair.node, rec.achieved_rate_bits, rec.baseline_rate_bits,
            rec.baseline_snr_db, rec.baseline_sinr_db, rec.db_rate_bits, rec.probe_symbols]


def trial_seeds(master_seed: int, trial_id: int, channel_seed: int = 0):
    """Channel generators for BS #1 and BS #2 and the integer training seed."""
    entropy = (master_seed, channel_seed)
    rng1 = np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(trial_id, 1)))
    rng2 = np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(trial_id, 2)))
    tseed = int(np.random.SeedSequence(entropy, spawn_key=(trial_id, 3)).generate_state(1, np.uint64)[0])
    return rng1, rng2, tseed


def _first_best(scores):
    s = np.where(np.isnan(scores), -np.inf, scores)
    return int(np.argmax(s))


def _log2(x):
    return float(np.log2(x))


def run_trial(cfg: ScenarioConfig, trial_id: int, bs_cb: Codebook, ue_cb: Codebook) -> List[TrialRecord]:
    rng1, rng2, tseed = trial_seeds(cfg.master_seed, trial_id, cfg.channel_params.seed)
    H1 = generate_channel(cfg.channel_params, cfg.bs_array, cfg.ue_array, rng1)
    H2 = None
    if cfg.mode == TWO_NODE:
        H2 = generate_channel(cfg.channel_params, cfg.bs_array, cfg.ue_array, rng2)
        H2 = H2.scaled(10.0 ** (cfg.bs2_power_offset_db / 20.0))

    baseline = select_baseline(H1, bs_cb, ue_cb)
    pairs = build_pair_set(cfg.mode, H1, H2, baseline, bs_cb, ue_cb)
    node = BS1 if cfg.mode == SINGLE_NODE else BS2
    trained = [e for e in cfg.estimators if e in TRAINED]
    draws = None
    if trained:
        draws = training.draw_unit_pairs(tseed, pairs.k1, pairs.k2, cfg.p_length, cfg.alphabet)
    db_channel = H1.matrix if H2 is None else np.hstack([H1.matrix, H2.matrix])
    h11_sq = float(np.abs(pairs.h[0, 0, 0]) ** 2) if len(pairs) else 0.0
    probe_symbols = 2 * cfg.p_length * len(pairs)

    records = []
    for snr in cfg.snr_grid_db:
        p0 = PowerConfig.from_snr_db(snr)
        true_cost = sum_rate_cost_batch(pairs.h, pairs.r, p0.rho)
        db_rate = digital_beamforming_reference(db_channel, p0)
        base_snr = p0.sigma_x_sq * h11_sq / p0.sigma_n_sq
        base_rate = math.log2(1.0 + base_snr)
        base_snr_db = 10.0 * math.log10(base_snr) if base_snr > 0 else -math.inf

        def record(est, beta, idx, sinr_db=None, samples=None, probes=0):
            pair = None
            rate = db_rate
            if idx is not None:
                pair = BeamPair(int(pairs.k1[idx]), int(pairs.k2[idx]), node)
                rate = _log2(true_cost[idx])
            return TrialRecord(trial_id, snr, beta, est, pair, rate, base_rate, base_snr_db,
                               sinr_db, db_rate, probes, samples)

        if DB in cfg.estimators:
            records.append(record(DB, None, None))
        if PERFECT_CSI in cfg.estimators:
            records.append(record(PERFECT_CSI, None, _first_best(true_cost)))
        for beta in cfg.beta_list:
            if not trained:
                break
            p = PowerConfig.from_snr_db(snr, beta)
            with np.errstate(divide="ignore"):
                samples = 10.0 * np.log10(baseline_sinr_batch(pairs.h, pairs.r, p))
            median_sinr = float(np.median(samples))
            for est in trained:
                scores = score_pairs(est, pairs, p, draws, cfg.pilot_mode)
                records.append(record(est, beta, _first_best(scores), median_sinr, samples,
                                      probe_symbols))
    return records


def run_scenario(cfg: ScenarioConfig, threads: int = 1) -> List[TrialRecord]:
    """Run all trials; the output is identical for any ``threads`` value."""
    cfg.validate()
    bs_cb, ue_cb = cfg.codebooks()
    if threads == 1:
        per_trial = [run_trial(cfg, t, bs_cb, ue_cb) for t in range(cfg.n_trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            per_trial = list(pool.map(lambda t: run_trial(cfg, t, bs_cb, ue_cb), range(cfg.n_trials)))
    return [rec for recs in per_trial for rec in recs]


@dataclass(frozen=True)
class RateCurvePoint:
    estimator: str
    beta: Optional[float]
    snr_db: float
    mean_rate_bits: float
    ci_half_width: float
    n: int

    @property
    def label(self):
        return self.estimator if self.beta is None else f"{self.estimator}[beta={self.beta:g}]"


def mean_ci(values: Sequence[float], z: float = 1.96):
    """Mean and normal-approximation half-width; a single sample has width 0."""
    x = np.asarray(values, dtype=float)
    m = float(np.mean(x))
    if len(x) < 2:
        return m, 0.0
    return m, float(z * np.std(x, ddof=1) / math.sqrt(len(x)))


def _estimator_rank(name):
    return ALL_ESTIMATORS.index(name) if name in ALL_ESTIMATORS else len(ALL_ESTIMATORS)


def aggregate_rate_curve(records: Sequence[TrialRecord]) -> List[RateCurvePoint]:
    groups = defaultdict(list)
    for rec in sorted(records, key=lambda r: r.trial_id):
        groups[(rec.estimator, rec.beta, rec.snr_db)].append(rec.achieved_rate_bits)
    out = []
    for (est, beta, snr), rates in groups.items():
        m, hw = mean_ci(rates)
        out.append(RateCurvePoint(est, beta, snr, m, hw, len(rates)))
    out.sort(key=lambda c: (_estimator_rank(c.estimator), c.estimator,
                            -math.inf if c.beta is None else c.beta, c.snr_db))
    return out


def sinr_samples(records: Sequence[TrialRecord], beta: float, snr_db: float = 10.0) -> np.ndarray:
    """All training-SINR samples (dB) for ``beta`` at ``snr_db``, one set per trial."""
    seen = {}
    for rec in records:
        if (rec.sinr_samples_db is not None and rec.beta == beta and rec.snr_db == snr_db
                and rec.trial_id not in seen):
            seen[rec.trial_id] = rec.sinr_samples_db
    if not seen:
        return np.zeros(0)
    return np.concatenate([seen[t] for t in sorted(seen)])


def empirical_cdf(samples) -> Tuple[np.ndarray, np.ndarray]:
    x = np.sort(np.asarray(samples, dtype=float))
    return x, np.arange(1, len(x) + 1) / len(x)


def aggregate_sinr_cdf(records: Sequence[TrialRecord], beta: float, snr_db: float = 10.0):
    """Empirical CDF ``(sorted sinr_db, cumulative fraction)`` of the training SINR."""
    samples = sinr_samples(records, beta, snr_db)
    if samples.size == 0:
        raise ValueError(f"no SINR samples for beta={beta} at {snr_db} dB")
    return empirical_cdf(samples)
