"""Fast invariant checks used as a release gate (``mmbeam selfcheck``)."""

from __future__ import annotations

import itertools
from typing import List, NamedTuple

import numpy as np

from . import training
from .array_channel import ArrayGeometry, ClusterChannelParams, generate_channel
from .codebook import build_codebook
from .link import EffectiveChannel2x2, PowerConfig, sum_rate_cost, sum_rate_cost_factored
from .search import PERFECT_CSI, SINGLE_NODE, TWO_NODE, search_secondary, select_baseline


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def random_effective(rng, n_ue=8):
    h = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / np.sqrt(2)
    W = rng.normal(size=(n_ue, 2)) + 1j * rng.normal(size=(n_ue, 2))
    W /= np.linalg.norm(W, axis=0)
    return EffectiveChannel2x2(h, W.conj().T @ W)


def check_ls_exact(n=100):
    rng = np.random.default_rng(1)
    worst = 0.0
    for seed in range(n):
        eff = random_effective(rng)
        p = PowerConfig.from_snr_db(10.0, beta=2.0)
        for P in (1, 10):
            frame = training.synth_frame(P, p, training.CONJUGATE_DATA, np.random.default_rng(seed))
            est = training.estimate_ls(training.observe(eff, frame, p, noiseless=True))
            worst = max(worst, np.linalg.norm(est - eff.h) / np.linalg.norm(eff.h))
    return worst < 1e-10, f"max relative error {worst:.2e}"


def check_dual_form(n=2000):
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(n):
        eff = random_effective(rng)
        p = PowerConfig(1.0, 10.0 ** rng.uniform(-2, 1))
        a, b = sum_rate_cost(eff, p), sum_rate_cost_factored(eff, p)
        worst = max(worst, abs(a - b) / abs(a))
    return worst < 1e-10, f"max relative difference {worst:.2e}"


def check_amplitude_bound(n=20000):
    rng = np.random.default_rng(3)
    h = (rng.normal(size=(n, 2, 2)) + 1j * rng.normal(size=(n, 2, 2))) / np.sqrt(2)
    a = np.abs(h) ** 2
    approx = training.g1_amplitude(a[:, 0, 0], a[:, 1, 0], a[:, 0, 1], a[:, 1, 1])
    exact = (a[:, 0, 0] * a[:, 1, 1] + a[:, 0, 1] * a[:, 1, 0]
             - 2 * np.real(h[:, 0, 0] * h[:, 1, 1] * np.conj(h[:, 0, 1] * h[:, 1, 0])))
    violations = int(np.sum(approx > exact + 1e-12))
    return violations == 0, f"{violations} violations in {n} channels"


def brute_force_best(mode, H1, H2, base, bs_cb, ue_cb, rho):
    """Straight loop over admissible pairs evaluating the determinant cost."""
    best, best_pair = -np.inf, None
    wb, fb = ue_cb.entries[base.ue_index], bs_cb.entries[base.bs_index]
    for k1, k2 in itertools.product(range(len(bs_cb)), range(len(ue_cb))):
        if k2 == base.ue_index or (mode == SINGLE_NODE and k1 == base.bs_index):
            continue
        W = np.column_stack([wb, ue_cb.entries[k2]])
        if mode == SINGLE_NODE:
            h = W.T @ H1 @ np.column_stack([fb, bs_cb.entries[k1]])
        else:
            h = W.T @ np.column_stack([H1 @ fb, H2 @ bs_cb.entries[k1]])
        R = W.conj().T @ W
        val = np.linalg.det(np.eye(2) + rho * np.linalg.inv(R) @ h.conj().T @ h).real
        if val > best:
            best, best_pair = val, (k1, k2)
    return best_pair


def check_search_oracle(n=20):
    bs = ArrayGeometry.planar(4, 4)
    ue = ArrayGeometry.linear(4)
    bs_cb, ue_cb = build_codebook(bs, 4, 4), build_codebook(ue, 4)
    p = PowerConfig.from_snr_db(10.0)
    mismatches = 0
    for t in range(n):
        rng = np.random.default_rng(100 + t)
        H1 = generate_channel(ClusterChannelParams(), bs, ue, rng).matrix
        H2 = generate_channel(ClusterChannelParams(), bs, ue, rng).matrix * 0.5
        base = select_baseline(H1, bs_cb, ue_cb)
        for mode in (SINGLE_NODE, TWO_NODE):
            res = search_secondary(mode, H1, H2, base, bs_cb, ue_cb, PERFECT_CSI, p)
            got = (res.best_pair.bs_index, res.best_pair.ue_index)
            if got != brute_force_best(mode, H1, H2, base, bs_cb, ue_cb, p.rho):
                mismatches += 1
    return mismatches == 0, f"{mismatches} mismatches over {2 * n} searches"


CHECKS: List[tuple] = [
    ("noiseless LS exactness", check_ls_exact),
    ("sum-rate dual-form identity", check_dual_form),
    ("amplitude G1 bound", check_amplitude_bound),
    ("tiny-codebook search oracle", check_search_oracle),
]


def run_selfcheck(checks=None) -> List[CheckResult]:
    out = []
    for name, fn in (checks or CHECKS):
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
