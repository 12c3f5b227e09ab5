"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The Monte-Carlo criteria (8-10) share two desk-scale runs per mode, built
once per module. Each criterion's runtime includes the share of any run it
triggered first.
"""

import itertools
import time

import numpy as np
import pytest

from mmbeam import training
from mmbeam.array_channel import ArrayGeometry, ClusterChannelParams, generate_channel
from mmbeam.cli import cmd_run
from mmbeam.codebook import build_codebook
from mmbeam.link import EffectiveChannel2x2, PowerConfig, g_terms_exact, sum_rate_cost_batch
from mmbeam.scenario import ScenarioConfig, aggregate_rate_curve, run_scenario, sinr_samples
from mmbeam.search import (PERFECT_CSI, SINGLE_NODE, TWO_NODE, expected_pair_count,
                           search_secondary, select_baseline)

from conftest import crandn, unit_columns

MODES = (SINGLE_NODE, TWO_NODE)


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] C{criterion}: {detail}")
        assert ok, f"criterion {criterion}: {detail}"
    return emit


def random_instances(rng, n):
    h = crandn(rng, n, 2, 2)
    W = crandn(rng, n, 8, 2)
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    r = np.conj(np.swapaxes(W, -1, -2)) @ W
    rho = 10 ** rng.uniform(-1, 2, size=n)
    return h, r, rho


def test_c01_dual_form_identity(report):
    t0 = time.perf_counter()
    h, r, rho = random_instances(np.random.default_rng(1), 10_000)
    first = sum_rate_cost_batch(h, r, rho)
    hh = np.conj(np.swapaxes(h, -1, -2)) @ h
    second = (np.linalg.det(rho[:, None, None] * np.linalg.inv(r))
              * np.linalg.det(hh + r / rho[:, None, None])).real
    err = float(np.max(np.abs(first - second) / np.abs(second)))
    dt = time.perf_counter() - t0
    report(1, err < 1e-10 and dt < 5, f"dual-form max rel err {err:.2e} on 1e4 instances, {dt:.2f} s")


def test_c02_determinant_decomposition(report):
    t0 = time.perf_counter()
    h, r, rho = random_instances(np.random.default_rng(2), 10_000)
    worst = 0.0
    for i in range(len(h)):
        g = g_terms_exact(EffectiveChannel2x2(h[i], r[i]), PowerConfig(2 * rho[i], 1.0))
        det = np.linalg.det(h[i].conj().T @ h[i] + r[i] / rho[i]).real
        worst = max(worst, abs(g.g1 + g.g2_exact - det) / abs(det))
    dt = time.perf_counter() - t0
    report(2, worst < 1e-10 and dt < 5, f"G1+G2 vs det max rel err {worst:.2e}, {dt:.2f} s")


def test_c03_noiseless_ls_exact(report):
    t0 = time.perf_counter()
    p = PowerConfig.from_snr_db(10.0)
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        W = unit_columns(rng, 8)
        eff = EffectiveChannel2x2(crandn(rng, 2, 2), W.conj().T @ W)
        for P in (1, 10):
            obs = training.observe(eff, training.synth_frame(P, p, training.CONJUGATE_DATA, rng), p,
                                   noiseless=True)
            err = np.linalg.norm(training.estimate_ls(obs) - eff.h) / np.linalg.norm(eff.h)
            worst = max(worst, err)
    dt = time.perf_counter() - t0
    report(3, worst < 1e-10 and dt < 5, f"LS max rel err {worst:.2e} over 100 seeds x P in (1, 10), {dt:.2f} s")


def test_c04_estimator_consistency(report):
    t0 = time.perf_counter()
    p = PowerConfig.from_snr_db(10.0)    # nominal rho for the scores; observations are noiseless
    lengths = (10, 100, 1000)
    med = {"phbf3": [], "phbf2": []}
    for P in lengths:
        e3, e2 = [], []
        for seed in range(100):
            rng = np.random.default_rng(seed)
            W = unit_columns(rng, 8)
            eff = EffectiveChannel2x2(crandn(rng, 2, 2), W.conj().T @ W)
            frame = training.synth_frame(P, p, training.CONJUGATE_DATA, rng)
            obs = training.observe(eff, frame, p, noiseless=True)
            h, true_pw = eff.h, training.true_power_terms(eff.h)
            exact3 = training.phbf3_score(true_pw, eff.r, p.rho)
            exact2 = training.phbf2_score(true_pw, h[0, 0] * h[1, 1], h[0, 1] * h[1, 0], eff.r, p.rho)
            e3.append(abs(training.cost_phbf3(obs, p, eff.r) - exact3) / exact3)
            e2.append(abs(training.cost_phbf2(obs, p, eff.r) - exact2) / exact2)
        med["phbf3"].append(float(np.median(e3)))
        med["phbf2"].append(float(np.median(e2)))
    dt = time.perf_counter() - t0
    ok = all(m[0] > m[1] > m[2] for m in med.values()) and dt < 120
    detail = ", ".join(f"{k} medians " + "/".join(f"{v:.2e}" for v in m) for k, m in med.items())
    report(4, ok, f"{detail} for P={lengths}, {dt:.1f} s")


def test_c05_amplitude_bound(report):
    t0 = time.perf_counter()
    h = crandn(np.random.default_rng(5), 100_000, 2, 2)
    exact = np.abs(h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]) ** 2
    approx = training.g1_amplitude(*training.true_power_terms(h))
    violations = int(np.sum(approx > exact + 1e-12))
    dt = time.perf_counter() - t0
    report(5, violations == 0 and dt < 10, f"{violations} violations on 1e5 channels, {dt:.2f} s")


def brute_force_pair(mode, H1, H2, base, bs_cb, ue_cb, rho):
    """Independent loop over admissible pairs with the determinant cost."""
    best_val, best = -np.inf, None
    fb, wb = bs_cb[base.bs_index], ue_cb[base.ue_index]
    H_test = H1 if mode == SINGLE_NODE else H2
    for k1, k2 in itertools.product(range(len(bs_cb)), range(len(ue_cb))):
        if k2 == base.ue_index or (mode == SINGLE_NODE and k1 == base.bs_index):
            continue
        wt, ft = ue_cb[k2], bs_cb[k1]
        h = np.array([[wb @ H1 @ fb, wb @ H_test @ ft], [wt @ H1 @ fb, wt @ H_test @ ft]])
        W = np.column_stack([wb, wt])
        R = W.conj().T @ W
        val = np.linalg.det(np.eye(2) + rho * np.linalg.solve(R, h.conj().T @ h)).real
        if val > best_val:
            best_val, best = val, (k1, k2)
    return best


def test_c06_search_oracle(report):
    t0 = time.perf_counter()
    bs, ue = ArrayGeometry.planar(8, 8), ArrayGeometry.linear(8)
    bs_cb, ue_cb = build_codebook(bs, 4, 4), build_codebook(ue, 4)
    p = PowerConfig.from_snr_db(10.0)
    mismatches = {m: 0 for m in MODES}
    counts = {m: set() for m in MODES}
    for seed in range(100):
        rng = np.random.default_rng(600 + seed)
        H1 = generate_channel(ClusterChannelParams(), bs, ue, rng).matrix
        H2 = generate_channel(ClusterChannelParams(), bs, ue, rng).matrix * 0.5
        base = select_baseline(H1, bs_cb, ue_cb)
        for mode in MODES:
            res = search_secondary(mode, H1, H2, base, bs_cb, ue_cb, PERFECT_CSI, p)
            counts[mode].add(res.n_evaluated)
            if (res.best_pair.bs_index, res.best_pair.ue_index) != \
                    brute_force_pair(mode, H1, H2, base, bs_cb, ue_cb, p.rho):
                mismatches[mode] += 1
    dt = time.perf_counter() - t0
    ok = (not any(mismatches.values()) and counts[SINGLE_NODE] == {45} and counts[TWO_NODE] == {48}
          and dt < 60)
    report(6, ok, f"mismatches {mismatches}, pair counts {counts}, {dt:.1f} s")


def test_c07_pair_counts_at_full_scale(report):
    bs_cb = build_codebook(ArrayGeometry.planar(8, 8), 32, 16)
    ue_cb = build_codebook(ArrayGeometry.linear(8), 16)
    rng = np.random.default_rng(7)
    H1 = generate_channel(ClusterChannelParams(), bs_cb.geometry, ue_cb.geometry, rng).matrix
    H2 = generate_channel(ClusterChannelParams(), bs_cb.geometry, ue_cb.geometry, rng).matrix * 0.5
    base = select_baseline(H1, bs_cb, ue_cb)
    got = {m: search_secondary(m, H1, H2, base, bs_cb, ue_cb, "phbf3", PowerConfig.from_snr_db(10.0),
                               seed=1).n_evaluated for m in MODES}
    formula = {m: expected_pair_count(m, 512, 16) for m in MODES}
    ok = got == formula == {SINGLE_NODE: 7665, TWO_NODE: 7680}
    report(7, ok, f"n_evaluated {got}")


# Monte-Carlo runs shared by criteria 8-10 and 12 -------------------------------------

DESK = dict(codebook_sizes=(8, 8, 8), snr_grid_db=[10.0], beta_list=[1.0, 2.0, 4.0],
            n_trials=200, master_seed=2024)
_RUNS = {}


def desk_run(mode, p_length):
    key = (mode, p_length)
    if key not in _RUNS:
        estimators = None if p_length == 10 else ["phbf3"]
        cfg = ScenarioConfig(mode=mode, p_length=p_length, **DESK)
        if estimators:
            cfg.estimators = estimators
        t0 = time.perf_counter()
        recs = run_scenario(cfg, threads=0)
        _RUNS[key] = (recs, time.perf_counter() - t0)
    return _RUNS[key]


def curve(records):
    return {c.label: c for c in aggregate_rate_curve(records)}


@pytest.mark.parametrize("mode", MODES)
def test_c08_rate_ordering(mode, report):
    recs, dt = desk_run(mode, 10)
    c = curve(recs)
    db, pcsi = c["db"], c["perfect_csi"]
    p1, p2, p3 = c["phbf1[beta=1]"], c["phbf2[beta=1]"], c["phbf3[beta=1]"]
    checks = {
        "DB>=perfect": db.mean_rate_bits >= pcsi.mean_rate_bits,
        "perfect>=phbf1": pcsi.mean_rate_bits >= p1.mean_rate_bits,
        "perfect>=phbf3": pcsi.mean_rate_bits >= p3.mean_rate_bits,
        "phbf1>=phbf2-CI": p1.mean_rate_bits >= p2.mean_rate_bits - p2.ci_half_width,
        "phbf3>=phbf2-CI": p3.mean_rate_bits >= p2.mean_rate_bits - p2.ci_half_width,
        "DB/phbf2 CIs disjoint": db.mean_rate_bits - db.ci_half_width > p2.mean_rate_bits + p2.ci_half_width,
    }
    means = " ".join(f"{k}={v.mean_rate_bits:.3f}±{v.ci_half_width:.3f}"
                     for k, v in (("db", db), ("pcsi", pcsi), ("p1", p1), ("p2", p2), ("p3", p3)))
    failed = [k for k, v in checks.items() if not v]
    report(8, not failed and dt < 600, f"{mode}: {means}; failed {failed or 'none'}; run {dt:.1f} s")


@pytest.mark.parametrize("mode", MODES)
def test_c09_pilot_power_length_tradeoff(mode, report):
    short, dt_a = desk_run(mode, 10)
    long_, dt_b = desk_run(mode, 100)
    cs, cl = curve(short), curve(long_)
    rows, ok = [], True
    for beta in ("1", "2", "4"):
        a, b = cs[f"phbf3[beta={beta}]"], cl[f"phbf3[beta={beta}]"]
        ok &= b.mean_rate_bits > a.mean_rate_bits
        rows.append(f"beta={beta}: P=10 {a.mean_rate_bits:.3f} -> P=100 {b.mean_rate_bits:.3f}")
    dt = dt_a + dt_b
    report(9, ok and dt < 600, f"{mode}: " + "; ".join(rows) + f"; runs {dt:.1f} s")


def degradation_db(records, beta):
    per_trial = {}
    for r in records:
        if r.beta == beta and r.sinr_samples_db is not None and r.trial_id not in per_trial:
            per_trial[r.trial_id] = r.baseline_snr_db - r.sinr_samples_db
    return float(np.median(np.concatenate([per_trial[t] for t in sorted(per_trial)])))


@pytest.mark.parametrize("mode", MODES)
def test_c10_training_sinr(mode, report):
    recs, dt = desk_run(mode, 10)
    s1, s4 = sinr_samples(recs, 1.0, 10.0), sinr_samples(recs, 4.0, 10.0)
    q1, q4 = np.percentile(s1, [10, 50, 90]), np.percentile(s4, [10, 50, 90])
    deg = degradation_db(recs, 4.0)
    checks = {
        "median beta4>=beta1": np.median(s4) >= np.median(s1),
        "beta4 right of beta1 at 10/50/90": bool(np.all(q4 >= q1)),
        "median degradation<1dB at beta4": deg < 1.0,
    }
    failed = [k for k, v in checks.items() if not v]
    detail = (f"{mode}: p10/50/90 beta1 {np.round(q1, 2).tolist()} beta4 {np.round(q4, 2).tolist()}, "
              f"median degradation beta4 {deg:.2f} dB; failed {failed or 'none'}")
    report(10, not failed and dt < 600, detail)


def test_c11_golden_outputs(tmp_path, report):
    t0 = time.perf_counter()
    overrides = ["n_trials=20", "snr_grid_db=[0,10]", "beta_list=[1,4]", "master_seed=99"]
    dirs = {}
    for name, threads in (("a", 1), ("b", 1), ("c", 4)):
        cmd_run("desk.json", tmp_path / name, overrides, threads=threads)
        dirs[name] = tmp_path / name
    files = ("rate_curve.csv", "sinr_cdf.csv", "records.csv")
    same = all((dirs["a"] / f).read_bytes() == (dirs[o] / f).read_bytes() for o in ("b", "c") for f in files)
    dt = time.perf_counter() - t0
    report(11, same and dt < 120, f"byte-identical across runs and threads 1 vs 4: {same}, {dt:.1f} s")


@pytest.mark.parametrize("mode", MODES)
def test_c12_perfect_csi_vs_db(mode, report):
    recs, dt = desk_run(mode, 10)
    c = curve(recs)
    gap = c["db"].mean_rate_bits - c["perfect_csi"].mean_rate_bits
    report(12, gap <= 1.5, f"{mode}: DB - perfect_csi mean gap {gap:.3f} bits/s/Hz (bound 1.5)")
