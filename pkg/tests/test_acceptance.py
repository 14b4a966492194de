"""Acceptance criteria C1 to C10, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line (printed, and repeated in the
terminal summary) before asserting.
"""

import filecmp
import math
import time
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from netsep.channels import AwgnSpec, bec, bsc
from netsep.codecs import build_channel_code, estimate_max_error
from netsep.coding_theorems import DistortionMeasure, ba_capacity, ba_rate_distortion, f_epsilon
from netsep.experiments import (
    SeparationPlan,
    dsbs,
    fig2_noisy,
    plan_lossless_patch,
    point_to_point,
    rd_pipe_scheme,
    repetition_codes,
    run_awgn_sweep,
    run_emulation_probe,
    run_lossless_patch,
    run_separated,
    slepian_wolf_scheme,
    two_sources_one_sink,
    uncoded_codes,
)
from netsep.experiments.cli import main
from netsep.netsim import BitPipe, fold_unraveled, run_network, runs_identical, stack, unravel
from netsep.rng import RngStream

from .conftest import h2

MANIFESTS = Path(__file__).resolve().parents[1] / "manifests"


def _entropy(p):
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def test_c1_capacity_oracles(acceptance):
    t = time.perf_counter()
    errs = [abs(ba_capacity(bsc(p)).capacity - (1 - h2(p))) for p in (0.01, 0.05, 0.1, 0.25, 0.5)]
    errs += [abs(ba_capacity(bec(r)).capacity - (1 - r)) for r in (0.1, 0.5)]
    worst = max(errs)
    ok = acceptance(1, worst <= 1e-5, time.perf_counter() - t, 1.0, f"max |C - oracle| = {worst:.1e}")
    assert ok


def test_c2_rate_distortion_oracles(acceptance):
    t = time.perf_counter()
    src = np.array([0.5, 0.5])
    ham = DistortionMeasure.hamming(2)
    grid = np.round(np.arange(0.02, 0.4001, 0.02), 2)
    curve_err = max(abs(ba_rate_distortion(src, ham, float(d)).rate - (1 - h2(float(d)))) for d in grid)
    g = np.random.default_rng(20261016)
    zero_err = 0.0
    for size in (2, 3, 4):
        p = g.dirichlet(np.ones(size))
        table = g.uniform(0.2, 2.0, (size, size))
        np.fill_diagonal(table, 0.0)
        r0 = ba_rate_distortion(p, DistortionMeasure(table, faithful=True), 0.0).rate
        zero_err = max(zero_err, abs(r0 - _entropy(p)))
    ok = acceptance(2, curve_err <= 1e-4 and zero_err <= 1e-6, time.perf_counter() - t, 10.0,
                    f"R(D) error {curve_err:.1e}, R(0) error {zero_err:.1e}")
    assert ok


def test_c3_emulation_convergence(acceptance):
    t = time.perf_counter()
    info = 1 - h2(0.1)
    rows = run_emulation_probe(bsc(0.1), np.array([0.5, 0.5]), [info + 0.15, info - 0.2], [256, 4096], 100,
                               RngStream(2026, ("acceptance", "emulation")), epsilon=0.1)
    med = {(r["margin"] > 0, r["N"]): r["median_tv"] for r in rows}
    above_small, above_big, below_big = med[(True, 256)], med[(True, 4096)], med[(False, 4096)]
    ok = above_big < 0.05 and above_big < above_small and below_big >= 0.05
    ok = acceptance(3, ok, time.perf_counter() - t, 300.0,
                    f"median TV at I+0.15: N=256 {above_small:.4f}, N=4096 {above_big:.4f}; "
                    f"at I-0.2, N=4096 {below_big:.4f}")
    assert ok


def test_c4_channel_code_trend(acceptance):
    t = time.perf_counter()
    ch = bsc(0.05)
    medians = []
    for n in (8, 16, 24):
        errs = [estimate_max_error(build_channel_code(ch, 1 / 3, n, seed), ch, 2000,
                                   RngStream(seed, ("acceptance", "code", n))).mean_error for seed in range(10)]
        medians.append(float(np.median(errs)))
    fast = build_channel_code(ch, 0.9, 24, 0)
    over = estimate_max_error(fast, ch, 200, RngStream(0, ("acceptance", "above-capacity"))).mean_error
    ok = all(a >= b for a, b in zip(medians, medians[1:])) and over >= 0.5
    ok = acceptance(4, ok, time.perf_counter() - t, 120.0,
                    "R=1/3 medians " + ", ".join(f"{m:.4f}" for m in medians) + f"; R=0.9 N=24 error {over:.3f}")
    assert ok


def test_c5_stack_unravel_exactness(acceptance):
    t = time.perf_counter()
    net = fig2_noisy(0.1, 0.1)
    layers, n, L = 8, 2, 1
    codes = repetition_codes(net, L)
    rng = RngStream(5, ("acceptance", "stack"))
    stacked = stack(net, layers).run(codes, n=n, L=L, rng=rng, trials=200)
    plan = unravel(codes, layers, n, L)
    flat = run_network(net, plan.codes, n=plan.n, L=plan.L, rng=rng, trials=200)
    same = runs_identical(stacked, fold_unraveled(flat, layers))
    same_matrix = stacked.distortion_matrix().entries == flat.distortion_matrix().entries
    ok = acceptance(5, same and same_matrix, time.perf_counter() - t, None,
                    f"transcripts identical: {same}, distortion matrix identical: {same_matrix}")
    assert ok


def test_c6_point_to_point_against_opta(acceptance):
    t = time.perf_counter()
    # oracle: the crossover with 1 - h(p) = 1/2, and D* with 1 - h(D*) = 1/2
    p = brentq(lambda x: 1 - h2(x) - 0.5, 1e-6, 0.5 - 1e-9, xtol=1e-14)
    d_star = brentq(lambda x: 1 - h2(x) - 0.5, 1e-6, 0.5 - 1e-9, xtol=1e-14)
    src = np.array([0.5, 0.5])
    net = point_to_point(bsc(p), src)
    layers = 24
    budget = math.floor(layers * (1 - h2(p)) + 1e-9)
    scheme = rd_pipe_scheme(src, DistortionMeasure.hamming(2), budget, layers, 6)
    plan = SeparationPlan(layers=layers, n=1, L=1, rates={"e": 0.15})
    rep = run_separated(net, scheme.codes(), plan, 1000, RngStream(6, ("acceptance", "opta")), mc_trials=500)
    per = rep.realized.per_trial(("s", "d"))
    mean, se = float(per.mean()), float(per.std(ddof=1) / math.sqrt(per.size))
    ok = d_star - 3 * se <= mean <= d_star + 0.1
    ok = acceptance(6, ok, time.perf_counter() - t, 600.0,
                    f"distortion {mean:.4f} +- {se:.4f}, window [{d_star - 3 * se:.4f}, {d_star + 0.1:.4f}]")
    assert ok


def _sw_block_error(c1: float, c2: float, trials: int, seed: int) -> float:
    joint = dsbs(0.1)
    net = two_sources_one_sink(BitPipe(c1), BitPipe(c2), joint)
    scheme = slepian_wolf_scheme(joint, {"1": c1, "2": c2}, 1, 1, 24, seed)
    rep = run_separated(net, scheme.codes(), SeparationPlan(layers=24, n=1, L=1, rates={}), trials,
                        RngStream(seed, ("acceptance", "sw")))
    either = np.zeros(trials, dtype=bool)
    for pair in rep.pairs():
        either |= rep.realized.block_errors(pair)
    return float(either.mean())


def test_c7_slepian_wolf_demands(acceptance):
    t = time.perf_counter()
    h_cond = h2(0.1)  # H(U1|U2) = H(U2|U1) for DSBS(0.1); H(U1,U2) = 1 + h(0.1)
    inside = _sw_block_error(1.0, 0.8, 1000, 7)
    outside = _sw_block_error(h_cond - 0.1, 1.0, 1000, 7)
    ok = inside <= 0.10 and outside >= 0.30
    ok = acceptance(7, ok, time.perf_counter() - t, 600.0,
                    f"inside (1.0, 0.8): {inside:.3f}; C1 = H(U1|U2) - 0.1: {outside:.3f}")
    assert ok


def test_c8_lossless_patch(acceptance):
    t = time.perf_counter()
    net = two_sources_one_sink(bsc(0.01), bsc(0.01), dsbs(0.1), lossless=False)
    base = uncoded_codes(net)
    plan = plan_lossless_patch(net, base, ("1", "3"), 4, 4, 6, RngStream(8, ("acceptance", "plan")),
                               calibration_trials=4000)
    rep = run_lossless_patch(net, base, plan, 1000, RngStream(8, ("acceptance", "run")))
    low, kp, k = plan.sandwich()
    overhead = plan.extra_sessions / plan.sessions
    ratio = plan.r0 / plan.c0
    # estimation slack: three binomial standard errors of eps pushed through L f(eps)
    se = math.sqrt(plan.epsilon * (1 - plan.epsilon) / (4000 * plan.L))
    bound_hi = plan.L * f_epsilon(plan.epsilon + 3 * se, 1.0, 2)
    ok = (plan.epsilon <= 0.02 and rep.block_error_rate <= 0.10 and 0.5 <= overhead / ratio <= 2.0
          and low <= kp <= k and plan.r0_estimate <= bound_hi)
    ok = acceptance(8, ok, time.perf_counter() - t, 900.0,
                    f"eps {plan.epsilon:.4f}, block error {rep.block_error_rate:.3f}, N'/N {overhead:.3f} vs "
                    f"R0/C0 {ratio:.3f}, {low} <= kappa' {kp} <= {k}, R0 est {plan.r0_estimate:.3f} "
                    f"<= L f(eps) {plan.r0_bound:.3f} (+slack {bound_hi:.3f})")
    assert ok


def test_c9_awgn_sweep(acceptance):
    t = time.perf_counter()
    cells = {(c.j, c.k): c.capacity for c in run_awgn_sweep(AwgnSpec(1.0, 1.0), [(1, 1), (4, 4), (32, 32)])}
    ok = max(cells.values()) <= 0.5 + 1e-6 and cells[(32, 32)] >= 0.45 and cells[(32, 32)] > cells[(1, 1)]
    ok = acceptance(9, ok, time.perf_counter() - t, 300.0,
                    ", ".join(f"C({j},{k}) = {c:.6f}" for (j, k), c in cells.items()))
    assert ok


COMMANDS = {
    "capacity.yaml": "capacity",
    "rd.yaml": "rd",
    "emulate.yaml": "emulate",
    "awgn-sweep.yaml": "awgn-sweep",
    "stack-check.yaml": "stack-check",
    "separate-p2p.yaml": "separate",
    "separate-sw.yaml": "separate",
    "patch.yaml": "patch",
}


def test_c10_determinism(acceptance, tmp_path, capsys):
    t = time.perf_counter()
    assert set(COMMANDS) == {p.name for p in MANIFESTS.glob("*.yaml")}
    mismatched = []
    for name, command in COMMANDS.items():
        for run in ("a", "b"):
            assert main([command, str(MANIFESTS / name), "-o", str(tmp_path / run)]) == 0
    capsys.readouterr()
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    for rel in files:
        if not filecmp.cmp(tmp_path / "a" / rel, tmp_path / "b" / rel, shallow=False):
            mismatched.append(str(rel))
    count_b = sum(1 for p in (tmp_path / "b").rglob("*") if p.is_file())
    ok = not mismatched and count_b == len(files) and len(files) > 0
    ok = acceptance(10, ok, time.perf_counter() - t, None,
                    f"{len(files)} files across {len(COMMANDS)} manifests, mismatches: {mismatched or 'none'}")
    assert ok
