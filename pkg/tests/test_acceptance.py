"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line so the acceptance status is readable
from the test log, then asserts.  Tolerances are fixed; seeds are frozen.
"""

import math

import numpy as np
import pytest

from asyncofdm import analytics, simulation, timing as tm
from asyncofdm.cli import main as cli_main
from asyncofdm.link import (
    analytic_power_profile,
    closed_form_outputs,
    demodulate_window,
    empirical_power_profile,
    gaussian_stream,
    receive_window,
)
from asyncofdm.simulation import SimSpec
from asyncofdm.sinr import NetworkParams, hypothesis_set
from tests.conftest import budget_params


def _report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"\nacceptance {num:02d} [{name}]: {status} {detail}".rstrip())
    assert ok, f"criterion {num} ({name}) failed: {detail}"


def _w(cfg):
    return cfg.domain_half_width


def test_criterion_01_link_abstraction_validity(cfg):
    # Total received power stays within 2% of 1 on interior used subcarriers.
    # The 2% budget applies to the expected totals; the 10^4-trial empirical
    # estimate gets an explicit 5-standard-error statistical allowance on top
    # (its per-subcarrier noise floor alone is ~0.9% at the worst offset).
    interior = np.abs(cfg.used_array()) <= 290
    worst_analytic = 0.0
    ok = True
    for d in (-300, -6, 50, 78, 200):
        ana = analytic_power_profile(cfg, d)
        dev = float(np.max(np.abs(ana.total[interior] - 1.0)))
        worst_analytic = max(worst_analytic, dev)
        ok &= dev <= 0.02
        emp = empirical_power_profile(cfg, d, trials=10_000, seed=5)
        slack = 0.02 + 5.0 * emp.stderr_total[interior]
        ok &= bool(np.all(np.abs(emp.total[interior] - 1.0) <= slack))
    _report(1, "link abstraction validity", ok,
            f"worst interior |total-1| = {worst_analytic:.4f} (expected), "
            "empirical within 2% + 5 stderr at 10^4 trials")


def test_criterion_02_late_window_sir(cfg):
    sir_db = analytic_power_profile(cfg, 78).sir_db(0)
    ok = abs(sir_db - 19.3) <= 0.2 and sir_db < 20.0
    _report(2, "central-subcarrier SIR at offset 78", ok, f"SIR = {sir_db:.2f} dB")


def test_criterion_03_closed_form_equivalence(cfg):
    rng = np.random.default_rng(2024)
    used = cfg.used_array() % cfg.n
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(-(cfg.n + cfg.n_cp), 0))
        stream = gaussian_stream(cfg, (-1, 0, 1), rng)
        direct = demodulate_window(receive_window(cfg, stream, d, 0))[used]
        closed = closed_form_outputs(cfg, stream, d, 0)[used]
        worst = max(worst, float(np.max(np.abs(direct - closed))
                                 / np.max(np.abs(direct))))
    ok = worst <= 1e-9
    _report(3, "closed-form vs splice-then-DFT", ok, f"worst rel err = {worst:.2e}")


def test_criterion_04_synchronized_nearest_reduction(cfg):
    exact = 1.0 / (1.0 + math.pi / 4)
    params = NetworkParams(1 / 400 ** 2, 4.0, math.inf, 1.0)
    timing = tm.delta(0.0, _w(cfg))
    quad = analytics.nearest_decoding_prob(params, timing, cfg)
    est = simulation.estimate_nearest_prob(params, timing, cfg,
                                           SimSpec(10_000, 7), workers=4)
    ok = abs(quad - exact) <= 1e-4 and abs(est.mean - exact) <= est.ci_half_width
    _report(4, "synchronized nearest-transmitter probability", ok,
            f"quad = {quad:.6f}, mc = {est.mean:.4f} +/- {est.ci_half_width:.4f}, "
            f"target = {exact:.6f}")


def test_criterion_05_mean_count_upper_bound(cfg):
    timing = tm.truncated_gaussian(0.2 * 1024, _w(cfg))
    sync = tm.delta(0.0, _w(cfg))
    ok = True
    for alpha in (2.5, 3.0, 3.5, 4.0, 4.5):
        for t_db in (-12.0, -6.0, 0.0, 6.0, 12.0):
            params = NetworkParams(1e-4, alpha, math.inf, 10.0 ** (t_db / 10.0))
            bound = analytics.mean_decodable_upper_bound(alpha, params.threshold)
            async_val = analytics.mean_decodable(params, timing, cfg)
            sync_val = analytics.mean_decodable(params, sync, cfg)
            ok &= async_val <= bound + 1e-9
            ok &= abs(sync_val - bound) <= 1e-6 * bound
    sparse_bound = analytics.mean_decodable_upper_bound(3.8, 10.0 ** -0.9)
    ok &= abs(sparse_bound - 1.79) <= 0.01 and sparse_bound < 2.0
    _report(5, "interference-limited upper bound", ok,
            f"bound(3.8, -9 dB) = {sparse_bound:.3f} < 2; "
            "5x5 grid dominance and synchronized equality hold")


def test_criterion_06_mean_count_losses(cfg):
    params = budget_params(1 / 20 ** 2, 3.8, -4.0)
    models = {0.0: tm.delta(0.0, _w(cfg)),
              0.2: tm.truncated_gaussian(0.2 * 1024, _w(cfg)),
              0.4: tm.truncated_gaussian(0.4 * 1024, _w(cfg))}
    analytic = {s: analytics.mean_decodable(params, m, cfg) for s, m in models.items()}
    loss2 = 1.0 - analytic[0.2] / analytic[0.0]
    loss4 = 1.0 - analytic[0.4] / analytic[0.0]
    ok = abs(loss2 - 0.21) <= 0.03 and abs(loss4 - 0.44) <= 0.03
    for s, m in models.items():
        est = simulation.estimate_mean_decodable(params, m, cfg,
                                                 SimSpec(2000, 4), workers=4)
        ok &= abs(est.mean - analytic[s]) <= est.ci_half_width
    _report(6, "asynchronous mean-count losses", ok,
            f"losses = {100 * loss2:.1f}% / {100 * loss4:.1f}% "
            "(targets 21% / 44%), MC CIs cover analytic values")


def test_criterion_07_count_distribution_dominance(cfg):
    timing = tm.truncated_gaussian(0.2 * 1024, _w(cfg))
    ok = True
    for side in (400.0, 800.0):
        params = budget_params(1.0 / side ** 2, 3.8, -12.0)
        bound = analytics.upsilon_upper_distribution(params, timing, cfg)
        emp = simulation.estimate_distribution(params, timing, cfg,
                                               SimSpec(4000, 9), workers=4)
        ok &= int(emp.counts[-1]) <= bound.support_max
        bc, ec, es = bound.ccdf(), emp.ccdf(), emp.ccdf_stderr()
        for n in range(len(ec)):
            ok &= bc[n] >= ec[n] - 3.0 * es[n]
    worst = 0.0
    for side in (400.0, 800.0):
        for t_db in (-12.0, -6.0, 0.0):
            for model in (tm.delta(0.0, _w(cfg)), timing,
                          tm.truncated_gaussian(0.4 * 1024, _w(cfg))):
                params = budget_params(1.0 / side ** 2, 4.0, t_db)
                quad = analytics.lambda_tilde(params, model, cfg)
                closed = analytics.lambda_tilde_closed_form_alpha4(params, model, cfg)
                worst = max(worst, abs(quad - closed) / closed)
    ok &= worst <= 1e-5
    _report(7, "truncated-Poisson dominance", ok,
            f"dominance at both densities; closed-form mismatch = {worst:.1e}")


def test_criterion_08_nearest_threshold_shifts(cfg):
    grid = np.arange(-15.0, 10.01, 0.5)

    def crossing(model):
        vals = np.array([analytics.nearest_decoding_prob(
            budget_params(1 / 20 ** 2, 3.8, t), model, cfg) for t in grid])
        i = int(np.where(vals < 0.5)[0][0])
        x0, x1, y0, y1 = grid[i - 1], grid[i], vals[i - 1], vals[i]
        return x0 + (0.5 - y0) * (x1 - x0) / (y1 - y0)

    sync = crossing(tm.delta(0.0, _w(cfg)))
    shift2 = sync - crossing(tm.truncated_gaussian(0.2 * 1024, _w(cfg)))
    shift4 = sync - crossing(tm.truncated_gaussian(0.4 * 1024, _w(cfg)))
    ok = abs(shift2 - 3.0) <= 1.0 and abs(shift4 - 6.0) <= 1.0
    _report(8, "nearest-probability threshold shifts", ok,
            f"shifts = {shift2:.2f} dB / {shift4:.2f} dB (targets 3 / 6)")


def test_criterion_09_optimal_thresholds(cfg):
    grid = list(np.arange(-15.0, 10.01, 0.5))
    targets = {0.0: 5.0, 0.2: -1.0, 0.4: -3.0}
    best = {}
    ok = True
    for side in (20.0, 400.0):
        for sigma, target in targets.items():
            model = (tm.delta(0.0, _w(cfg)) if sigma == 0.0
                     else tm.truncated_gaussian(sigma * 1024, _w(cfg)))
            b, _, _ = analytics.optimize_threshold(
                budget_params(1.0 / side ** 2, 3.8, -12.0), model, cfg, grid)
            best[(side, sigma)] = b
            ok &= abs(b - target) <= 1.0
    for sigma in targets:
        ok &= abs(best[(20.0, sigma)] - best[(400.0, sigma)]) <= 0.5  # one grid step
    _report(9, "throughput-optimal thresholds", ok,
            "argmax (dB) at 1/20^2: "
            + ", ".join(f"sigma={s}: {best[(20.0, s)]:g}" for s in targets)
            + "; density shift <= 1 step")


def test_criterion_10_timing_hypotheses_recovery(cfg):
    timing = tm.truncated_gaussian(0.2 * 1024, _w(cfg))
    sync = tm.delta(0.0, _w(cfg))
    spacing = 150.0  # spacing chosen so 3 hypotheses clear the recovery target
    params = budget_params(1 / 400 ** 2, 3.8, -12.0)
    counts = [analytics.mean_decodable_with_hypotheses(
        params, timing, cfg, hypothesis_set(k, k, spacing)) for k in (0, 1, 2)]
    ok = counts[0] <= counts[1] <= counts[2]
    fracs = []
    for t_db in (-12.0, -8.0, -4.0, 0.0, 4.0):
        p = budget_params(1 / 400 ** 2, 3.8, t_db)
        base = analytics.mean_decodable(p, timing, cfg)
        multi = analytics.mean_decodable_with_hypotheses(
            p, timing, cfg, hypothesis_set(1, 1, spacing))
        ideal = analytics.mean_decodable(p, sync, cfg)
        fracs.append((multi - base) / (ideal - base))
    ok &= all(f >= 0.60 for f in fracs)
    _report(10, "multi-hypothesis loss recovery", ok,
            f"recovered fraction over sweep: {min(fracs):.2f}..{max(fracs):.2f} "
            "(>= 0.60 with 3 hypotheses); monotone in hypothesis count")


def test_criterion_11_parallel_determinism(tmp_path):
    outputs = []
    for workers in (1, 2, 8):
        out = str(tmp_path / f"sim_{workers}.csv")
        code = cli_main(["simulate", "--trials", "300", "--seed", "17",
                         "--workers", str(workers), "--out", out])
        assert code == 0
        outputs.append(open(out, "rb").read())
    ok = outputs[0] == outputs[1] == outputs[2] and len(outputs[0]) > 0
    _report(11, "worker-count determinism", ok,
            "byte-identical per-trial CSV for 1/2/8 workers")
