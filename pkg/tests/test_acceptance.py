"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are printed
even when output capture is on.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from spca_wells.cli import main
from spca_wells.gibbs import few_depth, gibbs_profile
from spca_wells.landscape import few_sandwich_check, phi_curve
from spca_wells.mcmc import ChainConfig, escape_experiment, transition_matrix
from spca_wells.model import beta_bayes, hamiltonian
from spca_wells.recovery import METHODS, diagonal_thresholding, power_iteration, run_method
from spca_wells.rng import Rng
from spca_wells.theory import (ModelParams, first_moment_probability_bound, first_moment_threshold,
                               high_temp_depth_bound, pair_overlap_count, tail_mass_bound)

from conftest import brute_pair_counts, flat_phi, make_instance, se


@pytest.fixture
def report(capsys):
    def emit(criterion: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")
    return emit


def _valid_setting(rng, n_range, k_range):
    """Draw (n, k, k', ell) whose low and adjacent overlap regions are both nonempty."""
    while True:
        n = int(rng.integers(*n_range))
        k, kp = (int(rng.integers(*k_range)) for _ in range(2))
        if k > n or kp >= n:
            continue
        ell = int(rng.integers(1, min(k, kp) // 2 + 1)) if min(k, kp) >= 2 else 0
        if ell >= 1 and kp - (n - k) < ell:
            return n, k, kp, ell


def test_1_sandwich(report):
    rng = np.random.default_rng(101)
    passed = literal = 0
    worst = 0.0
    for i in range(100):
        n, k, kp, ell = _valid_setting(rng, (6, 15), (2, 5))
        inst = make_instance(n, k, float(rng.uniform(0.2, 4.0)), 1000 + i)
        beta = float(rng.uniform(0, 5 * beta_bayes(inst.lam, n, k)))
        res = few_sandwich_check(inst, beta, kp, ell)
        passed += res.passed
        literal += res.literal_passed
        worst = max(worst, abs(res.depth - res.center) / max(res.upper - res.center, 1e-300))
    report("1 sandwich", passed == 100,
           f"{passed}/100 within log C(n,k') + 1e-8, worst |D - center| / slack {worst:.3f}; "
           f"swapped-sign form as written holds on {literal}/100")
    assert passed == 100


def test_2_escape_bound(report):
    reps, beta = 2000, 4.0
    checked, seed, violations, nonvacuous = 0, 0, 0, 0
    while checked < 10:
        inst = make_instance(14, 3, 1.0, seed)
        seed += 1
        cfg = ChainConfig(beta=beta, k_prime=3, ell=1, t_max=1000, replications=reps)
        depth = few_depth(gibbs_profile(inst, beta, 3), 1)
        if depth <= 0.5:
            continue
        table = escape_experiment(inst, cfg, Rng(inst.seed, 2), points=20, depth=depth)
        for t, emp, bound, vacuous in table.rows:
            nonvacuous += not vacuous
            violations += emp > bound + 4 * se(emp, reps)
        checked += 1
    report("2 escape bound", violations == 0,
           f"10 instances with D > 0.5 (seeds < {seed}), {violations} violations, {nonvacuous} non-vacuous points")
    assert violations == 0


def test_3_stationarity(report):
    rng = np.random.default_rng(303)
    worst = 0.0
    for i in range(20):
        n = int(rng.integers(4, 9))
        inst = make_instance(n, int(rng.integers(1, n)), float(rng.uniform(0.2, 4.0)), 300 + i)
        beta = float(rng.uniform(0, 5))
        states, P = transition_matrix(inst, beta, 2)
        logw = np.array([-beta * hamiltonian(inst, v) for v in states])
        mu = np.exp(logw - logw.max())
        mu /= mu.sum()
        worst = max(worst, float(np.abs(mu @ P - mu).sum()))
    report("3 stationarity", worst <= 1e-8, f"max ||mu P - mu||_1 = {worst:.3g} over 20 instances")
    assert worst <= 1e-8


def test_4_enumeration_oracles(report):
    rng = np.random.default_rng(404)
    phi_bad = checked = 0
    while checked < 40:
        n = int(rng.integers(3, 17))
        kp = int(rng.integers(1, n + 1))
        if math.comb(n, kp) > 10**5:
            continue
        inst = make_instance(n, int(rng.integers(1, n + 1)), float(rng.uniform(0, 5)), 400 + checked)
        curve, ref = phi_curve(inst, kp), flat_phi(inst, kp)
        same = set(curve.feasible_ells) == set(ref) and all(
            curve.values[ell] == h and curve.argmins[ell] == v for ell, (h, v) in ref.items())
        phi_bad += not same
        checked += 1
    pair_bad = tuples = 0
    for n in range(1, 11):
        for k in range(1, n + 1):
            for kp in range(1, n + 1):
                brute = brute_pair_counts(n, k, kp)
                p = ModelParams(n, k, kp, 1.0)
                for ell in range(0, min(k, kp) + 1):
                    expect = list(brute.get(ell, [0] * (kp + 1)))
                    pair_bad += [pair_overlap_count(p, ell, m) for m in range(kp + 1)] != expect
                    tuples += 1
    ok = phi_bad == 0 and pair_bad == 0
    report("4 enumeration oracles", ok,
           f"phi mismatches {phi_bad}/40 instances, pair-count mismatches {pair_bad}/{tuples} tuples")
    assert ok


def test_5_first_moment(report):
    draws, alpha = 2000, 4.0
    p = ModelParams(30, 5, 5, 1.0)
    threshold = first_moment_threshold(p, 2, alpha)
    hits = sum(phi_curve(make_instance(30, 5, 1.0, 5000 + s), 5).values[2] <= threshold for s in range(draws))
    freq = hits / draws
    bound = first_moment_probability_bound(alpha)
    limit = bound + 4 * se(freq, draws)
    report("5 first moment", freq <= limit,
           f"empirical {freq:.5f} vs bound {bound:.5f} + 4 SE = {limit:.5f}")
    assert freq <= limit


def test_6_lambda_monotone(report):
    rng = np.random.default_rng(606)
    ok_count = 0
    for i in range(50):
        n, k, kp, ell = _valid_setting(rng, (6, 11), (2, 5))
        inst = make_instance(n, k, 1.0, 600 + i)
        beta = float(rng.uniform(0, 6))
        lam1, lam2 = sorted(rng.uniform(0, 5, size=2))
        d1 = few_depth(gibbs_profile(inst.with_lambda(float(lam1)), beta, kp), ell)
        d2 = few_depth(gibbs_profile(inst.with_lambda(float(lam2)), beta, kp), ell)
        ok_count += d1 >= d2 - 1e-9
    report("6 lambda monotonicity", ok_count == 50, f"{ok_count}/50 pairs")
    assert ok_count == 50


def test_7_tail_bound(report):
    rng = np.random.default_rng(707)
    applicable = violations = 0
    for _ in range(10**4):
        n = int(rng.integers(2, 201))
        k, kp = (int(np.exp(rng.uniform(0, math.log(n)))) for _ in range(2))
        ell = int(rng.integers(0, min(k, kp) + 1))
        delta = float(rng.choice([0.1, 0.25, 0.5]))
        tm = tail_mass_bound(ModelParams(n, k, kp, 1.0, delta=delta), ell)
        if tm.applicable:
            applicable += 1
            violations += not tm.holds
    report("7 tail bound", violations == 0 and applicable > 0,
           f"{violations} violations among {applicable} applicable points of 10000")
    assert violations == 0 and applicable > 0


def test_8_high_temperature(report):
    n, k, ell, lam, seeds = 24, 8, 4, 0.2, 500
    p = ModelParams(n, k, k, lam, beta=0.0)
    hb = high_temp_depth_bound(p, ell)
    wins = sum(few_depth(gibbs_profile(make_instance(n, k, lam, s), 0.0, k), ell) >= hb.value for s in range(seeds))
    frac = wins / seeds
    floor = hb.probability_floor - 4 * se(frac, seeds)
    report("8 high-temperature bound", frac >= floor, f"fraction {frac:.3f} vs floor {floor:.3f}")
    assert frac >= floor


def test_9a_zero_noise_recovery(report):
    bad = []
    for method in METHODS:
        for s in range(20):
            inst = make_instance(16, 4, 2.0, 900 + s, noise_scale=0.0)
            if not run_method(method, inst, Rng(s, 1)).exact:
                bad.append((method, s))
    report("9a zero-noise recovery", not bad, f"{100 * (1 - len(bad) / 100):.0f}% exact over 5 methods x 20 seeds")
    assert not bad


def test_9b_pca_correlation(report):
    n, k, lam = 1000, 31, 4.0
    corr = []
    for s in range(20):
        inst = make_instance(n, k, lam, 910 + s)
        v = power_iteration(inst.y, Rng(s, 1)).vector
        corr.append(float(v[list(inst.x)].sum()) ** 2 / (float(v @ v) * k))
    mean, target = float(np.mean(corr)), 1 - lam**-2
    report("9b PCA correlation", abs(mean - target) <= 0.1, f"mean {mean:.4f} vs {target:.4f} +/- 0.1")
    assert abs(mean - target) <= 0.1


def test_9c_diagonal_thresholding(report):
    n, k, trials = 200, 14, 200
    lam = 3 * k / math.sqrt(n)
    wins = sum(diagonal_thresholding(make_instance(n, k, lam, 920 + s)).exact for s in range(trials))
    rate = wins / trials
    report("9c diagonal thresholding", rate >= 0.9, f"success {rate:.3f} at lambda = 3k/sqrt(n), need >= 0.9")
    assert rate >= 0.9


CLI_RUNS = {
    "gen": ["--n", "12", "--k", "3"],
    "depth": ["--n", "10", "--k", "3", "--beta", "[0, 2]", "--lambda", "[0.5, 1.5]"],
    "hit": ["--n", "10", "--k", "3", "--beta", "2.0", "--replications", "40", "--t-max", "100"],
    "ogp": ["--n", "11", "--k", "4"],
    "curves": ["--n", "300", "--k", "12", "--lambda", "0.7", "--alpha-n", "2.0"],
    "recover": ["--n", "14", "--k", "3", "--replications", "3", "--lambda", "2.0"],
    "sweep": ["--n", "9", "--k", "3", "--lambdas", "[0.5, 1.5]", "--betas", "[0, 1]", "--replications", "5",
              "--t-max", "50"],
}


def test_10_cli_determinism(report, tmp_path):
    differing, compared = [], 0
    for cmd, args in CLI_RUNS.items():
        outs = []
        for run in ("a", "b"):
            out = tmp_path / run / cmd
            assert main([cmd, *args, "--seed", "11", "--out", str(out)]) == 0
            outs.append(out)
        for f in sorted(outs[0].iterdir()):
            if f.suffix in (".csv", ".json"):
                compared += 1
                if f.read_bytes() != (outs[1] / f.name).read_bytes():
                    differing.append(f"{cmd}/{f.name}")
    report("10 CLI determinism", not differing, f"{compared} files compared, differing: {differing or 'none'}")
    assert not differing
