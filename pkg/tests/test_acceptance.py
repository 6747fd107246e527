"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from confactor.checks import random_haar_polynomial, random_lipschitz
from confactor.extremal import grid_increment, lower_bound_check
from confactor.factors import (
    PrimitiveMatrix,
    SignSequence,
    WeightSequence,
    build_QN,
    fourier_coefficients,
    exceptional_set_check,
    parseval_check,
    sbp_residual,
    weighted_partial_sums,
)
from confactor.olevsky import prescribed_demo
from confactor.ons import OrthonormalSystem, gram_matrix, haar, walsh
from confactor.piecewise import PiecewiseLinear
from confactor.search import enumerate_max, exhaustive_max, greedy_ascent, growth_scan

HAAR = OrthonormalSystem("haar")
WALSH = OrthonormalSystem("walsh")
TRIG = OrthonormalSystem("trig")
GRID = [16, 32, 64, 128, 256, 512, 1024]
LOG2 = WeightSequence.logpow(1.0)
ONE = WeightSequence.const(1.0)


def _weights(rng, family):
    if family == "const":
        return WeightSequence.const(float(rng.uniform(0.2, 2.0)))
    if family == "logpow":
        return WeightSequence.logpow(float(rng.uniform(0.1, 2.0)))
    return WeightSequence.power(float(rng.uniform(-1.0, 0.0)))


def haar_block_bound(m: int = 20) -> float:
    """sqrt2 * (1 + sum_{s=1}^{m} s^-2), summed directly."""
    return math.sqrt(2) * (1.0 + sum(1.0 / s**2 for s in range(1, m + 1)))


@pytest.fixture(scope="module")
def scans():
    out = {}
    for name, w in (("logpow", LOG2), ("const", ONE)):
        t = time.perf_counter()
        scan = growth_scan(HAAR, w, GRID, strategy="auto", seed=1)
        out[name] = (w, scan, time.perf_counter() - t)
    return out


@pytest.fixture(scope="module")
def witnesses(scans):
    out = []
    for w, scan, _ in scans.values():
        for res in scan.results:
            out.append((w, res, lower_bound_check(HAAR, w, res.best_signs, res.N)))
    return out


def test_criterion_1_exact_identities(verdict):
    t = time.perf_counter()
    rng = np.random.default_rng(101)
    ortho = max(
        float(np.max(np.abs(gram_matrix([gen(k) for k in range(1, 257)]) - np.eye(256))))
        for gen in (haar, walsh)
    )
    parseval_fail, worst_parseval = 0, 0.0
    for _ in range(500):
        system = (HAAR, WALSH, TRIG)[int(rng.integers(3))]
        N = int(rng.integers(8, 129))
        w = _weights(rng, rng.choice(["const", "logpow", "power"]))
        r = parseval_check(system, w, SignSequence.random(N, rng), N)
        worst_parseval = max(worst_parseval, r / N)
        parseval_fail += r > 1e-10 * N
    sbp_fail, worst_sbp = 0, 0.0
    for _ in range(500):
        f = random_lipschitz(rng, pieces=int(rng.integers(2, 9)))
        F = random_haar_polynomial(rng, int(rng.integers(1, 33)))
        r = sbp_residual(f, F, int(rng.integers(2, 33)))
        worst_sbp = max(worst_sbp, r)
        sbp_fail += r > 1e-11
    elapsed = time.perf_counter() - t
    ok = ortho <= 1e-13 and parseval_fail == 0 and sbp_fail == 0 and elapsed < 30
    verdict(1, "orthonormality, Parseval and summation by parts", ok,
            f"gram {ortho:.2g}, parseval/N {worst_parseval:.2g}, sbp {worst_sbp:.2g}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_exceptional_set(verdict):
    t = time.perf_counter()
    rng = np.random.default_rng(202)
    violations, worst = 0, -math.inf
    for j in range(1000):
        system = (HAAR, WALSH)[j % 2]
        family = ("const", "logpow", "power")[(j // 2) % 3]
        N = int(rng.integers(8, 129))
        Q = build_QN(system, _weights(rng, family), SignSequence.random(N, rng), N)
        res = exceptional_set_check(Q, N)
        worst = max(worst, res.lhs - res.rhs)
        violations += not res.holds
    elapsed = time.perf_counter() - t
    ok = violations == 0 and elapsed < 60
    verdict(2, "exceptional-set inequality on 1000 instances", ok,
            f"{violations} violations, max lhs-rhs {worst:.3g}, {elapsed:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_3_bounded_for_log_squared_weights(verdict, scans):
    _, scan, elapsed = scans["logpow"]
    bound = haar_block_bound()
    assert bound == pytest.approx(3.6715, abs=1e-4)
    ok = max(scan.values) <= bound and scan.fit.model == "constant" and elapsed < 180
    verdict(3, "Haar, d_k = 1/log^2(k+1): best D_N bounded", ok,
            f"max {max(scan.values):.4f} <= {bound:.4f}, fit {scan.fit.model}, {elapsed:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_4_divergence_for_constant_weights(verdict, scans):
    _, scan, elapsed = scans["const"]
    increasing = all(b > a for a, b in zip(scan.values, scan.values[1:]))
    ok = increasing and scan.fit.model == "log" and scan.fit.r_squared >= 0.9 and elapsed < 180
    verdict(4, "Haar, d_k = 1: best D_N grows like log N", ok,
            f"increasing {increasing}, fit {scan.fit.model} R^2 {scan.fit.r_squared:.4f}, {elapsed:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_5_lower_bound(verdict, witnesses):
    violations = 0
    for w, res, wit in witnesses:
        N = res.N
        deficit = 3.0 / N * math.sqrt(sum(k * w(k) ** 2 for k in range(1, N + 1)))
        violations += abs(wit.functional_value) < wit.D_N - deficit - 1e-10
        violations += not wit.holds
    ok = violations == 0
    verdict(5, "extremal functional lower bound on every scanned instance", ok,
            f"{len(witnesses)} instances, {violations} violations")
    assert ok


@pytest.mark.slow
def test_criterion_6_extremal_regularity(verdict, witnesses):
    bad = []
    for _, res, wit in witnesses:
        f, N = wit.f_N, res.N
        slopes = set(np.asarray(f.representation.slopes).tolist())
        if not slopes <= {-1.0, 0.0, 1.0} or grid_increment(f, N) > 1.0 / N or f.lip1_norm > 2.0:
            bad.append(N)
    ok = not bad
    verdict(6, "extremal slopes, grid increments and Lip1 norm", ok,
            f"{len(witnesses)} witnesses, failing N {bad}")
    assert ok


def test_criterion_7_vertex_optimality_and_greedy(verdict):
    rng = np.random.default_rng(707)
    mismatches = 0
    for _ in range(20):
        table = rng.uniform(0.05, 2.0, 10)
        w = WeightSequence.custom(table)
        for N in range(2, 11):
            B = PrimitiveMatrix(HAAR, w, N)
            three, _, _ = enumerate_max(B, levels=(-1, 0, 1))
            two, _, _ = enumerate_max(B, levels=(-1, 1))
            mismatches += three != two
    hits = 0
    for trial in range(100):
        r = np.random.default_rng(trial)
        N = int(r.integers(4, 13))
        w = WeightSequence.custom(r.uniform(0.05, 2.0, N))
        ex = exhaustive_max(HAAR, w, N)
        g = greedy_ascent(HAAR, w, N, seed=trial, restarts=32)
        hits += g.best_value >= ex.best_value - 1e-12 * max(1.0, ex.best_value)
    ok = mismatches == 0 and hits >= 95
    verdict(7, "vertex optimality and greedy search quality", ok,
            f"{mismatches} three-level mismatches, greedy hit {hits}/100")
    assert ok


def test_criterion_8_prescribed_coefficients(verdict):
    t = time.perf_counter()
    rep = prescribed_demo(256, gamma=1 / 3, exponent=4 / 3)
    H = np.cumsum(1.0 / np.arange(1, 257))
    deviation = float(np.max(np.abs(rep.partial_sums - rep.b * H)))
    S = rep.partial_sums
    increments = [float(S[2 * m - 1] - S[m - 1]) / rep.b for m in (16, 32, 64, 128)]
    elapsed = time.perf_counter() - t
    ok = (rep.coefficient_fidelity <= 1e-10 and deviation <= 1e-8
          and min(increments) >= 0.6 and elapsed < 30)
    verdict(8, "prescribed-coefficient system, S_m = b H_m", ok,
            f"fidelity {rep.coefficient_fidelity:.2g}, deviation {deviation:.2g}, "
            f"min doubling increment {min(increments):.3f} b, {elapsed:.1f}s")
    assert ok


def test_criterion_9_partial_sums_stabilize(verdict):
    # closed-form oracle first: Haar coefficients of f(x) = x
    c = fourier_coefficients(PiecewiseLinear.identity(), HAAR, 1024).c
    s = np.array([(k - 1).bit_length() - 1 for k in range(2, 1025)])
    oracle = -(2.0 ** (-1.5 * s)) / 4
    assert np.max(np.abs(c[1:] - oracle)) <= 1e-15

    rng = np.random.default_rng(909)
    fs = [PiecewiseLinear.identity()] + [random_lipschitz(rng) for _ in range(10)]
    ratios = []
    for f in fs:
        S = weighted_partial_sums(f, HAAR, LOG2, 1024)
        ratios.append(float((S[1023] - S[511]) / S[1023]))
    ok = max(ratios) <= 0.01
    verdict(9, "S_1024 - S_512 <= 0.01 S_1024 for Lip1 functions", ok,
            f"f=x ratio {ratios[0]:.4f}, worst ratio {max(ratios):.4f}")
    assert ok
