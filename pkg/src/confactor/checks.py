"""Randomized suites for the unconditional identities and inequalities."""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .extremal import lower_bound_check
from .factors import build_QN, exceptional_set_check, parseval_check, sbp_residual
from .ons import OrthonormalSystem, gram_matrix, haar, walsh
from .piecewise import PiecewiseConstant, PiecewiseLinear, linear_combination
from .sequences import SignSequence, WeightSequence

__all__ = [
    "SuiteResult",
    "random_weights",
    "random_signs",
    "random_lipschitz",
    "random_haar_polynomial",
    "orthonormality_suite",
    "parseval_suite",
    "sbp_suite",
    "exceptional_set_suite",
    "lower_bound_suite",
    "run_all",
]

PARSEVAL_RTOL = 1e-10
SBP_TOL = 1e-11
ORTHO_TOL = 1e-13


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: int
    worst: float
    tolerance: str
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        return {"name": self.name, "cases": self.cases, "failures": self.failures,
                "worst": self.worst, "tolerance": self.tolerance, "seconds": self.seconds,
                "passed": self.passed}


def random_weights(rng: np.random.Generator) -> WeightSequence:
    family = rng.choice(["const", "logpow", "power"])
    if family == "const":
        return WeightSequence.const(float(rng.uniform(0.2, 2.0)))
    if family == "logpow":
        return WeightSequence.logpow(float(rng.uniform(0.1, 2.0)))
    return WeightSequence.power(float(rng.uniform(-1.0, 0.0)))


def random_signs(rng: np.random.Generator, N: int, allow_zero: bool = True) -> SignSequence:
    return SignSequence.random(N, rng, allow_zero=allow_zero)


def random_lipschitz(rng: np.random.Generator, pieces: int = 6, max_den: int = 97,
                     lip: float = 1.0) -> PiecewiseLinear:
    """Random continuous piecewise-linear f with |slope| <= lip and rational breakpoints."""
    pts = set()
    while len(pts) < pieces - 1:
        den = int(rng.integers(2, max_den + 1))
        pts.add(Fraction(int(rng.integers(1, den)), den))
    bps = [Fraction(0), *sorted(pts), Fraction(1)]
    slopes = rng.uniform(-lip, lip, size=len(bps) - 1)
    nodes = [float(rng.uniform(-0.5, 0.5))]
    for s, a, b in zip(slopes, bps, bps[1:]):
        nodes.append(nodes[-1] + s * float(b - a))
    return PiecewiseLinear(bps, nodes)


def random_haar_polynomial(rng: np.random.Generator, N: int) -> PiecewiseConstant:
    return linear_combination([(float(rng.normal()), haar(k)) for k in range(1, N + 1)])


def _system(rng) -> OrthonormalSystem:
    return OrthonormalSystem(str(rng.choice(["haar", "walsh"])))


def orthonormality_suite(N: int = 256) -> SuiteResult:
    t = time.perf_counter()
    worst = 0.0
    for gen in (haar, walsh):
        G = gram_matrix([gen(k) for k in range(1, N + 1)])
        worst = max(worst, float(np.max(np.abs(G - np.eye(N)))))
    fails = int(worst > ORTHO_TOL)
    return SuiteResult("orthonormality", 2, fails, worst, f"<= {ORTHO_TOL:g}", time.perf_counter() - t)


def parseval_suite(draws: int, rng: np.random.Generator, n_range=(8, 128)) -> SuiteResult:
    t = time.perf_counter()
    fails, worst = 0, 0.0
    for _ in range(draws):
        system = _system(rng)
        N = int(rng.integers(n_range[0], n_range[1] + 1))
        w = random_weights(rng)
        eps = random_signs(rng, N)
        r = parseval_check(system, w, eps, N)
        worst = max(worst, r / N)
        fails += r > PARSEVAL_RTOL * N
    return SuiteResult("parseval", draws, fails, worst, f"<= {PARSEVAL_RTOL:g} * N", time.perf_counter() - t)


def sbp_suite(draws: int, rng: np.random.Generator) -> SuiteResult:
    t = time.perf_counter()
    fails, worst = 0, 0.0
    for _ in range(draws):
        f = random_lipschitz(rng, pieces=int(rng.integers(2, 9)))
        F = random_haar_polynomial(rng, int(rng.integers(1, 33)))
        N = int(rng.choice([2, 3, 5, 8, 13, 16]))
        r = sbp_residual(f, F, N)
        worst = max(worst, r)
        fails += r > SBP_TOL
    return SuiteResult("summation_by_parts", draws, fails, worst, f"<= {SBP_TOL:g}", time.perf_counter() - t)


def exceptional_set_suite(draws: int, rng: np.random.Generator, n_range=(8, 128)) -> SuiteResult:
    t = time.perf_counter()
    fails, worst = 0, -np.inf
    for _ in range(draws):
        system = _system(rng)
        N = int(rng.integers(n_range[0], n_range[1] + 1))
        Q = build_QN(system, random_weights(rng), random_signs(rng, N), N)
        res = exceptional_set_check(Q, N)
        worst = max(worst, res.lhs - res.rhs)
        fails += not res.holds
    return SuiteResult("exceptional_set", draws, fails, float(worst), "lhs <= rhs + 1e-12", time.perf_counter() - t)


def lower_bound_suite(draws: int, rng: np.random.Generator, n_range=(8, 64)) -> SuiteResult:
    t = time.perf_counter()
    fails, worst = 0, -np.inf
    for _ in range(draws):
        system = _system(rng)
        N = int(rng.integers(n_range[0], n_range[1] + 1))
        wit = lower_bound_check(system, random_weights(rng), random_signs(rng, N), N)
        worst = max(worst, wit.D_N - wit.deficit_bound - abs(wit.functional_value))
        fails += not wit.holds
    return SuiteResult("lower_bound", draws, fails, float(worst), "|<f_N,Q_N>| >= D_N - deficit - 1e-10",
                       time.perf_counter() - t)


def run_all(draws: int = 100, seed: int = 0) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    return [
        orthonormality_suite(),
        parseval_suite(draws, rng),
        sbp_suite(draws, rng),
        exceptional_set_suite(draws, rng),
        lower_bound_suite(max(1, draws // 4), rng),
    ]
