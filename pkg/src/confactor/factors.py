"""Criterion objects: Q_N(x, eps), D_N(eps), exceptional sets, coefficients, growth fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence, Union

import numpy as np

from .ons import ClosedFormTrig, OrthonormalSystem, TrigPolynomial, _antiderivative_cached
from .piecewise import (
    ZERO_RTOL,
    LipschitzFunction,
    PiecewiseConstant,
    PiecewiseLinear,
    _as_linear,
    _cell_lookup,
    _values_at,
    antiderivative,
    integrate_product,
    l2_norm_sq,
    linear_combination,
)
from .sequences import SignSequence, WeightSequence, parse_weights

__all__ = [
    "WeightSequence",
    "SignSequence",
    "parse_weights",
    "PrimitiveMatrix",
    "FourierCoefficients",
    "ExceptionalSetResult",
    "GrowthFit",
    "build_QN",
    "compute_DN",
    "exceptional_set",
    "exceptional_set_check",
    "parseval_check",
    "parseval_sum",
    "fourier_coefficient",
    "fourier_coefficients",
    "weighted_partial_sums",
    "sbp_residual",
    "fit_growth",
    "rademacher_profile",
    "haar_block_max",
]

QN = Union[PiecewiseConstant, TrigPolynomial]


def _signs_array(signs, N: int) -> np.ndarray:
    eps = np.asarray(list(signs), dtype=np.float64)
    if eps.shape != (N,):
        raise ValueError(f"expected {N} signs, got {eps.shape[0] if eps.ndim else 0}")
    return eps


def _coefficients(system: OrthonormalSystem, weights: WeightSequence, eps: np.ndarray) -> list[tuple[int, float]]:
    """(k, d_k * sqrt(k) * eps_k) for the nonempty slots with eps_k != 0."""
    out = []
    for k, e in enumerate(eps, start=1):
        if e == 0.0 or not system.is_active(k):
            continue
        out.append((k, weights(k) * math.sqrt(k) * e))
    return out


def build_QN(system: OrthonormalSystem, weights: WeightSequence, signs, N: int) -> QN:
    """Q_N(x, eps) = sum_k d_k sqrt(k) phi_k(x) eps_k.

    ``signs`` may hold arbitrary reals (used for convexity checks); a
    :class:`SignSequence` restricts them to {-1, 0, 1}.
    """
    if not isinstance(weights, WeightSequence):
        raise TypeError("weights must be a WeightSequence (bounded positive family)")
    eps = _signs_array(signs, N)
    terms = [(c, system.function(k)) for k, c in _coefficients(system, weights, eps)]
    if system.is_piecewise:
        return linear_combination(terms)
    return TrigPolynomial.from_terms(terms)


def _primitive_grid(Q: QN, N: int) -> np.ndarray:
    """Integral of Q over [0, i/N] for i = 1..N-1."""
    if isinstance(Q, TrigPolynomial):
        return Q.primitive(np.arange(1, N, dtype=np.float64) / N)
    return antiderivative(Q).evaluate_grid(N)[1:N]


def compute_DN(system: OrthonormalSystem, weights: WeightSequence, signs, N: int) -> float:
    """D_N(eps) = (1/N) sum_{i=1}^{N-1} |integral of Q_N over [0, i/N]|."""
    if N < 1:
        raise ValueError("N must be positive")
    if N == 1:
        return 0.0
    Q = build_QN(system, weights, signs, N)
    return float(np.sum(np.abs(_primitive_grid(Q, N)))) / N


class PrimitiveMatrix:
    """B[k-1, i-1] = d_k sqrt(k) * integral of phi_k over [0, i/N].

    D_N(eps) is then (1/N) * sum_i |sum_k eps_k B[k, i]|; rows of emptied
    slots are zero.
    """

    def __init__(self, system: OrthonormalSystem, weights: WeightSequence, N: int):
        if N < 1:
            raise ValueError("N must be positive")
        self.N = N
        self.system = system
        self.weights = weights
        B = np.zeros((N, max(N - 1, 0)))
        if N > 1:
            ts = np.arange(1, N, dtype=np.float64) / N
            for k in range(1, N + 1):
                if not system.is_active(k):
                    continue
                fn = system.function(k)
                c = weights(k) * math.sqrt(k)
                if isinstance(fn, ClosedFormTrig):
                    B[k - 1] = c * TrigPolynomial.single(fn, 1.0).primitive(ts)
                else:
                    B[k - 1] = c * _antiderivative_cached(fn).evaluate_grid(N)[1:N]
        B.flags.writeable = False
        self.B = B
        nz = B != 0.0
        any_nz = nz.any(axis=1)
        if B.shape[1] == 0:
            first = last = np.zeros(N, dtype=np.intp)
        else:
            first = np.where(any_nz, nz.argmax(axis=1), 0)
            last = np.where(any_nz, B.shape[1] - nz[:, ::-1].argmax(axis=1), 0)
        # half-open column span [lo, hi) holding every nonzero of each row
        self.spans = np.stack([first, last], axis=1)

    def column_sums(self, eps) -> np.ndarray:
        """sum_k eps_k B[k, :], accumulated in k order (batched over leading axes)."""
        eps = np.asarray(eps, dtype=np.float64)
        S = np.zeros(eps.shape[:-1] + (self.B.shape[1],))
        for k in range(self.N):
            e = eps[..., k]
            if np.all(e == 0):
                continue
            S += e[..., None] * self.B[k]
        return S

    def value(self, eps) -> Union[float, np.ndarray]:
        """D_N at one sign vector, or a batch of them along the last axis."""
        if self.N == 1:
            eps = np.asarray(eps, dtype=np.float64)
            return 0.0 if eps.ndim == 1 else np.zeros(eps.shape[:-1])
        S = self.column_sums(eps)
        out = np.sum(np.abs(S), axis=-1) / self.N
        return float(out) if np.ndim(out) == 0 else out

    def abs_bound(self) -> float:
        """(1/N) sum_{i,k} |B[k, i]|, an upper bound for D_N over the cube."""
        return float(np.sum(np.abs(self.B))) / self.N if self.N > 1 else 0.0


# ---------------------------------------------------------------- exceptional set

def _sign(v: float, tol: float) -> int:
    return 0 if abs(v) <= tol else (1 if v > 0 else -1)


def exceptional_set(Q: PiecewiseConstant, n: int) -> set[int]:
    """Indices i in 1..n-1 where the primitive of Q vanishes on [(i-1)/n, i/n]
    while being nonzero at i/n, or changes strict sign inside that interval."""
    if n < 2:
        raise ValueError("n must be at least 2")
    P = antiderivative(Q)
    grid = [Fraction(i, n) for i in range(n + 1)]
    at_grid = _values_at(P, grid)
    scale = max(float(np.max(np.abs(P.node_values))), max(abs(v) for v in at_grid))
    tol = ZERO_RTOL * scale
    # interval i spans [(i-1)/n, i/n]; stored at position i-1
    lo = [min(a, b) for a, b in zip(at_grid[:-1], at_grid[1:])]
    hi = [max(a, b) for a, b in zip(at_grid[:-1], at_grid[1:])]
    for b, v in zip(P.breakpoints, P.node_values):
        j = math.floor(b * n)
        if j >= n:
            continue
        v = float(v)
        lo[j] = min(lo[j], v)
        hi[j] = max(hi[j], v)
    out = set()
    for i in range(1, n):
        end = _sign(at_grid[i], tol)
        mn, mx = lo[i - 1], hi[i - 1]
        vanishes = mn <= tol and mx >= -tol
        strict_change = mn < -tol and mx > tol
        if (end != 0 and vanishes) or strict_change:
            out.add(i)
    return out


class ExceptionalSetResult(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def exceptional_set_check(Q: PiecewiseConstant, n: int, tol: float = 1e-12) -> ExceptionalSetResult:
    """sum over the exceptional set of |P(i/n)| against the L2 norm of Q."""
    E = exceptional_set(Q, n)
    P = antiderivative(Q)
    vals = _values_at(P, [Fraction(i, n) for i in sorted(E)])
    lhs = float(sum(abs(v) for v in vals))
    rhs = math.sqrt(l2_norm_sq(Q))
    return ExceptionalSetResult(lhs, rhs, lhs <= rhs + tol)


# ---------------------------------------------------------------- Parseval

def parseval_sum(system: OrthonormalSystem, weights: WeightSequence, signs, N: int) -> float:
    """sum of k d_k^2 eps_k^2 over nonempty slots."""
    eps = _signs_array(signs, N)
    return float(sum(c * c for _, c in _coefficients(system, weights, eps)))


def _norm_sq(Q: QN) -> float:
    return Q.l2_norm_sq() if isinstance(Q, TrigPolynomial) else l2_norm_sq(Q)


def parseval_check(system: OrthonormalSystem, weights: WeightSequence, signs, N: int) -> float:
    """|integral of Q_N^2 - sum k d_k^2 eps_k^2|."""
    Q = build_QN(system, weights, signs, N)
    return abs(_norm_sq(Q) - parseval_sum(system, weights, signs, N))


# ---------------------------------------------------------------- coefficients

def _trig_product(f: PiecewiseLinear, Q: TrigPolynomial) -> float:
    # integration by parts: f(1) P(1) - sum_j slope_j * (PP(b_{j+1}) - PP(b_j))
    bps = f.breakpoints
    pp = np.asarray(Q.second_primitive(f.float_breakpoints), dtype=np.float64)
    # endpoints carry exact reductions
    pp[0] = 0.0
    pp[-1] = Q.second_primitive(Fraction(1))
    total = float(f.node_values[-1]) * Q.primitive(Fraction(1))
    total -= float(np.dot(f.slopes, np.diff(pp)))
    return total


def integrate_against(f, Q: QN) -> float:
    """Integral of f*Q for piecewise-linear f and either kind of Q."""
    f = _as_linear(f)
    if isinstance(Q, TrigPolynomial):
        return _trig_product(f, Q)
    return integrate_product(f, Q)


def fourier_coefficient(f, system: OrthonormalSystem, n: int) -> float:
    """c_n(f) = integral of f phi_n; emptied slots give 0."""
    fn = system.slot(n)
    if fn is None:
        return 0.0
    if isinstance(fn, ClosedFormTrig):
        return _trig_product(_as_linear(f), TrigPolynomial.single(fn, 1.0))
    return integrate_product(f, fn)


@dataclass
class FourierCoefficients:
    c: np.ndarray
    f_norm_sq: float = float("nan")

    def bessel_gap(self) -> float:
        """integral of f^2 minus sum c_n^2 (nonnegative up to rounding)."""
        return self.f_norm_sq - float(np.dot(self.c, self.c))


def _pl_norm_sq(f: PiecewiseLinear) -> float:
    a = f.node_values[:-1]
    b = f.node_values[1:]
    lengths = np.array([float(y - x) for x, y in zip(f.breakpoints, f.breakpoints[1:])])
    return float(np.dot((a * a + a * b + b * b) / 3.0, lengths))


def fourier_coefficients(f, system: OrthonormalSystem, N: int) -> FourierCoefficients:
    f = _as_linear(f)
    c = np.array([fourier_coefficient(f, system, n) for n in range(1, N + 1)])
    return FourierCoefficients(c, _pl_norm_sq(f))


def weighted_partial_sums(f, system: OrthonormalSystem, weights: WeightSequence, N: int) -> np.ndarray:
    """S_m = sum_{k<=m} |c_k(f)| sqrt(k) d_k for m = 1..N."""
    c = fourier_coefficients(f, system, N).c
    k = np.arange(1, N + 1)
    return np.cumsum(np.abs(c) * np.sqrt(k) * weights.array(N))


# ---------------------------------------------------------------- summation by parts

def sbp_residual(f, F: PiecewiseConstant, N: int) -> float:
    """|LHS - RHS| of the summation-by-parts identity on the grid i/N.

    RHS = sum_{i<N} (f(i/N) - f((i+1)/N)) P(i/N)
        + sum_{i<=N} integral over [(i-1)/N, i/N] of (f - f(i/N)) F
        + f(1) P(1),   P = primitive of F.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    f = _as_linear(f)
    lhs = integrate_product(f, F)
    P = antiderivative(F)
    grid = [Fraction(i, N) for i in range(N + 1)]
    fg = _values_at(f, grid)
    Pg = _values_at(P, grid)
    t1 = sum((fg[i] - fg[i + 1]) * Pg[i] for i in range(1, N))
    merged = sorted(set(f.breakpoints) | set(F.breakpoints) | set(grid))
    fm = _values_at(f, merged)
    Fm = _cell_lookup(F, merged)
    t2 = 0.0
    cell = 1
    for j in range(len(merged) - 1):
        while grid[cell] < merged[j + 1]:
            cell += 1
        if Fm[j] == 0.0:
            continue
        avg = 0.5 * (fm[j] + fm[j + 1]) - fg[cell]
        t2 += Fm[j] * avg * float(merged[j + 1] - merged[j])
    t3 = fg[N] * Pg[N]
    return abs(lhs - (t1 + t2 + t3))


# ---------------------------------------------------------------- growth diagnostics

POWER_EXPONENTS = tuple(round(0.1 * j, 1) for j in range(1, 11))


@dataclass
class GrowthFit:
    """Least-squares growth classification of a positive sequence over n.

    ``slope`` is the coefficient of ln n in the log model (or of n**beta in
    the power model); ``model`` is "constant", "log" or "power".
    """

    model: str
    slope: float
    r_squared: float
    beta: float | None = None
    candidates: dict = field(default_factory=dict)
    intercept: float = 0.0

    def predict(self, n):
        n = np.asarray(n, dtype=np.float64)
        if self.model == "log":
            return self.intercept + self.slope * np.log(n)
        if self.model == "power":
            return self.intercept + self.slope * n**self.beta
        return np.full_like(n, self.intercept)

    def to_dict(self) -> dict:
        return {"model": self.model, "slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "beta": self.beta, "candidates": self.candidates}


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return float(coef[0]), float(coef[1]), r2


def fit_growth(ns: Sequence[float], values: Sequence[float],
               slope_threshold: float = 0.05, r2_threshold: float = 0.9) -> GrowthFit:
    """Classify growth of ``values`` over ``ns``.

    The sequence is "growing" when the log-model slope exceeds
    ``slope_threshold`` with R^2 above ``r2_threshold``; growing sequences
    take whichever of the log and power models has the higher R^2 (ties go to
    log), everything else is "constant".
    """
    x = np.asarray(ns, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    mean = float(y.mean()) if len(y) else 0.0
    if len(x) < 3 or float(np.ptp(y)) == 0.0:
        return GrowthFit("constant", 0.0, 0.0, candidates={"constant": 0.0}, intercept=mean)
    a_log, b_log, r2_log = _linfit(np.log(x), y)
    best_beta, a_pow, b_pow, r2_pow = None, 0.0, 0.0, -np.inf
    for beta in POWER_EXPONENTS:
        a, b, r2 = _linfit(x**beta, y)
        if r2 > r2_pow:
            best_beta, a_pow, b_pow, r2_pow = beta, a, b, r2
    candidates = {"constant": 0.0, "log": r2_log, "power": r2_pow}
    if not (b_log > slope_threshold and r2_log > r2_threshold):
        return GrowthFit("constant", b_log, r2_log, candidates=candidates, intercept=mean)
    if r2_pow > r2_log + 1e-12 and b_pow > 0:
        return GrowthFit("power", b_pow, r2_pow, best_beta, candidates, a_pow)
    return GrowthFit("log", b_log, r2_log, candidates=candidates, intercept=a_log)


# ---------------------------------------------------------------- extras

def rademacher_profile(system: OrthonormalSystem, gamma: float, N: int, t) -> float:
    """(1/N) * sum_{i<N} |integral over [0, i/N] of sum_k k^gamma phi_k r_k(t)|.

    This is D_N with weights k^(gamma - 1/2) and Rademacher signs at t.
    """
    from .ons import rademacher_signs

    if not 0 < gamma <= 0.5:
        raise ValueError("gamma must lie in (0, 1/2] so that k^(gamma-1/2) stays bounded")
    return compute_DN(system, WeightSequence.power(gamma - 0.5), rademacher_signs(t, N), N)


def haar_block_max(weights: WeightSequence, signs, s: int, n: int) -> float:
    """max_i |integral over [0, i/n] of the Haar block sum over 2**s <= k < 2**(s+1)|."""
    ks = range(2**s, 2 ** (s + 1))
    eps = list(signs)
    from .ons import haar

    terms = [(weights(k) * math.sqrt(k) * eps[k - 2**s], haar(k)) for k in ks if k >= 2]
    P = antiderivative(linear_combination(terms))
    return float(np.max(np.abs(P.evaluate_grid(n)[1:n]))) if n > 1 else 0.0
