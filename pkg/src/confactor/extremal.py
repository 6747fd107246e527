"""Extremal Lip1 witnesses f_N(x) = int_0^x sign(int_0^y Q_N) dy and the lower bound they certify."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .factors import build_QN, compute_DN, integrate_against, parseval_sum
from .ons import OrthonormalSystem, TrigPolynomial
from .piecewise import (
    ROOT_DENOMINATOR,
    ZERO_RTOL,
    LipschitzFunction,
    PiecewiseConstant,
    PiecewiseLinear,
    antiderivative,
    sign_function,
)
from .sequences import WeightSequence

__all__ = [
    "ExtremalWitness",
    "build_extremal",
    "build_extremal_trig",
    "functional_value",
    "lower_bound_check",
    "lip1_norm",
    "grid_increment",
    "TRIG_CELLS",
]

TRIG_CELLS = 2**16
LOWER_BOUND_TOL = 1e-10


def build_extremal(Q: PiecewiseConstant) -> LipschitzFunction:
    """f = antiderivative(sign(antiderivative(Q))); slopes lie in {-1, 0, 1}."""
    return LipschitzFunction(antiderivative(sign_function(antiderivative(Q))))


def _bisect_root(P: TrigPolynomial, a: float, b: float, pa: float, tol: float = 1e-12) -> float:
    while b - a > tol:
        m = 0.5 * (a + b)
        pm = P.primitive(np.array([m]))[0]
        if (pm > 0) == (pa > 0) and pm != 0:
            a, pa = m, pm
        else:
            b = m
    return 0.5 * (a + b)


def build_extremal_trig(Q: TrigPolynomial, cells: int = TRIG_CELLS) -> LipschitzFunction:
    """Grid version of build_extremal for a trigonometric Q_N.

    The primitive's sign is sampled on ``cells`` uniform cells and strict
    sign changes are refined by bisection to 1e-12.
    """
    ts = np.arange(cells + 1, dtype=np.float64) / cells
    vals = np.asarray(Q.primitive(ts), dtype=np.float64)
    vals[0] = 0.0
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    tol = ZERO_RTOL * scale
    sg = np.where(np.abs(vals) <= tol, 0, np.sign(vals)).astype(int)
    bps = [Fraction(0)]
    out: list[float] = []
    for j in range(cells):
        sa, sb = sg[j], sg[j + 1]
        right = Fraction(j + 1, cells)
        if sa * sb < 0:
            r = _bisect_root(Q, ts[j], ts[j + 1], vals[j])
            root = Fraction(round(Fraction(r) * ROOT_DENOMINATOR), ROOT_DENOMINATOR)
            if bps[-1] < root < right:
                out.append(float(sa))
                bps.append(root)
                out.append(float(sb))
            else:
                out.append(float(sb))
        else:
            out.append(float(sa if sa != 0 else sb))
        bps.append(right)
    return LipschitzFunction(antiderivative(PiecewiseConstant(bps, out)))


def functional_value(f, Q: Union[PiecewiseConstant, TrigPolynomial]) -> float:
    """Integral of f * Q_N over [0, 1]."""
    return integrate_against(f, Q)


def lip1_norm(f) -> float:
    """Lipschitz seminorm plus sup norm (exact for piecewise-linear f)."""
    if isinstance(f, PiecewiseLinear):
        f = LipschitzFunction(f)
    return f.lip1_norm


def grid_increment(f, N: int) -> float:
    """max_i |f(i/N) - f((i+1)/N)|."""
    rep = f.representation if isinstance(f, LipschitzFunction) else f
    vals = [rep(Fraction(i, N)) for i in range(N + 1)]
    return max(abs(a - b) for a, b in zip(vals, vals[1:]))


@dataclass
class ExtremalWitness:
    f_N: LipschitzFunction
    Q_N: Union[PiecewiseConstant, TrigPolynomial]
    functional_value: float
    D_N: float
    deficit_bound: float
    holds: bool
    N: int = 0

    def to_dict(self, include_function: bool = True) -> dict:
        d = {
            "N": self.N,
            "functional_value": self.functional_value,
            "D_N": self.D_N,
            "deficit_bound": self.deficit_bound,
            "holds": self.holds,
            "lip_seminorm": self.f_N.lip_seminorm,
            "sup_norm": self.f_N.sup_norm,
            "lip1_norm": self.f_N.lip1_norm,
        }
        if include_function:
            d["f_N"] = self.f_N.representation.to_dict()
        return d


def lower_bound_check(system: OrthonormalSystem, weights: WeightSequence, signs, N: int,
                      cells: int = TRIG_CELLS) -> ExtremalWitness:
    """Check |int f_N Q_N| >= D_N - deficit with deficit = 3 ||Q_N||_2 / N.

    When Q_N has nonzero mean (mean-zero filtering off) the boundary term
    |f_N(1) int Q_N| is added to the deficit.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    Q = build_QN(system, weights, signs, N)
    if isinstance(Q, TrigPolynomial):
        f = build_extremal_trig(Q, cells)
    else:
        f = build_extremal(Q)
    value = functional_value(f, Q)
    dn = compute_DN(system, weights, signs, N)
    deficit = 3.0 * math.sqrt(float(parseval_sum(system, weights, signs, N))) / N
    mean = Q.integral()
    if mean != 0.0:
        deficit += abs(f.representation.node_values[-1] * mean)
    holds = abs(value) >= dn - deficit - LOWER_BOUND_TOL
    return ExtremalWitness(f, Q, float(value), float(dn), float(deficit), bool(holds), N)
