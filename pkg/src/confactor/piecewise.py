"""Exact piecewise-constant and piecewise-linear functions on [0, 1].

Breakpoints are :class:`fractions.Fraction` so interval lengths carry no
rounding error; values are float64 (Haar and Walsh values involve powers of
sqrt(2), so exact rational values are not available anyway).
"""

from __future__ import annotations

import bisect
import json
import math
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PiecewiseConstant",
    "PiecewiseLinear",
    "LipschitzFunction",
    "antiderivative",
    "integrate_product",
    "sign_function",
    "l2_norm_sq",
    "linear_combination",
    "to_fraction",
    "ROOT_DENOMINATOR",
    "ZERO_RTOL",
]

# Roots inserted by sign_function are rounded to this denominator.
ROOT_DENOMINATOR = 2**63
# Node values with |v| <= ZERO_RTOL * max|v| count as zero in sign decisions.
ZERO_RTOL = 1e-14
# Largest common denominator for which linear_combination uses a dense grid.
_DENSE_LIMIT = 2**16

_ZERO = Fraction(0)
_ONE = Fraction(1)


def to_fraction(x) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to Fraction.

    Floats are converted exactly (their binary value), so pass strings when a
    decimal like 0.1 is meant.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"breakpoint must be finite, got {x!r}")
        return Fraction(x)
    return Fraction(x)


def _check_breakpoints(bps: Sequence[Fraction]) -> None:
    if len(bps) < 2:
        raise ValueError("need at least two breakpoints")
    if bps[0] != 0 or bps[-1] != 1:
        raise ValueError("breakpoints must start at 0 and end at 1")
    for a, b in zip(bps, bps[1:]):
        if not a < b:
            raise ValueError("breakpoints must be strictly increasing")


class PiecewiseConstant:
    """Step function on [0, 1], canonical (adjacent cells never share a value).

    Evaluation at a breakpoint returns the right-hand value (the last cell's
    value at t = 1).
    """

    __slots__ = ("breakpoints", "values", "__dict__")

    def __init__(self, breakpoints: Iterable, values: Iterable[float]):
        bps = [to_fraction(b) for b in breakpoints]
        vals = [float(v) for v in values]
        _check_breakpoints(bps)
        if len(vals) != len(bps) - 1:
            raise ValueError(
                f"expected {len(bps) - 1} values for {len(bps)} breakpoints, got {len(vals)}"
            )
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("values must be finite")
        keep_b = [bps[0]]
        keep_v = [vals[0]]
        for b, v in zip(bps[1:-1], vals[1:]):
            if v == keep_v[-1]:
                continue
            keep_b.append(b)
            keep_v.append(v)
        keep_b.append(bps[-1])
        self.breakpoints: tuple[Fraction, ...] = tuple(keep_b)
        arr = np.array(keep_v, dtype=np.float64)
        arr.flags.writeable = False
        self.values: np.ndarray = arr

    @classmethod
    def _raw(cls, breakpoints: tuple, values: np.ndarray) -> "PiecewiseConstant":
        # Caller guarantees validity and canonical form.
        obj = cls.__new__(cls)
        obj.breakpoints = breakpoints
        values = np.asarray(values, dtype=np.float64)
        values.flags.writeable = False
        obj.values = values
        return obj

    @classmethod
    def constant(cls, c: float = 0.0) -> "PiecewiseConstant":
        return cls._raw((_ZERO, _ONE), np.array([float(c)]))

    @classmethod
    def zero(cls) -> "PiecewiseConstant":
        return cls.constant(0.0)

    @classmethod
    def from_grid(cls, values: Sequence[float]) -> "PiecewiseConstant":
        """Step function on the uniform grid of len(values) cells."""
        m = len(values)
        return cls([Fraction(j, m) for j in range(m + 1)], values)

    # -- cached views -------------------------------------------------
    @cached_property
    def lengths(self) -> np.ndarray:
        b = self.breakpoints
        return np.array([float(b[j + 1] - b[j]) for j in range(len(b) - 1)])

    @cached_property
    def float_breakpoints(self) -> np.ndarray:
        return np.array([float(b) for b in self.breakpoints])

    @cached_property
    def denominator(self) -> int:
        """Least common denominator of all breakpoints."""
        return math.lcm(*(b.denominator for b in self.breakpoints))

    def _grid_indices(self, L: int) -> np.ndarray:
        return np.array([b.numerator * (L // b.denominator) for b in self.breakpoints], dtype=np.int64)

    # -- basic behaviour ----------------------------------------------
    def __call__(self, t) -> float:
        t = to_fraction(t)
        if t < 0 or t > 1:
            raise ValueError("t outside [0, 1]")
        j = bisect.bisect_right(self.breakpoints, t) - 1
        j = min(j, len(self.values) - 1)
        return float(self.values[j])

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseConstant):
            return NotImplemented
        return self.breakpoints == other.breakpoints and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.breakpoints, self.values.tobytes()))

    def __repr__(self) -> str:
        n = len(self.values)
        return f"PiecewiseConstant(<{n} cells>)" if n > 6 else (
            f"PiecewiseConstant({[str(b) for b in self.breakpoints]}, {self.values.tolist()})"
        )

    def __neg__(self) -> "PiecewiseConstant":
        return PiecewiseConstant._raw(self.breakpoints, -self.values)

    def scale(self, c: float) -> "PiecewiseConstant":
        return linear_combination([(c, self)])

    def integral(self) -> float:
        return float(np.dot(self.values, self.lengths))

    def is_zero(self) -> bool:
        return len(self.values) == 1 and self.values[0] == 0.0

    def cell_values(self, m: int) -> np.ndarray:
        """Values on the uniform grid of ``m`` cells.

        Every breakpoint must be a multiple of 1/m.
        """
        if m % self.denominator:
            raise ValueError(f"breakpoints are not aligned to a grid of {m} cells")
        idx = self._grid_indices(m)
        return np.repeat(self.values, np.diff(idx))

    # -- serialization ------------------------------------------------
    def to_dict(self) -> dict:
        return {"breakpoints": [str(b) for b in self.breakpoints], "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseConstant":
        return cls(d["breakpoints"], d["values"])


class PiecewiseLinear:
    """Continuous piecewise-linear function on [0, 1] given by node values.

    ``slopes`` may be supplied when they are known exactly (antiderivatives
    keep the integrand's values as slopes); otherwise they are derived from
    node differences.
    """

    __slots__ = ("breakpoints", "node_values", "slopes", "__dict__")

    def __init__(self, breakpoints: Iterable, node_values: Iterable[float], slopes=None):
        bps = tuple(to_fraction(b) for b in breakpoints)
        _check_breakpoints(bps)
        nodes = np.array([float(v) for v in node_values], dtype=np.float64)
        if len(nodes) != len(bps):
            raise ValueError("need one node value per breakpoint")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("node values must be finite")
        if slopes is None:
            lengths = np.array([float(b - a) for a, b in zip(bps, bps[1:])])
            slopes = np.diff(nodes) / lengths
        else:
            slopes = np.array(slopes, dtype=np.float64)
            if len(slopes) != len(bps) - 1:
                raise ValueError("need one slope per interval")
        nodes.flags.writeable = False
        slopes.flags.writeable = False
        self.breakpoints: tuple[Fraction, ...] = bps
        self.node_values: np.ndarray = nodes
        self.slopes: np.ndarray = slopes

    @classmethod
    def _raw(cls, breakpoints, node_values, slopes) -> "PiecewiseLinear":
        obj = cls.__new__(cls)
        obj.breakpoints = breakpoints
        node_values = np.asarray(node_values, dtype=np.float64)
        slopes = np.asarray(slopes, dtype=np.float64)
        node_values.flags.writeable = False
        slopes.flags.writeable = False
        obj.node_values = node_values
        obj.slopes = slopes
        return obj

    @classmethod
    def identity(cls) -> "PiecewiseLinear":
        return cls._raw((_ZERO, _ONE), [0.0, 1.0], [1.0])

    @classmethod
    def constant(cls, c: float) -> "PiecewiseLinear":
        return cls._raw((_ZERO, _ONE), [float(c), float(c)], [0.0])

    @cached_property
    def float_breakpoints(self) -> np.ndarray:
        return np.array([float(b) for b in self.breakpoints])

    def __call__(self, t) -> float:
        t = to_fraction(t)
        if t < 0 or t > 1:
            raise ValueError("t outside [0, 1]")
        j = bisect.bisect_right(self.breakpoints, t) - 1
        if j >= len(self.slopes):
            return float(self.node_values[-1])
        b = self.breakpoints[j]
        if t == b:
            return float(self.node_values[j])
        return float(self.node_values[j] + self.slopes[j] * float(t - b))

    def evaluate_grid(self, n: int) -> np.ndarray:
        """Values at i/n for i = 0..n (linear interpolation between nodes)."""
        ts = np.arange(n + 1, dtype=np.float64) / n
        return np.interp(ts, self.float_breakpoints, self.node_values)

    @property
    def lip_seminorm(self) -> float:
        return float(np.max(np.abs(self.slopes)))

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.node_values)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseLinear):
            return NotImplemented
        return (
            self.breakpoints == other.breakpoints
            and np.array_equal(self.node_values, other.node_values)
            and np.array_equal(self.slopes, other.slopes)
        )

    def __hash__(self):
        return hash((self.breakpoints, self.node_values.tobytes()))

    def __repr__(self) -> str:
        return f"PiecewiseLinear(<{len(self.breakpoints)} nodes>)"

    def to_dict(self) -> dict:
        return {"breakpoints": [str(b) for b in self.breakpoints], "values": self.node_values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseLinear":
        return cls(d["breakpoints"], d["values"])

    def dumps(self) -> str:
        return json.dumps(self.to_dict())


class LipschitzFunction:
    """A piecewise-linear function viewed as an element of Lip1."""

    def __init__(self, representation: PiecewiseLinear):
        self.representation = representation
        self.lip_seminorm = representation.lip_seminorm
        self.sup_norm = representation.sup_norm

    @property
    def lip1_norm(self) -> float:
        return self.lip_seminorm + self.sup_norm

    def __call__(self, t) -> float:
        return self.representation(t)

    def __repr__(self) -> str:
        return f"LipschitzFunction(lip={self.lip_seminorm:.6g}, sup={self.sup_norm:.6g})"


def _as_linear(f) -> PiecewiseLinear:
    return f.representation if isinstance(f, LipschitzFunction) else f


def antiderivative(F: PiecewiseConstant) -> PiecewiseLinear:
    """P(t) = integral of F over [0, t]; P(0) = 0 and P' = F on each cell."""
    nodes = np.empty(len(F.breakpoints))
    nodes[0] = 0.0
    np.cumsum(F.values * F.lengths, out=nodes[1:])
    return PiecewiseLinear._raw(F.breakpoints, nodes, F.values.copy())


def _merge(*bp_lists: Sequence[Fraction]) -> list[Fraction]:
    return sorted(set().union(*bp_lists))


def integrate_product(f, F: PiecewiseConstant) -> float:
    """Integral over [0, 1] of f*F for piecewise-linear f and step function F."""
    f = _as_linear(f)
    grid = _merge(f.breakpoints, F.breakpoints)
    fvals = _values_at(f, grid)
    fcell = _cell_lookup(F, grid)
    total = 0.0
    for j in range(len(grid) - 1):
        v = fcell[j]
        if v == 0.0:
            continue
        total += v * 0.5 * (fvals[j] + fvals[j + 1]) * float(grid[j + 1] - grid[j])
    return total


def _values_at(f: PiecewiseLinear, ts: Sequence[Fraction]) -> list[float]:
    """f at sorted points ts (two-pointer sweep, exact offsets)."""
    out = []
    bps = f.breakpoints
    nodes = f.node_values
    slopes = f.slopes
    j = 0
    last = len(slopes) - 1
    for t in ts:
        while j < last and bps[j + 1] <= t:
            j += 1
        if t == bps[j]:
            out.append(float(nodes[j]))
        elif t == bps[j + 1]:
            out.append(float(nodes[j + 1]))
        else:
            out.append(float(nodes[j] + slopes[j] * float(t - bps[j])))
    return out


def _cell_lookup(F: PiecewiseConstant, grid: Sequence[Fraction]) -> list[float]:
    """Value of F on each cell of a refinement ``grid`` of F's breakpoints."""
    out = []
    bps = F.breakpoints
    j = 0
    last = len(F.values) - 1
    for t in grid[:-1]:
        while j < last and bps[j + 1] <= t:
            j += 1
        out.append(float(F.values[j]))
    return out


def sign_function(P: PiecewiseLinear) -> PiecewiseConstant:
    """Step function sign(P) with values in {-1, 0, +1}.

    Zero crossings inside a linear piece become breakpoints, rounded to the
    nearest multiple of 1/ROOT_DENOMINATOR.
    """
    nodes = P.node_values
    scale = float(np.max(np.abs(nodes)))
    tol = ZERO_RTOL * scale
    sg = np.where(np.abs(nodes) <= tol, 0, np.sign(nodes)).astype(int)
    bps = P.breakpoints
    out_b = [bps[0]]
    out_v: list[float] = []
    for j in range(len(bps) - 1):
        a, b = bps[j], bps[j + 1]
        sa, sb = sg[j], sg[j + 1]
        if sa * sb < 0:
            va, vb = float(nodes[j]), float(nodes[j + 1])
            theta = Fraction(va / (va - vb))
            root = a + (b - a) * theta
            root = Fraction(round(root * ROOT_DENOMINATOR), ROOT_DENOMINATOR)
            if a < root < b:
                out_v.append(float(sa))
                out_b.append(root)
                out_v.append(float(sb))
            else:
                # root rounds onto an endpoint: the whole cell takes the far sign
                out_v.append(float(sb if root <= a else sa))
        elif sa == 0 and sb == 0:
            out_v.append(0.0)
        else:
            out_v.append(float(sa if sa != 0 else sb))
        out_b.append(b)
    return PiecewiseConstant(out_b, out_v)


def l2_norm_sq(F: PiecewiseConstant) -> float:
    """Integral of F**2 over [0, 1]."""
    return float(np.dot(F.values * F.values, F.lengths))


def linear_combination(terms: Sequence[tuple[float, PiecewiseConstant]]) -> PiecewiseConstant:
    """Sum of c_i * F_i on the merged breakpoint grid.

    Each cell value is accumulated in term order, so results do not depend on
    which internal path is taken.
    """
    terms = [(float(c), F) for c, F in terms if c != 0.0]
    if not terms:
        return PiecewiseConstant.zero()
    L = math.lcm(*(F.denominator for _, F in terms))
    if L <= _DENSE_LIMIT:
        acc = np.zeros(L)
        for c, F in terms:
            idx = F._grid_indices(L)
            acc += c * np.repeat(F.values, np.diff(idx))
        change = np.flatnonzero(acc[1:] != acc[:-1]) + 1
        bps = (_ZERO, *(Fraction(int(i), L) for i in change), _ONE)
        return PiecewiseConstant._raw(bps, acc[np.concatenate(([0], change))])
    grid = _merge(*(F.breakpoints for _, F in terms))
    pos = {b: i for i, b in enumerate(grid)}
    acc = np.zeros(len(grid) - 1)
    for c, F in terms:
        idx = [pos[b] for b in F.breakpoints]
        for j, v in enumerate(F.values):
            acc[idx[j] : idx[j + 1]] += c * v
    return PiecewiseConstant(grid, acc)
