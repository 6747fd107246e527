"""Orthonormal systems on [0, 1]: Haar, Walsh-Paley, trigonometric, Rademacher, custom."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .piecewise import PiecewiseConstant, PiecewiseLinear, antiderivative, to_fraction
from .sequences import SignSequence

__all__ = [
    "ClosedFormTrig",
    "TrigPolynomial",
    "OrthonormalSystem",
    "haar",
    "haar_index",
    "walsh",
    "rademacher",
    "rademacher_signs",
    "trig",
    "primitive",
    "gram_matrix",
    "load_custom",
    "parse_system",
    "KINDS",
]

KINDS = ("haar", "walsh", "trig", "rademacher", "custom")
SQRT2 = math.sqrt(2.0)
TWO_PI = 2.0 * math.pi
# r_k has 2**k cells; beyond this the step representation gets unwieldy.
MAX_RADEMACHER = 24
ORTHO_TOL = 1e-10


def haar_index(k: int) -> tuple[int, int]:
    """(s, l) with k = 2**s + l and 1 <= l <= 2**s, for k >= 2."""
    if k < 2:
        raise ValueError("haar_index needs k >= 2")
    s = (k - 1).bit_length() - 1
    return s, k - 2**s


@lru_cache(maxsize=None)
def haar(k: int) -> PiecewiseConstant:
    """Haar function chi_k (chi_1 = 1)."""
    if k < 1:
        raise ValueError("Haar functions are indexed from k = 1")
    if k == 1:
        return PiecewiseConstant.constant(1.0)
    s, l = haar_index(k)
    h = 2.0 ** (s / 2)
    den = 2 ** (s + 1)
    bps = [Fraction(0), Fraction(2 * l - 2, den), Fraction(2 * l - 1, den), Fraction(2 * l, den), Fraction(1)]
    vals = [0.0, h, -h, 0.0]
    # drop empty end cells
    if bps[1] == 0:
        bps.pop(0)
        vals.pop(0)
    if bps[-2] == 1:
        bps.pop()
        vals.pop()
    return PiecewiseConstant(bps, vals)


def _rademacher_cells(m: int, depth: int) -> np.ndarray:
    """r_m on the uniform grid of 2**depth cells (depth >= m)."""
    c = np.arange(2**depth)
    return np.where((c >> (depth - m)) & 1, -1.0, 1.0)


@lru_cache(maxsize=None)
def walsh(k: int) -> PiecewiseConstant:
    """Walsh-Paley function w_k: product of r_{j+1} over the set bits j of k - 1."""
    if k < 1:
        raise ValueError("Walsh functions are indexed from k = 1")
    n = k - 1
    depth = n.bit_length()
    if depth == 0:
        return PiecewiseConstant.constant(1.0)
    vals = np.ones(2**depth)
    for j in range(depth):
        if n >> j & 1:
            vals *= _rademacher_cells(j + 1, depth)
    return PiecewiseConstant.from_grid(vals)


@lru_cache(maxsize=None)
def rademacher(k: int) -> PiecewiseConstant:
    """r_k(x) = sign sin(2**k * pi * x)."""
    if k < 1:
        raise ValueError("Rademacher functions are indexed from k = 1")
    if k > MAX_RADEMACHER:
        raise ValueError(f"r_k with k > {MAX_RADEMACHER} is not supported")
    return PiecewiseConstant.from_grid(_rademacher_cells(k, k))


def rademacher_signs(t, N: int) -> SignSequence:
    """(r_1(t), ..., r_N(t)) with r_k(t) = sign sin(2**k pi t), computed exactly.

    ``t`` may be a Fraction, int or "p/q" string; floats are taken at their
    exact binary value.
    """
    t = to_fraction(t)
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    out = []
    x = t
    for _ in range(N):
        x = 2 * x
        r = x % 2
        if r.denominator == 1:
            out.append(0)
        else:
            out.append(1 if r < 1 else -1)
    return SignSequence(out)


@dataclass(frozen=True)
class ClosedFormTrig:
    """sqrt(2) cos(2 pi n x) or sqrt(2) sin(2 pi n x)."""

    frequency: int
    phase: str

    def __post_init__(self):
        if self.frequency < 1:
            raise ValueError("frequency must be positive")
        if self.phase not in ("cos", "sin"):
            raise ValueError("phase must be 'cos' or 'sin'")

    amplitude = SQRT2

    def __call__(self, x):
        arg = TWO_PI * self.frequency * np.asarray(x, dtype=np.float64)
        return SQRT2 * (np.cos(arg) if self.phase == "cos" else np.sin(arg))

    def primitive(self, t):
        return TrigPolynomial.single(self, 1.0).primitive(t)

    def integral(self) -> float:
        return 0.0


def _reduced_angle(freq: int, t: Fraction) -> float:
    """2*pi*frac(freq*t), reduced exactly for rational t."""
    return TWO_PI * float((freq * t) % 1)


class TrigPolynomial:
    """Finite combination sum_j c_j * sqrt(2) {cos|sin}(2 pi m_j x) with closed-form primitives."""

    def __init__(self, freqs: Sequence[int], is_cos: Sequence[bool], coeffs: Sequence[float]):
        self.freqs = np.asarray(freqs, dtype=np.int64)
        self.is_cos = np.asarray(is_cos, dtype=bool)
        self.coeffs = np.asarray(coeffs, dtype=np.float64)

    @classmethod
    def single(cls, fn: ClosedFormTrig, c: float) -> "TrigPolynomial":
        return cls([fn.frequency], [fn.phase == "cos"], [c])

    @classmethod
    def from_terms(cls, terms: Sequence[tuple[float, ClosedFormTrig]]) -> "TrigPolynomial":
        terms = [(c, fn) for c, fn in terms if c != 0.0]
        return cls([fn.frequency for _, fn in terms], [fn.phase == "cos" for _, fn in terms],
                   [c for c, _ in terms])

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def _eval(self, t, kind: int):
        # kind 0: value, 1: primitive, 2: second primitive
        scalar = np.ndim(t) == 0 and not isinstance(t, np.ndarray)
        if isinstance(t, (Fraction, str)) or (scalar and isinstance(t, int)):
            tf = to_fraction(t)
            ang = np.array([_reduced_angle(int(m), tf) for m in self.freqs])
            tt = float(tf)
        else:
            tt = np.asarray(t, dtype=np.float64)
            ang = TWO_PI * np.mod(np.multiply.outer(self.freqs.astype(np.float64), tt), 1.0)
        w = TWO_PI * self.freqs.astype(np.float64)
        shape = (-1,) + (1,) * np.ndim(tt)
        w = w.reshape(shape)
        c = self.coeffs.reshape(shape)
        cs = self.is_cos.reshape(shape)
        if kind == 0:
            basis = np.where(cs, np.cos(ang), np.sin(ang))
        elif kind == 1:
            basis = np.where(cs, np.sin(ang) / w, (1.0 - np.cos(ang)) / w)
        else:
            basis = np.where(cs, (1.0 - np.cos(ang)) / w**2, (tt - np.sin(ang) / w) / w)
        out = SQRT2 * np.sum(c * basis, axis=0)
        return float(out) if np.ndim(out) == 0 else out

    def __call__(self, t):
        return self._eval(t, 0)

    def primitive(self, t):
        """Integral over [0, t]."""
        return self._eval(t, 1)

    def second_primitive(self, t):
        """Integral over [0, t] of the primitive."""
        return self._eval(t, 2)

    def l2_norm_sq(self) -> float:
        # terms with equal (frequency, phase) must be combined first
        acc: dict[tuple[int, bool], float] = {}
        for m, cs, c in zip(self.freqs.tolist(), self.is_cos.tolist(), self.coeffs.tolist()):
            acc[(m, cs)] = acc.get((m, cs), 0.0) + c
        return float(sum(v * v for v in acc.values()))

    def integral(self) -> float:
        return 0.0

    def sup_bound(self) -> float:
        return float(SQRT2 * np.sum(np.abs(self.coeffs)))


def trig(k: int) -> ClosedFormTrig:
    """phi_{2m-1} = sqrt2 cos(2 pi m x), phi_{2m} = sqrt2 sin(2 pi m x)."""
    if k < 1:
        raise ValueError("trigonometric functions are indexed from k = 1")
    m = (k + 1) // 2
    return ClosedFormTrig(m, "cos" if k % 2 else "sin")


def trig_inner(j: int, k: int) -> float:
    """<phi_j, phi_k> for the trigonometric system via closed-form integrals."""
    a, b = trig(j), trig(k)
    m, n = a.frequency, b.frequency
    # 2 f(mx) g(nx) expanded with product-to-sum; integrals of cos/sin(2 pi p x) over [0,1]
    def icos(p):
        return 1.0 if p == 0 else math.sin(TWO_PI * p) / (TWO_PI * p)

    def isin(p):
        return 0.0 if p == 0 else (1.0 - math.cos(TWO_PI * p)) / (TWO_PI * p)

    if a.phase == "cos" and b.phase == "cos":
        return icos(m - n) + icos(m + n)
    if a.phase == "sin" and b.phase == "sin":
        return icos(m - n) - icos(m + n)
    if a.phase == "sin":  # sin(m) cos(n)
        return isin(m + n) + isin(m - n)
    return isin(m + n) - isin(m - n)


@dataclass(frozen=True)
class OrthonormalSystem:
    """An indexed family k -> phi_k, k = 1..size (size None means unbounded).

    With ``mean_zero_only`` every phi_k whose integral is nonzero is left out:
    its slot k stays in place but contributes the zero function.
    """

    kind: str
    size: int | None = None
    mean_zero_only: bool = True
    functions: tuple = field(default=(), repr=False, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown system {self.kind!r}; expected one of {KINDS}")
        if self.kind == "custom":
            if not self.functions:
                raise ValueError("custom systems need a list of functions")
            object.__setattr__(self, "size", len(self.functions))
        if self.kind == "rademacher" and self.size is not None and self.size > MAX_RADEMACHER:
            raise ValueError(f"rademacher systems are limited to size {MAX_RADEMACHER}")

    @property
    def is_piecewise(self) -> bool:
        return self.kind != "trig"

    def _check(self, k: int) -> None:
        if k < 1 or (self.size is not None and k > self.size):
            raise ValueError(f"index {k} outside 1..{self.size}")

    def function(self, k: int) -> Union[PiecewiseConstant, ClosedFormTrig]:
        self._check(k)
        if self.kind == "haar":
            return haar(k)
        if self.kind == "walsh":
            return walsh(k)
        if self.kind == "rademacher":
            return rademacher(k)
        if self.kind == "trig":
            return trig(k)
        return self.functions[k - 1]

    def is_active(self, k: int) -> bool:
        """False when the slot is emptied by mean-zero filtering."""
        if not self.mean_zero_only:
            return True
        if self.kind in ("haar", "walsh"):
            return k >= 2
        if self.kind in ("trig", "rademacher"):
            return True
        return abs(self.functions[k - 1].integral()) <= 1e-12

    def slot(self, k: int):
        """phi_k, or None for an emptied slot."""
        fn = self.function(k)
        return fn if self.is_active(k) else None

    def with_mean_zero(self, flag: bool) -> "OrthonormalSystem":
        return OrthonormalSystem(self.kind, self.size, flag, self.functions, self.label)

    def spec(self) -> str:
        return self.label or self.kind


@lru_cache(maxsize=4096)
def _antiderivative_cached(F: PiecewiseConstant) -> PiecewiseLinear:
    return antiderivative(F)


def primitive(system: OrthonormalSystem, k: int, t) -> float:
    """Integral of phi_k over [0, t]."""
    fn = system.function(k)
    if isinstance(fn, ClosedFormTrig):
        return TrigPolynomial.single(fn, 1.0).primitive(to_fraction(t))
    return _antiderivative_cached(fn)(t)


def gram_matrix(functions: Sequence[PiecewiseConstant]) -> np.ndarray:
    """Matrix of inner products <F_i, F_j>."""
    from .piecewise import integrate_product

    L = math.lcm(*(F.denominator for F in functions))
    if L <= 2**20:
        V = np.array([F.cell_values(L) for F in functions])
        return (V @ V.T) / L
    n = len(functions)
    G = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g = _inner_general(functions[i], functions[j])
            G[i, j] = G[j, i] = g
    return G


def _inner_general(F: PiecewiseConstant, G: PiecewiseConstant) -> float:
    grid = sorted(set(F.breakpoints) | set(G.breakpoints))
    total = 0.0
    i = j = 0
    for a, b in zip(grid, grid[1:]):
        while F.breakpoints[i + 1] <= a:
            i += 1
        while G.breakpoints[j + 1] <= a:
            j += 1
        total += float(F.values[i]) * float(G.values[j]) * float(b - a)
    return total


def load_custom(path, mean_zero_only: bool = True) -> OrthonormalSystem:
    """Load a JSON array of step functions and verify orthonormality to 1e-10."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list) or not data:
        raise ValueError("custom system file must hold a non-empty JSON array of step functions")
    fns = tuple(PiecewiseConstant.from_dict(d) for d in data)
    return custom_system(fns, mean_zero_only, label=f"custom:{path}")


def custom_system(fns: Sequence[PiecewiseConstant], mean_zero_only: bool = True, label: str = "") -> OrthonormalSystem:
    fns = tuple(fns)
    G = gram_matrix(fns)
    resid = float(np.max(np.abs(G - np.eye(len(fns)))))
    if resid > ORTHO_TOL:
        raise ValueError(f"functions are not orthonormal (max Gram residual {resid:.3g} > {ORTHO_TOL})")
    return OrthonormalSystem("custom", len(fns), mean_zero_only, fns, label or "custom")


def parse_system(text: str, mean_zero_only: bool = True) -> OrthonormalSystem:
    """Parse "haar", "walsh", "trig", "rademacher" or "custom:PATH.json"."""
    kind, _, arg = text.partition(":")
    if kind == "custom":
        if not arg:
            raise ValueError("custom system needs a path: custom:PATH.json")
        return load_custom(arg, mean_zero_only)
    if kind not in KINDS or arg:
        raise ValueError(f"unknown system {text!r}; grammar: haar | walsh | trig | rademacher | custom:PATH.json")
    return OrthonormalSystem(kind, None, mean_zero_only)
