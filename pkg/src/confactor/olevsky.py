"""Finite orthonormal families with prescribed Fourier coefficients against a fixed f0.

Works in the M-dimensional space of step functions on a uniform grid, using
the orthonormal cell basis e_j = sqrt(M) * 1_{cell j}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import zeta

from .factors import fourier_coefficient
from .ons import OrthonormalSystem, gram_matrix
from .piecewise import LipschitzFunction, PiecewiseConstant, PiecewiseLinear

__all__ = ["PrescribedSystem", "InfeasibleError", "construct", "prescribed_demo", "PrescribedReport"]


class InfeasibleError(ValueError):
    """Raised when b * ||a||_2 exceeds ||f0||_2."""


@dataclass
class PrescribedSystem:
    N: int
    targets: np.ndarray
    b: float
    M: int
    coords: np.ndarray = field(repr=False)
    system: OrthonormalSystem = field(repr=False)

    @property
    def functions(self) -> tuple[PiecewiseConstant, ...]:
        return self.system.functions

    def gram_residual(self) -> float:
        G = self.coords @ self.coords.T
        return float(np.max(np.abs(G - np.eye(self.N))))

    def step_gram_residual(self) -> float:
        """Same check on the step functions themselves (cell values, not coordinates)."""
        G = gram_matrix(self.functions)
        return float(np.max(np.abs(G - np.eye(self.N))))


def _householder_complement(u: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of the orthogonal complement of unit vector u."""
    M = len(u)
    e1 = np.zeros(M)
    e1[0] = 1.0
    sgn = 1.0 if u[0] >= 0 else -1.0
    v = u + sgn * e1
    H = np.eye(M) - 2.0 * np.outer(v, v) / float(v @ v)
    # H maps u to -sgn e1, so the remaining columns span u's complement
    return H[:, 1:]


def construct(a: Sequence[float], f0: PiecewiseConstant, b: float, M: int | None = None) -> PrescribedSystem:
    """Orthonormal step functions phi_1..phi_N with <f0, phi_n> = b * a_n.

    phi_n = beta_n u + sum_j C[n, j] e_j where u = f0/||f0||, (e_j) spans
    u's complement, beta = b a / ||f0|| and C is the symmetric square root of
    I - beta beta^T (closed form for a rank-one update).
    """
    a = np.asarray(a, dtype=np.float64)
    N = len(a)
    if N < 1 or np.any(a <= 0):
        raise ValueError("targets must be a non-empty list of positive numbers")
    if b < 0:
        raise ValueError("b must be nonnegative")
    M = N + 1 if M is None else int(M)
    if M < N + 1:
        raise ValueError("grid needs at least N + 1 cells")
    try:
        cells = f0.cell_values(M)
    except ValueError:
        raise ValueError(f"f0 is not a step function on the uniform grid of {M} cells") from None
    f0_coords = cells / math.sqrt(M)
    norm_f0 = float(np.linalg.norm(f0_coords))
    if norm_f0 == 0:
        raise ValueError("f0 must be nonzero")
    norm_a = float(np.linalg.norm(a))
    beta = b * a / norm_f0
    beta_sq = float(beta @ beta)
    if beta_sq > 1.0 + 1e-15:
        raise InfeasibleError(
            f"b = {b!r} is infeasible: need b <= ||f0||_2 / ||a||_2 = {norm_f0 / norm_a!r}"
        )
    u = f0_coords / norm_f0
    E = _householder_complement(u)[:, :N]
    root = math.sqrt(max(0.0, 1.0 - beta_sq))
    C = np.eye(N)
    if beta_sq > 0:
        bhat = beta / math.sqrt(beta_sq)
        C += (root - 1.0) * np.outer(bhat, bhat)
    coords = np.outer(beta, u) + C @ E.T
    fns = tuple(PiecewiseConstant.from_grid(math.sqrt(M) * row) for row in coords)
    system = OrthonormalSystem("custom", N, False, fns, label="olevsky")
    return PrescribedSystem(N, a, float(b), M, coords, system)


@dataclass
class PrescribedReport:
    N: int
    gamma: float
    exponent: float
    b: float
    coefficients: np.ndarray = field(repr=False)
    partial_sums: np.ndarray = field(repr=False)
    prediction: np.ndarray = field(repr=False)
    max_deviation: float = 0.0
    coefficient_fidelity: float = 0.0
    gram_residual: float = 0.0
    squared_sum: float = 0.0
    squared_bound: float = 0.0

    def rows(self) -> list[dict]:
        return [
            {"m": m, "S_m": float(s), "bH_m": float(p), "deviation": float(abs(s - p))}
            for m, (s, p) in enumerate(zip(self.partial_sums, self.prediction), start=1)
        ]

    def summary(self) -> dict:
        return {
            "N": self.N, "gamma": self.gamma, "exponent": self.exponent, "b": self.b,
            "max_deviation": self.max_deviation,
            "coefficient_fidelity": self.coefficient_fidelity,
            "gram_residual": self.gram_residual,
            "squared_sum": self.squared_sum,
            "squared_bound": self.squared_bound,
        }


def prescribed_demo(N: int, gamma: float = 1 / 3, exponent: float = 4 / 3, b_factor: float = 0.9,
                   b: float | None = None) -> PrescribedReport:
    """Build the system for f0 = 1, a_n = n^-exponent, and track sum n^gamma |c_n|.

    With gamma - exponent = -1 the partial sums equal b * H_m (harmonic
    numbers).  ``b`` defaults to b_factor * ||f0|| / ||a||.
    """
    if not gamma < 0.5:
        raise ValueError("gamma must be below 1/2")
    n = np.arange(1, N + 1, dtype=np.float64)
    a = n**-exponent
    f0 = PiecewiseConstant.constant(1.0)
    if b is None:
        b = b_factor * 1.0 / float(np.linalg.norm(a))
    ps = construct(a, f0, b)
    one = LipschitzFunction(PiecewiseLinear.constant(1.0))
    c = np.array([fourier_coefficient(one, ps.system, k) for k in range(1, N + 1)])
    S = np.cumsum(n**gamma * np.abs(c))
    prediction = b * np.cumsum(n ** (gamma - exponent))
    return PrescribedReport(
        N=N, gamma=gamma, exponent=exponent, b=b,
        coefficients=c, partial_sums=S, prediction=prediction,
        max_deviation=float(np.max(np.abs(S - prediction))),
        coefficient_fidelity=float(np.max(np.abs(c - b * a))),
        gram_residual=ps.gram_residual(),
        squared_sum=float(np.sum(c * c)),
        squared_bound=float(b * b * zeta(2 * exponent)),
    )
