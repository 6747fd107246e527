"""Worst-case sign search: maximize D_N(eps) over the sign cube, and scans over N."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .factors import GrowthFit, PrimitiveMatrix, fit_growth
from .ons import OrthonormalSystem
from .sequences import SignSequence, WeightSequence

__all__ = [
    "SearchResult",
    "GrowthScan",
    "exhaustive_max",
    "enumerate_max",
    "greedy_ascent",
    "best_signs",
    "growth_scan",
    "default_strategy",
    "MAX_EXHAUSTIVE",
]

MAX_EXHAUSTIVE = 24
AUTO_EXHAUSTIVE = 20
_CHUNK = 1 << 15


@dataclass
class SearchResult:
    best_signs: SignSequence
    best_value: float
    strategy: str
    evaluations: int
    seed: int | None = None
    N: int = 0
    history: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "best_value": self.best_value,
            "signs": list(self.best_signs),
            "evaluations": self.evaluations,
            "seed": self.seed,
            "strategy": self.strategy,
        }


@dataclass
class GrowthScan:
    N_grid: list[int]
    values: list[float]
    fit: GrowthFit
    results: list[SearchResult] = field(default_factory=list, repr=False)

    def to_rows(self) -> list[dict]:
        return [
            {"N": r.N, "best_value": r.best_value, "strategy": r.strategy,
             "evaluations": r.evaluations, "seed": r.seed}
            for r in self.results
        ]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CONFACTOR_THREADS", "1")))
    except ValueError:
        return 1


def _lex_smallest(rows: np.ndarray) -> np.ndarray:
    order = np.lexsort(rows.T[::-1])
    return rows[order[0]]


def _matrix(system, weights, N, matrix):
    if matrix is not None:
        if matrix.N != N:
            raise ValueError("primitive matrix built for a different N")
        return matrix
    return PrimitiveMatrix(system, weights, N)


def enumerate_max(matrix: PrimitiveMatrix, levels: Sequence[int] = (-1, 1),
                  fix_first: bool = False) -> tuple[float, np.ndarray, int]:
    """Brute-force max of D_N over levels**N (optionally with eps_1 = +1).

    Returns (value, lexicographically smallest maximizer, evaluations).
    """
    N = matrix.N
    levels = np.asarray(sorted(levels), dtype=np.float64)
    free = N - 1 if fix_first else N
    total = len(levels) ** free
    best_val = -np.inf
    best_rows: list[np.ndarray] = []
    base = len(levels)
    powers = base ** np.arange(free - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // powers) % base if free else np.zeros((len(idx), 0), dtype=np.int64)
        eps = levels[digits]
        if fix_first:
            eps = np.concatenate([np.ones((len(idx), 1)), eps], axis=1)
        vals = np.atleast_1d(matrix.value(eps))
        m = float(vals.max())
        if m > best_val:
            best_val = m
            best_rows = [eps[vals == m]]
        elif m == best_val:
            best_rows.append(eps[vals == m])
    best = _lex_smallest(np.concatenate(best_rows))
    return best_val, best, total


def exhaustive_max(system: OrthonormalSystem, weights: WeightSequence, N: int,
                   matrix: PrimitiveMatrix | None = None, fix_first: bool = True) -> SearchResult:
    """Global max of D_N over {-1, +1}^N.

    D_N is convex in eps, so this is also the max over {-1, 0, 1}^N.  With
    ``fix_first`` only eps_1 = +1 is enumerated (D_N(-eps) = D_N(eps)).
    """
    if N > MAX_EXHAUSTIVE:
        raise ValueError(f"exhaustive search needs N <= {MAX_EXHAUSTIVE}, got {N}")
    if N < 1:
        raise ValueError("N must be positive")
    B = _matrix(system, weights, N, matrix)
    val, best, evals = enumerate_max(B, (-1, 1), fix_first=fix_first)
    return SearchResult(SignSequence(best.astype(int).tolist()), val, "exhaustive", evals, None, N)


def _ascend(B: PrimitiveMatrix, eps: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, int, list[float]]:
    """Single-flip coordinate ascent from eps until no flip improves Sum|S|."""
    S = B.column_sums(eps)
    Bm = B.B
    spans = B.spans
    evals = 1
    history = [float(np.sum(np.abs(S))) / B.N]
    for _ in range(max_sweeps):
        improved = False
        for k in range(B.N):
            lo, hi = spans[k]
            if hi <= lo:
                continue
            seg = S[lo:hi]
            new = seg - 2.0 * eps[k] * Bm[k, lo:hi]
            old_abs = np.abs(seg).sum()
            new_abs = np.abs(new).sum()
            evals += 1
            if new_abs - old_abs > 1e-13 * (old_abs + new_abs):
                S[lo:hi] = new
                eps[k] = -eps[k]
                improved = True
        # resync to kill drift from incremental updates
        S = B.column_sums(eps)
        history.append(float(np.sum(np.abs(S))) / B.N)
        if not improved:
            break
    return eps, evals, history


def greedy_ascent(system: OrthonormalSystem, weights: WeightSequence, N: int, seed: int = 0,
                  restarts: int = 1, matrix: PrimitiveMatrix | None = None,
                  max_sweeps: int | None = None) -> SearchResult:
    """Coordinate ascent from seeded random +-1 starts; best over ``restarts`` runs.

    Restarts are independent (spawned from one SeedSequence) and may run on
    CONFACTOR_THREADS threads; ties between restarts go to the
    lexicographically smallest sign vector.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if restarts < 1:
        raise ValueError("restarts must be positive")
    B = _matrix(system, weights, N, matrix)
    if N == 1:
        return SearchResult(SignSequence([1]), 0.0, "greedy", 1, seed, N, [0.0])
    sweeps = max_sweeps if max_sweeps is not None else 10 * N + 10
    children = np.random.SeedSequence(seed).spawn(restarts)

    def run(ss):
        rng = np.random.default_rng(ss)
        eps0 = rng.choice(np.array([-1.0, 1.0]), size=N)
        return _ascend(B, eps0, sweeps)

    threads = min(_threads(), restarts)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            outcomes = list(pool.map(run, children))
    else:
        outcomes = [run(ss) for ss in children]

    evaluations = sum(o[1] for o in outcomes)
    finals = np.array([o[0] for o in outcomes])
    vals = np.atleast_1d(B.value(finals))
    top = float(vals.max())
    best = _lex_smallest(finals[vals == top])
    history = outcomes[int(np.flatnonzero(vals == top)[0])][2]
    return SearchResult(SignSequence(best.astype(int).tolist()), top, "greedy", evaluations, seed, N, history)


def default_strategy(N: int) -> tuple[str, int]:
    """(strategy, restarts): exhaustive up to N = 20, else greedy with max(32, N/4) restarts."""
    if N <= AUTO_EXHAUSTIVE:
        return "exhaustive", 0
    return "greedy", max(32, N // 4)


def best_signs(system: OrthonormalSystem, weights: WeightSequence, N: int, strategy: str = "auto",
               restarts: int | None = None, seed: int = 0,
               matrix: PrimitiveMatrix | None = None) -> SearchResult:
    """Dispatch to the requested strategy ("auto", "exhaustive" or "greedy")."""
    if strategy == "auto":
        strategy, auto_restarts = default_strategy(N)
        if restarts is None:
            restarts = auto_restarts
    if strategy == "exhaustive":
        return exhaustive_max(system, weights, N, matrix)
    if strategy == "greedy":
        if restarts is None:
            restarts = default_strategy(max(N, AUTO_EXHAUSTIVE + 1))[1]
        return greedy_ascent(system, weights, N, seed, restarts, matrix)
    raise ValueError(f"unknown strategy {strategy!r}; expected auto, exhaustive or greedy")


def growth_scan(system: OrthonormalSystem, weights: WeightSequence, N_grid: Sequence[int],
                strategy: str = "auto", restarts: int | None = None, seed: int = 0,
                **fit_options) -> GrowthScan:
    """Best D_N for each N in an ascending grid plus a growth classification."""
    grid = [int(n) for n in N_grid]
    if not grid:
        raise ValueError("empty N grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("N grid must be strictly ascending")
    results = [best_signs(system, weights, N, strategy, restarts, seed) for N in grid]
    values = [r.best_value for r in results]
    return GrowthScan(grid, values, fit_growth(grid, values, **fit_options), results)


def parse_grid(text: str) -> list[int]:
    """"a:b:xk" (geometric, ratio k) or "a:b:+k" (arithmetic) or "n1,n2,..."."""
    if ":" not in text:
        out = [int(x) for x in text.split(",") if x.strip()]
        if not out or min(out) < 1:
            raise ValueError(f"bad grid {text!r}; need positive integers n1,n2,...")
        return out
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"bad grid {text!r}; grammar: a:b:xk | a:b:+k | n1,n2,...")
    a, b, step = int(parts[0]), int(parts[1]), parts[2]
    if a < 1 or b < a:
        raise ValueError("grid needs 1 <= a <= b")
    out = []
    if step.startswith("x"):
        r = int(step[1:])
        if r < 2:
            raise ValueError("geometric ratio must be at least 2")
        n = a
        while n <= b:
            out.append(n)
            n *= r
    elif step.startswith("+"):
        out = list(range(a, b + 1, int(step[1:])))
    else:
        raise ValueError(f"bad grid step {step!r}; use xK or +K")
    return out

