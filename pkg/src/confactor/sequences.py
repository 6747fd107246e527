"""Weight sequences (d_k) and sign sequences in {-1, 0, 1}."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = ["WeightSequence", "SignSequence", "parse_weights"]

FAMILIES = ("const", "logpow", "power", "custom")


@dataclass(frozen=True)
class WeightSequence:
    """A bounded positive sequence d_1, d_2, ...

    ``logpow(eps)`` is d_k = 1 / log2(k + 1)**(1 + eps); base 2 makes
    d_k <= 1/s**(1 + eps) on the Haar block 2**s <= k < 2**(s + 1).
    """

    family: str
    param: float = 1.0
    table: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown weight family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "const" and not self.param > 0:
            raise ValueError("weights must be positive: const:c needs c > 0")
        if self.family == "logpow" and not self.param > 0:
            raise ValueError("logpow:eps needs eps > 0")
        if self.family == "power" and self.param > 0:
            raise ValueError("power:gamma needs gamma <= 0 so that the weights stay bounded")
        if self.family == "custom":
            if not self.table:
                raise ValueError("custom weights need a non-empty table")
            if not all(math.isfinite(x) and x > 0 for x in self.table):
                raise ValueError("custom weights must be finite and positive")
        if not math.isfinite(self.param):
            raise ValueError("weight parameter must be finite")

    @classmethod
    def const(cls, c: float = 1.0) -> "WeightSequence":
        return cls("const", float(c))

    @classmethod
    def logpow(cls, eps: float = 1.0) -> "WeightSequence":
        return cls("logpow", float(eps))

    @classmethod
    def power(cls, gamma: float) -> "WeightSequence":
        return cls("power", float(gamma))

    @classmethod
    def custom(cls, table: Iterable[float]) -> "WeightSequence":
        return cls("custom", 0.0, tuple(float(x) for x in table))

    def __call__(self, k: int) -> float:
        if k < 1:
            raise ValueError("weights are indexed from k = 1")
        if self.family == "const":
            return self.param
        if self.family == "logpow":
            return 1.0 / math.log2(k + 1) ** (1.0 + self.param)
        if self.family == "power":
            return float(k) ** self.param
        if k > len(self.table):
            raise ValueError(f"custom weight table has {len(self.table)} entries, asked for k={k}")
        return self.table[k - 1]

    def array(self, n: int) -> np.ndarray:
        """d_1..d_n as a float array."""
        return np.array([self(k) for k in range(1, n + 1)])

    def spec(self) -> str:
        if self.family == "custom":
            return "custom:" + json.dumps(list(self.table))
        return f"{self.family}:{self.param!r}"


def parse_weights(text: str) -> WeightSequence:
    """Parse "const:1.0", "logpow:1.0", "power:-0.1667" or "custom:path.json"."""
    family, sep, arg = text.partition(":")
    if not sep:
        raise ValueError(
            f"bad weight spec {text!r}; grammar: const:C | logpow:EPS | power:GAMMA | custom:PATH.json"
        )
    if family == "custom":
        arg = arg.strip()
        if arg.startswith("["):
            table = json.loads(arg)
        else:
            table = json.loads(Path(arg).read_text())
        if not isinstance(table, list):
            raise ValueError("custom weight file must hold a JSON array of positive numbers")
        return WeightSequence.custom(table)
    if family not in FAMILIES:
        raise ValueError(
            f"unknown weight family {family!r}; grammar: const:C | logpow:EPS | power:GAMMA | custom:PATH.json"
        )
    try:
        value = float(arg)
    except ValueError:
        raise ValueError(f"bad numeric parameter in weight spec {text!r}") from None
    return WeightSequence(family, value)


class SignSequence(Sequence[int]):
    """epsilon_1..epsilon_N with entries in {-1, 0, 1}."""

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[int]):
        vals = []
        for e in entries:
            if e not in (-1, 0, 1):
                raise ValueError(f"sign entries must be -1, 0 or 1, got {e!r}")
            vals.append(int(e))
        self.entries: tuple[int, ...] = tuple(vals)

    @classmethod
    def ones(cls, n: int) -> "SignSequence":
        return cls([1] * n)

    @classmethod
    def zeros(cls, n: int) -> "SignSequence":
        return cls([0] * n)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, allow_zero: bool = False) -> "SignSequence":
        choices = np.array([-1, 0, 1] if allow_zero else [-1, 1])
        return cls(rng.choice(choices, size=n).tolist())

    def __getitem__(self, i):
        return self.entries[i]

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        if isinstance(other, SignSequence):
            return self.entries == other.entries
        if isinstance(other, (list, tuple)):
            return list(self.entries) == list(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.entries)

    def __neg__(self) -> "SignSequence":
        return SignSequence(-e for e in self.entries)

    def __repr__(self) -> str:
        return f"SignSequence({list(self.entries)})"

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.float64)
