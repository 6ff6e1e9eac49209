"""Multi-indices, the (2N)^alpha weight, and bounded graded-lex enumeration.

A multi-index is a finitely supported sequence of non-negative integers.
Positions are 1-based to match the variable names z_1, z_2, ...
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from wicksys.errors import ResourceLimit

#: Default cap on the number of multi-indices a single enumeration may produce.
MAX_ENUMERATION = 2_000_000


@dataclass(frozen=True, slots=True)
class MultiIndex:
    """Sparse canonical multi-index.

    ``pairs`` holds ``(position, exponent)`` tuples with strictly increasing
    positions >= 1 and exponents >= 1, so equal multi-indices have equal
    representations.
    """

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        prev = 0
        for pos, exp in self.pairs:
            if pos <= prev:
                raise ValueError(f"positions must be strictly increasing and >= 1: {self.pairs}")
            if exp < 1:
                raise ValueError(f"stored exponents must be >= 1: {self.pairs}")
            prev = pos

    @classmethod
    def from_dense(cls, exponents: Iterable[int]) -> MultiIndex:
        pairs = []
        for pos, e in enumerate(exponents, start=1):
            e = int(e)
            if e < 0:
                raise ValueError("exponents must be non-negative")
            if e:
                pairs.append((pos, e))
        return cls(tuple(pairs))

    @classmethod
    def unit(cls, position: int, exponent: int = 1) -> MultiIndex:
        return cls(((position, exponent),)) if exponent else cls()

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.pairs)

    @property
    def support_max(self) -> int:
        """Largest position carrying a nonzero exponent (0 for the zero index)."""
        return self.pairs[-1][0] if self.pairs else 0

    def __getitem__(self, position: int) -> int:
        for pos, e in self.pairs:
            if pos == position:
                return e
        return 0

    def to_dense(self, num_vars: int) -> list[int]:
        if self.support_max > num_vars:
            raise ValueError(f"{self} does not fit in {num_vars} variables")
        out = [0] * num_vars
        for pos, e in self.pairs:
            out[pos - 1] = e
        return out

    def __add__(self, other: MultiIndex) -> MultiIndex:
        return add(self, other)

    def __repr__(self) -> str:
        if not self.pairs:
            return "MultiIndex(0)"
        return "MultiIndex(" + ", ".join(f"z{p}^{e}" for p, e in self.pairs) + ")"


ZERO = MultiIndex()


def add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    """Componentwise sum (the Wick rule H_a * H_b = H_{a+b})."""
    merged = dict(a.pairs)
    for pos, e in b.pairs:
        merged[pos] = merged.get(pos, 0) + e
    return MultiIndex(tuple(sorted(merged.items())))


def factorial(a: MultiIndex) -> int:
    """Exact product of the component factorials.

    Python integers are unbounded, so the result never wraps.
    """
    out = 1
    for _, e in a.pairs:
        out *= math.factorial(e)
    return out


def weight2n(a: MultiIndex, exponent: float | Fraction = 1) -> float:
    """Return prod_j (2j)^(exponent * a_j).

    With ``exponent=1`` this is the weight (2N)^a. Overflow gives ``inf`` and
    underflow gives ``0.0``; neither raises.
    """
    s = float(exponent)
    out = 1.0
    for pos, e in a.pairs:
        try:
            out *= float(2 * pos) ** (s * e)
        except OverflowError:
            out = math.inf
    return out


@dataclass(frozen=True, slots=True)
class TruncationSpec:
    """Finite model of the index set: variables z_1..z_m, total degree <= d."""

    num_vars: int
    max_degree: int

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("num_vars must be positive")
        if self.max_degree < 0:
            raise ValueError("max_degree must be non-negative")

    @property
    def size(self) -> int:
        return math.comb(self.num_vars + self.max_degree, self.max_degree)

    def admits(self, a: MultiIndex) -> bool:
        return a.support_max <= self.num_vars and a.degree <= self.max_degree


def _compositions(total: int, parts: int):
    # graded-lex within one degree: first coordinate largest first
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_dense(spec: TruncationSpec, cap: int | None = None) -> list[tuple[int, ...]]:
    """Dense exponent tuples in graded lexicographic order."""
    cap = MAX_ENUMERATION if cap is None else cap
    if spec.size > cap:
        raise ResourceLimit(
            f"enumeration of {spec.size} multi-indices exceeds the cap {cap}"
        )
    out = []
    for deg in range(spec.max_degree + 1):
        out.extend(_compositions(deg, spec.num_vars))
    return out


def enumerate_indices(spec: TruncationSpec, cap: int | None = None) -> list[MultiIndex]:
    """All multi-indices admitted by ``spec`` in graded lexicographic order.

    >>> [m.to_dense(2) for m in enumerate_indices(TruncationSpec(2, 1))]
    [[0, 0], [1, 0], [0, 1]]
    """
    return [MultiIndex.from_dense(t) for t in enumerate_dense(spec, cap)]


class IndexTable:
    """Per-truncation lookup tables used by the dense ring arithmetic.

    Attributes
    ----------
    exponents : (n, m) int array
        Dense exponents of every admitted index, graded-lex order.
    degrees : (n,) int array
    log_weights : (n,) float array
        ``log((2N)^alpha)`` for every index.
    pair_left, pair_right, pair_target : int arrays
        All ordered pairs ``(i, j)`` with ``deg_i + deg_j <= d`` and the
        position of ``alpha_i + alpha_j``. Pairs are sorted by ``(i, j)`` so
        every reduction over them has a fixed order.
    """

    def __init__(self, spec: TruncationSpec):
        self.spec = spec
        dense = enumerate_dense(spec)
        self.indices = [MultiIndex.from_dense(t) for t in dense]
        self.position = {a: i for i, a in enumerate(self.indices)}
        self.size = len(dense)
        m, d = spec.num_vars, spec.max_degree
        self.exponents = np.array(dense, dtype=np.int64).reshape(self.size, m)
        self.degrees = self.exponents.sum(axis=1)
        log2j = np.log(2.0 * np.arange(1, m + 1))
        self.log_weights = self.exponents @ log2j
        # indices are sorted by degree, so partners of i form a prefix
        upto = np.searchsorted(self.degrees, np.arange(d + 1), side="right")
        lefts, rights = [], []
        for i in range(self.size):
            n_partners = upto[d - self.degrees[i]]
            lefts.append(np.full(n_partners, i, dtype=np.int64))
            rights.append(np.arange(n_partners, dtype=np.int64))
        self.pair_left = np.concatenate(lefts)
        self.pair_right = np.concatenate(rights)
        self.pair_target = self._locate(
            self.exponents[self.pair_left] + self.exponents[self.pair_right]
        )

    def _locate(self, rows: np.ndarray) -> np.ndarray:
        m, d = self.spec.num_vars, self.spec.max_degree
        if (d + 1) ** m < 2**62:
            radix = (d + 1) ** np.arange(m, dtype=np.int64)
            keys = self.exponents @ radix
            order = np.argsort(keys)
            found = np.searchsorted(keys[order], rows @ radix)
            return order[found]
        return np.array([self.position[MultiIndex.from_dense(r)] for r in rows], dtype=np.int64)

    def lookup(self, a: MultiIndex) -> int:
        return self.position[a]


@lru_cache(maxsize=64)
def index_table(spec: TruncationSpec) -> IndexTable:
    return IndexTable(spec)

