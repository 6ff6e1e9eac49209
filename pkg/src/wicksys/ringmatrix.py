"""Matrices over the truncated ring.

Entries are stored as one ``(rows, cols, n)`` complex array, ``n`` being the
number of admitted multi-indices, so a matrix product is a single batched
convolution. All reductions run in a fixed order and are reproducible.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from wicksys.errors import DimensionMismatch, NotInvertible, SpecMismatch
from wicksys.multiindex import TruncationSpec, index_table
from wicksys.ring import RingElement, _monomial_values

#: Relative smallest-singular-value threshold for inverting eval0(M).
SINGULAR_RTOL = 1e-10


@lru_cache(maxsize=64)
def _scatter(spec: TruncationSpec) -> sp.csr_matrix:
    # maps pair products onto target coefficients: out = terms @ S
    t = index_table(spec)
    n_pairs = t.pair_target.shape[0]
    return sp.csr_matrix(
        (np.ones(n_pairs), (np.arange(n_pairs), t.pair_target)), shape=(n_pairs, t.size)
    )


class RingMatrix:
    """Rectangular matrix with :class:`RingElement` entries sharing one truncation."""

    __slots__ = ("spec", "_data")
    __hash__ = None

    def __init__(self, spec: TruncationSpec, data: np.ndarray):
        data = np.asarray(data, dtype=np.complex128)
        n = index_table(spec).size
        if data.ndim != 3 or data.shape[2] != n or data.shape[0] < 1 or data.shape[1] < 1:
            raise DimensionMismatch(f"matrix data of shape {data.shape} does not fit {spec}")
        if data.flags.writeable:
            data = data.copy()
            data.flags.writeable = False
        self.spec = spec
        self._data = data

    # constructors -------------------------------------------------------

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence[RingElement]]) -> RingMatrix:
        rows = [list(r) for r in entries]
        if not rows or not rows[0] or any(len(r) != len(rows[0]) for r in rows):
            raise DimensionMismatch("entries must form a non-empty rectangular array")
        spec = rows[0][0].spec
        for r in rows:
            for e in r:
                if e.spec != spec:
                    raise SpecMismatch("all entries must share one truncation")
        data = np.array([[e.vector for e in r] for r in rows])
        return cls(spec, data)

    @classmethod
    def from_constant(cls, spec: TruncationSpec, values) -> RingMatrix:
        """Embed a complex matrix as constant ring entries."""
        values = np.atleast_2d(np.asarray(values, dtype=np.complex128))
        data = np.zeros(values.shape + (index_table(spec).size,), dtype=np.complex128)
        data[:, :, 0] = values
        return cls(spec, data)

    @classmethod
    def zeros(cls, spec: TruncationSpec, rows: int, cols: int) -> RingMatrix:
        return cls(spec, np.zeros((rows, cols, index_table(spec).size), dtype=np.complex128))

    @classmethod
    def identity(cls, spec: TruncationSpec, n: int) -> RingMatrix:
        return cls.from_constant(spec, np.eye(n))

    @classmethod
    def block(cls, blocks: Sequence[Sequence[RingMatrix]]) -> RingMatrix:
        spec = blocks[0][0].spec
        for row in blocks:
            for b in row:
                if b.spec != spec:
                    raise SpecMismatch("all blocks must share one truncation")
        try:
            data = np.concatenate(
                [np.concatenate([b._data for b in row], axis=1) for row in blocks], axis=0
            )
        except ValueError as exc:
            raise DimensionMismatch(f"incompatible block shapes: {exc}") from None
        return cls(spec, data)

    # views --------------------------------------------------------------

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape[:2]

    @property
    def data(self) -> np.ndarray:
        return self._data

    def __getitem__(self, key) -> RingElement | RingMatrix:
        i, j = key
        if isinstance(i, slice) or isinstance(j, slice):
            sub = self._data[i, j]
            if sub.ndim == 2:
                sub = sub[np.newaxis] if isinstance(i, (int, np.integer)) else sub[:, np.newaxis]
            return RingMatrix(self.spec, sub)
        return RingElement.from_vector(self.spec, self._data[i, j])

    def entries(self) -> list[list[RingElement]]:
        return [[self[i, j] for j in range(self.cols)] for i in range(self.rows)]

    def take(self, rows: Sequence[int], cols: Sequence[int]) -> RingMatrix:
        return RingMatrix(self.spec, self._data[np.ix_(list(rows), list(cols))])

    def eval0(self) -> np.ndarray:
        """Entrywise constant terms, a complex matrix of the same shape."""
        return np.array(self._data[:, :, 0])

    def evaluate(self, z: Sequence[complex]) -> np.ndarray:
        return self._data @ _monomial_values(self.spec, z)

    def transpose(self) -> RingMatrix:
        return RingMatrix(self.spec, self._data.transpose(1, 0, 2))

    @property
    def T(self) -> RingMatrix:
        return self.transpose()

    def is_zero(self) -> bool:
        return not self._data.any()

    def max_abs(self) -> float:
        return float(np.abs(self._data).max(initial=0.0))

    def allclose(self, other: RingMatrix, atol: float = 1e-12) -> bool:
        self._check(other)
        return self.shape == other.shape and bool(np.allclose(self._data, other._data, rtol=0, atol=atol))

    def __eq__(self, other):
        if not isinstance(other, RingMatrix):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self._data, other._data)

    # arithmetic ---------------------------------------------------------

    def _check(self, other: RingMatrix):
        if not isinstance(other, RingMatrix):
            raise TypeError(f"expected RingMatrix, got {type(other).__name__}")
        if other.spec != self.spec:
            raise SpecMismatch(f"truncations differ: {self.spec} vs {other.spec}")

    def __add__(self, other: RingMatrix) -> RingMatrix:
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot add {self.shape} and {other.shape}")
        return RingMatrix(self.spec, self._data + other._data)

    def __sub__(self, other: RingMatrix) -> RingMatrix:
        return self + (-other)

    def __neg__(self) -> RingMatrix:
        return RingMatrix(self.spec, -self._data)

    def scale(self, c: complex) -> RingMatrix:
        return RingMatrix(self.spec, self._data * complex(c))

    def scale_by(self, r: RingElement) -> RingMatrix:
        """Multiply every entry by the ring element ``r``."""
        if r.spec != self.spec:
            raise SpecMismatch("scalar and matrix truncations differ")
        one = RingMatrix(self.spec, r.vector.reshape(1, 1, -1))
        t = index_table(self.spec)
        terms = self._data[:, :, t.pair_left] * one._data[:, :, t.pair_right]
        return RingMatrix(self.spec, _reduce(self.spec, terms))

    def __matmul__(self, other: RingMatrix) -> RingMatrix:
        return mat_mul(self, other)

    def __repr__(self) -> str:
        rows = "; ".join(", ".join(str(self[i, j]) for j in range(self.cols)) for i in range(self.rows))
        return f"RingMatrix([{rows}])"


def _reduce(spec: TruncationSpec, terms: np.ndarray) -> np.ndarray:
    shape = terms.shape[:-1]
    flat = terms.reshape(-1, terms.shape[-1])
    out = flat @ _scatter(spec)
    return np.asarray(out).reshape(shape + (index_table(spec).size,))


def mat_mul(x: RingMatrix, y: RingMatrix) -> RingMatrix:
    """Matrix product with Wick (truncated Cauchy) entry products."""
    x._check(y)
    if x.cols != y.rows:
        raise DimensionMismatch(f"cannot multiply {x.shape} by {y.shape}")
    t = index_table(x.spec)
    left = x._data[:, :, t.pair_left]
    right = y._data[:, :, t.pair_right]
    terms = np.einsum("ijp,jkp->ikp", left, right)
    return RingMatrix(x.spec, _reduce(x.spec, terms))


def mat_inverse(m: RingMatrix, rtol: float = SINGULAR_RTOL) -> RingMatrix:
    """Inverse of a square ring matrix whose constant part is invertible.

    With M = M0 + G, M0 = eval0(M), the inverse is
    (sum_{n<=d} (-M0^-1 G)^n) M0^-1; the sum is finite because G vanishes at 0.
    """
    if m.rows != m.cols:
        raise DimensionMismatch(f"cannot invert a {m.shape} matrix")
    m0 = m.eval0()
    sv = np.linalg.svd(m0, compute_uv=False)
    if sv[-1] <= rtol * sv[0] or sv[0] == 0:
        raise NotInvertible(
            f"constant part is singular (singular values {sv[0]:.3g} .. {sv[-1]:.3g})"
        )
    spec = m.spec
    m0_inv = RingMatrix.from_constant(spec, np.linalg.inv(m0))
    g = m - RingMatrix.from_constant(spec, m0)
    x = -(m0_inv @ g)
    eye = RingMatrix.identity(spec, m.rows)
    s = eye
    for _ in range(spec.max_degree):
        s = eye + x @ s
    return s @ m0_inv


def trace(a: RingMatrix) -> RingElement:
    if a.rows != a.cols:
        raise DimensionMismatch("trace of a non-square matrix")
    return RingElement.from_vector(a.spec, np.einsum("iip->p", a.data))


def char_poly(a: RingMatrix) -> list[RingElement]:
    """Coefficients p_0..p_N of det(lambda I - A) via Faddeev-LeVerrier.

    The recursion only divides by the integers 1..N, which is legitimate in
    any algebra over the rationals.
    """
    if a.rows != a.cols:
        raise DimensionMismatch("characteristic polynomial of a non-square matrix")
    n = a.rows
    spec = a.spec
    eye = RingMatrix.identity(spec, n)
    coeffs = [RingElement.zero(spec)] * (n + 1)
    coeffs[n] = RingElement.one(spec)
    mk = RingMatrix.zeros(spec, n, n)
    for k in range(1, n + 1):
        mk = a @ mk + eye.scale_by(coeffs[n - k + 1])
        coeffs[n - k] = trace(a @ mk).scale(-1.0 / k)
    return coeffs


def apply_poly(p: Sequence[RingElement | complex], a: RingMatrix) -> RingMatrix:
    """Horner evaluation of sum p_i A^i."""
    if a.rows != a.cols:
        raise DimensionMismatch("polynomial of a non-square matrix")
    eye = RingMatrix.identity(a.spec, a.rows)

    def as_elem(c):
        return c if isinstance(c, RingElement) else RingElement.constant(a.spec, c)

    if not p:
        return RingMatrix.zeros(a.spec, a.rows, a.cols)
    out = eye.scale_by(as_elem(p[-1]))
    for c in reversed(p[:-1]):
        out = out @ a + eye.scale_by(as_elem(c))
    return out


def _cofactor_det(a: RingMatrix) -> RingElement:
    n = a.rows
    if n == 1:
        return a[0, 0]
    if n == 2:
        return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    out = RingElement.zero(a.spec)
    rest = list(range(1, n))
    for j in range(n):
        entry = a[0, j]
        if entry.is_zero():
            continue
        minor = _cofactor_det(a.take(rest, [c for c in range(n) if c != j]))
        term = entry * minor
        out = out + term if j % 2 == 0 else out - term
    return out


def det(a: RingMatrix) -> RingElement:
    """Determinant: cofactor expansion up to 4x4, (-1)^N p_0 beyond."""
    if a.rows != a.cols:
        raise DimensionMismatch("determinant of a non-square matrix")
    if a.rows <= 4:
        return _cofactor_det(a)
    p0 = char_poly(a)[0]
    return p0 if a.rows % 2 == 0 else -p0


def maximal_minors(a: RingMatrix) -> Iterator[tuple[tuple[int, ...], tuple[int, ...], RingElement]]:
    """Yield ``(rows, cols, det)`` for every k x k minor, k = min(shape).

    Index sets run in lexicographic order, rows outermost.
    """
    k = min(a.shape)
    for rows in itertools.combinations(range(a.rows), k):
        for cols in itertools.combinations(range(a.cols), k):
            yield rows, cols, det(a.take(rows, cols))


def mat_pow(a: RingMatrix, n: int) -> RingMatrix:
    out = RingMatrix.identity(a.spec, a.rows)
    for _ in range(n):
        out = out @ a
    return out
