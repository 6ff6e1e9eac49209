"""Truncated arithmetic in the ring of Hermite-transformed Kondratiev series.

An element is a power series in z_1..z_m with complex coefficients, kept up
to a total degree cutoff d. Multiplication is the Cauchy product (the image
of the Wick product) with every term above degree d discarded, so the
truncated elements form the quotient ring C[z]/(terms of degree > d) and
every identity of that ring holds exactly up to rounding.

Coefficients are stored densely over the graded-lex index list of the
truncation; :attr:`RingElement.coeffs` gives the sparse view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from wicksys.errors import (
    CompositionDomain,
    DimensionMismatch,
    DivergentConstant,
    DivergentWeightSum,
    NotInvertible,
    SpecMismatch,
)
from wicksys.multiindex import MultiIndex, TruncationSpec, index_table

__all__ = [
    "RingElement",
    "wick_mul",
    "evaluate",
    "inverse",
    "compose",
    "norm_k",
    "vage_constant",
    "kq_membership",
    "KqResult",
    "weight_sum",
    "growth_bound",
    "growth_bound_check",
]


class RingElement:
    """Element of the truncated ring under a :class:`TruncationSpec`.

    Instances are immutable. Use the module functions or the arithmetic
    operators (``+``, ``-``, ``*``) to build new elements.
    """

    __slots__ = ("spec", "_vec")
    __hash__ = None

    def __init__(self, spec: TruncationSpec, coeffs: Mapping[MultiIndex, complex] | None = None):
        table = index_table(spec)
        vec = np.zeros(table.size, dtype=np.complex128)
        for alpha, c in (coeffs or {}).items():
            if not spec.admits(alpha):
                raise ValueError(f"{alpha} is outside truncation {spec}")
            vec[table.lookup(alpha)] += complex(c)
        self.spec = spec
        vec.flags.writeable = False
        self._vec = vec

    @classmethod
    def from_vector(cls, spec: TruncationSpec, vec: np.ndarray) -> RingElement:
        out = cls.__new__(cls)
        out.spec = spec
        vec = np.asarray(vec, dtype=np.complex128)
        if vec.shape != (index_table(spec).size,):
            raise ValueError("coefficient vector has the wrong length for this truncation")
        if vec.flags.writeable:
            vec = vec.copy()
            vec.flags.writeable = False
        out._vec = vec
        return out

    # constructors -------------------------------------------------------

    @classmethod
    def zero(cls, spec: TruncationSpec) -> RingElement:
        return cls.from_vector(spec, np.zeros(index_table(spec).size, dtype=np.complex128))

    @classmethod
    def constant(cls, spec: TruncationSpec, c: complex) -> RingElement:
        vec = np.zeros(index_table(spec).size, dtype=np.complex128)
        vec[0] = c
        return cls.from_vector(spec, vec)

    @classmethod
    def one(cls, spec: TruncationSpec) -> RingElement:
        return cls.constant(spec, 1.0)

    @classmethod
    def monomial(cls, spec: TruncationSpec, alpha: MultiIndex | Sequence[int], c: complex = 1.0) -> RingElement:
        if not isinstance(alpha, MultiIndex):
            alpha = MultiIndex.from_dense(alpha)
        if alpha.degree > spec.max_degree:
            return cls.zero(spec)
        return cls(spec, {alpha: c})

    @classmethod
    def variable(cls, spec: TruncationSpec, position: int) -> RingElement:
        """The coordinate function z_position."""
        return cls.monomial(spec, MultiIndex.unit(position))

    # views --------------------------------------------------------------

    @property
    def vector(self) -> np.ndarray:
        """Read-only dense coefficients in graded-lex order."""
        return self._vec

    @property
    def coeffs(self) -> dict[MultiIndex, complex]:
        """Sparse map of the nonzero coefficients (exact zeros omitted)."""
        idx = index_table(self.spec).indices
        return {idx[i]: complex(self._vec[i]) for i in np.flatnonzero(self._vec)}

    def __getitem__(self, alpha: MultiIndex | Sequence[int]) -> complex:
        if not isinstance(alpha, MultiIndex):
            alpha = MultiIndex.from_dense(alpha)
        if not self.spec.admits(alpha):
            return 0j
        return complex(self._vec[index_table(self.spec).lookup(alpha)])

    def constant_term(self) -> complex:
        return complex(self._vec[0])

    def is_zero(self) -> bool:
        return not self._vec.any()

    @property
    def degree(self) -> int:
        """Largest total degree with a nonzero coefficient; -1 for zero."""
        nz = np.flatnonzero(self._vec)
        if nz.size == 0:
            return -1
        return int(index_table(self.spec).degrees[nz].max())

    def max_abs(self) -> float:
        return float(np.abs(self._vec).max(initial=0.0))

    # arithmetic ---------------------------------------------------------

    def _check(self, other: RingElement):
        if not isinstance(other, RingElement):
            raise TypeError(f"expected RingElement, got {type(other).__name__}")
        if other.spec != self.spec:
            raise SpecMismatch(f"truncations differ: {self.spec} vs {other.spec}")

    def add(self, other: RingElement) -> RingElement:
        self._check(other)
        return RingElement.from_vector(self.spec, self._vec + other._vec)

    def negate(self) -> RingElement:
        return RingElement.from_vector(self.spec, -self._vec)

    def scale(self, c: complex) -> RingElement:
        return RingElement.from_vector(self.spec, self._vec * complex(c))

    scale_by_complex = scale

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = RingElement.constant(self.spec, other)
        return self.add(other)

    __radd__ = __add__

    def __neg__(self):
        return self.negate()

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = RingElement.constant(self.spec, other)
        self._check(other)
        return RingElement.from_vector(self.spec, self._vec - other._vec)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return wick_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(1.0 / other)
        return wick_mul(self, inverse(other))

    def __pow__(self, n: int) -> RingElement:
        if n < 0:
            return inverse(self) ** (-n)
        out, base = RingElement.one(self.spec), self
        while n:
            if n & 1:
                out = wick_mul(out, base)
            n >>= 1
            if n:
                base = wick_mul(base, base)
        return out

    def __eq__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self._vec, other._vec)

    def allclose(self, other: RingElement, atol: float = 1e-12, rtol: float = 0.0) -> bool:
        self._check(other)
        return bool(np.allclose(self._vec, other._vec, atol=atol, rtol=rtol))

    def truncate_to(self, spec: TruncationSpec) -> RingElement:
        """Restrict to a coarser truncation (fewer variables or lower degree)."""
        if spec.num_vars > self.spec.num_vars or spec.max_degree > self.spec.max_degree:
            raise SpecMismatch(f"{spec} is not coarser than {self.spec}")
        src = index_table(self.spec)
        dst = index_table(spec)
        vec = np.zeros(dst.size, dtype=np.complex128)
        for i, alpha in enumerate(dst.indices):
            vec[i] = self._vec[src.lookup(alpha)]
        return RingElement.from_vector(spec, vec)

    def evaluate(self, z: Sequence[complex]) -> complex:
        return evaluate(self, z)

    def norm(self, k: float) -> float:
        return norm_k(self, k)

    def __repr__(self) -> str:
        return f"RingElement({self}, m={self.spec.num_vars}, d={self.spec.max_degree})"

    def __str__(self) -> str:
        out = ""
        for alpha, c in self.coeffs.items():
            mono = "*".join(f"z{p}" if e == 1 else f"z{p}^{e}" for p, e in alpha.pairs)
            sign = "+"
            if c.imag == 0 and c.real < 0:
                sign, c = "-", -c
            cs = _fmt_complex(c)
            if mono:
                cs = mono if c == 1 else f"{cs}*{mono}"
            if not out:
                out = cs if sign == "+" else "-" + cs
            else:
                out += f" {sign} {cs}"
        return out or "0"


def _fmt_complex(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:g}"
    return f"({c.real:g}{c.imag:+g}i)"


def wick_mul(f: RingElement, g: RingElement) -> RingElement:
    """Truncated Cauchy product: coefficient at gamma is sum over a+b=gamma of f_a g_b."""
    f._check(g)
    t = index_table(f.spec)
    terms = f._vec[t.pair_left] * g._vec[t.pair_right]
    re = np.bincount(t.pair_target, weights=terms.real, minlength=t.size)
    im = np.bincount(t.pair_target, weights=terms.imag, minlength=t.size)
    return RingElement.from_vector(f.spec, re + 1j * im)


def _monomial_values(spec: TruncationSpec, z: Sequence[complex]) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128).ravel()
    if z.shape[0] != spec.num_vars:
        raise DimensionMismatch(
            f"evaluation point has {z.shape[0]} coordinates, truncation has {spec.num_vars} variables"
        )
    t = index_table(spec)
    d = spec.max_degree
    powers = np.ones((spec.num_vars, d + 1), dtype=np.complex128)
    for e in range(1, d + 1):
        powers[:, e] = powers[:, e - 1] * z
    cols = np.arange(spec.num_vars)
    return np.prod(powers[cols, t.exponents], axis=1)


def evaluate(f: RingElement, z: Sequence[complex]) -> complex:
    """Finite sum of f_alpha z^alpha over the stored terms."""
    return complex(np.dot(f._vec, _monomial_values(f.spec, z)))


def abs_series(f: RingElement, z: Sequence[complex]) -> float:
    """Sum of |f_alpha| |z^alpha|, the absolute-convergence majorant at z."""
    return float(np.dot(np.abs(f._vec), np.abs(_monomial_values(f.spec, z))))


def inverse(f: RingElement) -> RingElement:
    """Inverse of a unit, exact through degree d.

    Writes f = c (1 - r) with c = f(0) and sums the geometric series of r,
    which terminates because r^n starts at degree n.
    """
    c = f.constant_term()
    if c == 0:
        raise NotInvertible("element has zero constant term and is not a unit")
    r = RingElement.one(f.spec) - f.scale(1.0 / c)
    g = RingElement.one(f.spec)
    for _ in range(f.spec.max_degree):
        g = RingElement.one(f.spec) + wick_mul(r, g)
    return g.scale(1.0 / c)


def compose(x: Sequence[complex], r: RingElement) -> RingElement:
    """Substitute r into the power series sum x_n t^n (Horner, n <= d)."""
    if r.constant_term() != 0:
        raise CompositionDomain("composition requires r(0) = 0")
    coeffs = list(x)[: r.spec.max_degree + 1]
    out = RingElement.zero(r.spec)
    for xn in reversed(coeffs):
        out = wick_mul(out, r) + complex(xn)
    return out


def norm_k(f: RingElement, k: float) -> float:
    """Kondratiev norm (sum |f_alpha|^2 (2N)^(-k alpha))^(1/2)."""
    t = index_table(f.spec)
    w = np.exp(-k * t.log_weights)
    return float(math.sqrt(np.sum(np.abs(f._vec) ** 2 * w)))


def _log_factor_tail(s: float, start: int) -> float:
    # sum_{j >= start} -log(1 - (2j)^-s) = sum_n 2^{-sn} zeta(sn, start) / n
    total = 0.0
    n = 1
    while True:
        term = 2.0 ** (-s * n) * float(hurwitz_zeta(s * n, start)) / n
        total += term
        if term < 1e-18 * max(total, 1e-300) or n > 200:
            return total
        n += 1


def vage_constant(k: float, l: float, num_vars: int | None = None) -> float:
    """Constant A(k-l) = sum over all multi-indices of (2N)^((l-k) alpha).

    The sum factorizes into prod_j (1 - (2j)^(l-k))^-1. With ``num_vars``
    the product stops at j = num_vars (the sum over indices supported in
    z_1..z_m); otherwise the first 64 factors are multiplied directly and the
    remaining ones are summed in closed form through the Hurwitz zeta
    function, leaving a relative error far below 1e-12.
    """
    s = float(k) - float(l)
    if s <= 1:
        raise DivergentConstant(
            f"A(k-l) diverges for k - l = {s:g} <= 1 (sum of (2j)^-{s:g} diverges)"
        )
    stop = 64 if num_vars is None else num_vars
    j = np.arange(1, stop + 1, dtype=float)
    log_a = -np.sum(np.log1p(-((2.0 * j) ** (-s))))
    if num_vars is None:
        log_a += _log_factor_tail(s, stop + 1)
    return float(math.exp(log_a))


@dataclass(frozen=True)
class KqResult:
    member: bool
    total: float

    def __bool__(self) -> bool:
        return self.member


def _weight_ratios(z: Sequence[complex], q: float) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128).ravel()
    j = np.arange(1, z.shape[0] + 1, dtype=float)
    r = np.abs(z) ** 2 * (2.0 * j) ** q
    return r[z != 0]


def weight_sum(z: Sequence[complex], q: float) -> float:
    """sum over all alpha (including 0) of (2N)^(q alpha) |z^alpha|^2; inf if divergent."""
    r = _weight_ratios(z, q)
    if np.any(r >= 1):
        return math.inf
    return float(math.exp(-np.sum(np.log1p(-r))))


def kq_membership(z: Sequence[complex], q: float, delta: float) -> KqResult:
    """Test whether z lies in K_q(delta).

    The defining sum over nonzero alpha is prod_j (1 - |z_j|^2 (2j)^q)^-1 - 1.
    A factor ratio >= 1 makes the sum diverge; that is reported as
    ``KqResult(False, inf)``.
    """
    r = _weight_ratios(z, q)
    if np.any(r >= 1):
        return KqResult(False, math.inf)
    total = float(math.expm1(-np.sum(np.log1p(-r))))
    return KqResult(total < delta**2, total)


@dataclass(frozen=True)
class GrowthBound:
    value: float
    """|f(z)|"""
    absolute: float
    """sum |f_alpha| |z^alpha|"""
    bound: float
    """M_q (sum (2N)^(q alpha) |z^alpha|^2)^(1/2)"""
    m_q: float

    @property
    def holds(self) -> bool:
        # each side is a float sum; allow rounding in the last few ulps
        slack = 1e-12
        return (
            self.value <= self.absolute * (1 + slack) + 1e-300
            and self.absolute <= self.bound * (1 + slack) + 1e-300
        )


def growth_bound(f: RingElement, z: Sequence[complex], q: float) -> GrowthBound:
    """Both sides of |f(z)| <= sum |f_a||z^a| <= M_q (sum (2N)^(qa)|z^a|^2)^(1/2).

    M_q is taken as the q-weighted coefficient norm, ``norm_k(f, q)``, which
    makes the second inequality an instance of Cauchy-Schwarz.
    """
    total = weight_sum(z, q)
    if math.isinf(total):
        raise DivergentWeightSum(f"sum of (2N)^(q alpha)|z^alpha|^2 diverges at q={q}")
    m_q = norm_k(f, q)
    return GrowthBound(
        value=abs(evaluate(f, z)),
        absolute=abs_series(f, z),
        bound=m_q * math.sqrt(total),
        m_q=m_q,
    )


def growth_bound_check(f: RingElement, z: Sequence[complex], q: float) -> bool:
    return growth_bound(f, z, q).holds
