"""Observability, controllability and minimality certificates.

Every check returns a :class:`Certificate` rather than a boolean, because
over the truncated ring only one direction is decidable: a nonzero maximal
minor proves injectivity (the ring has no zero divisors), but a minor that
vanishes after truncation proves nothing about the full series. Such cases
are reported as ``INCONCLUSIVE``.

Infinite Kalman stacks are cut at N blocks: by Cayley-Hamilton over the
ring, A^n for n >= N is a ring-linear combination of I, A, ..., A^(N-1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from wicksys.errors import DimensionMismatch
from wicksys.ring import RingElement
from wicksys.ringmatrix import RingMatrix, maximal_minors
from wicksys.statespace import StateSpaceSystem

#: Relative SVD threshold for complex Kalman ranks.
RANK_RTOL = 1e-10
#: A ring minor counts as nonzero when some coefficient exceeds this
#: fraction of its Hadamard-type bound; guards against rounding residue.
MINOR_RTOL = 1e-10


class Property(str, enum.Enum):
    OBSERVABLE = "Observable"
    CONTROLLABLE = "Controllable"
    R_CONTROLLABLE = "RControllable"
    R_MINIMAL = "RMinimal"


class Verdict(str, enum.Enum):
    SUFFICIENT_AT_ZERO = "SufficientAtZero"
    SUFFICIENT_NONZERO_MINOR = "SufficientNonzeroMinor"
    REFUTED_AT_ZERO = "RefutedAtZero"
    INCONCLUSIVE = "Inconclusive"

    @property
    def certifies(self) -> bool:
        return self in (Verdict.SUFFICIENT_AT_ZERO, Verdict.SUFFICIENT_NONZERO_MINOR)


_STRENGTH = {
    Verdict.INCONCLUSIVE: 0,
    Verdict.SUFFICIENT_NONZERO_MINOR: 1,
    Verdict.SUFFICIENT_AT_ZERO: 2,
}


@dataclass(frozen=True)
class Certificate:
    property: Property
    verdict: Verdict
    witness: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"property": self.property.value, "verdict": self.verdict.value, "witness": self.witness}


@dataclass(frozen=True)
class MinorWitness:
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    value: RingElement

    def to_dict(self) -> dict[str, Any]:
        return {"rows": list(self.rows), "cols": list(self.cols), "minor": str(self.value)}


# complex rank tests -------------------------------------------------------


def _numerical_rank(m: np.ndarray, rtol: float) -> int:
    if m.size == 0:
        return 0
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def observability_matrix_at_zero(c0: np.ndarray, a0: np.ndarray) -> np.ndarray:
    n = a0.shape[0]
    blocks, cur = [], np.asarray(c0, dtype=complex)
    for _ in range(n):
        blocks.append(cur)
        cur = cur @ a0
    return np.vstack(blocks)


def kalman_rank_at_zero(c0: np.ndarray, a0: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Rank of [C0; C0 A0; ...; C0 A0^(N-1)] by SVD with relative tolerance."""
    c0 = np.atleast_2d(np.asarray(c0, dtype=complex))
    a0 = np.atleast_2d(np.asarray(a0, dtype=complex))
    if a0.shape[0] != a0.shape[1] or c0.shape[1] != a0.shape[0]:
        raise DimensionMismatch(f"incompatible shapes C0 {c0.shape}, A0 {a0.shape}")
    return _numerical_rank(observability_matrix_at_zero(c0, a0), rtol)


def controllability_rank_at_zero(a0: np.ndarray, b0: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Rank of [B0, A0 B0, ..., A0^(N-1) B0]; the transpose of the observability test."""
    a0 = np.atleast_2d(np.asarray(a0, dtype=complex))
    b0 = np.atleast_2d(np.asarray(b0, dtype=complex))
    return kalman_rank_at_zero(b0.T, a0.T, rtol)


# ring-level Kalman matrices -------------------------------------------------


def observability_matrix(c: RingMatrix, a: RingMatrix) -> RingMatrix:
    """[C; CA; ...; C A^(N-1)] over the ring."""
    blocks, cur = [], c
    for _ in range(a.rows):
        blocks.append([cur])
        cur = cur @ a
    return RingMatrix.block(blocks)


def controllability_matrix(a: RingMatrix, b: RingMatrix) -> RingMatrix:
    """[B, AB, ..., A^(N-1) B] over the ring."""
    blocks, cur = [], b
    for _ in range(a.rows):
        blocks.append(cur)
        cur = a @ cur
    return RingMatrix.block([blocks])


def _hadamard_scale(m: RingMatrix) -> float:
    # l1 is submultiplicative under the Cauchy product, so the k largest row
    # l1-sums bound every coefficient of every k x k minor
    row = np.abs(m.data).sum(axis=(1, 2))
    k = min(m.shape)
    return float(np.prod(np.sort(row)[::-1][:k])) or 1.0


def find_nonzero_minor(m: RingMatrix, rtol: float = MINOR_RTOL) -> MinorWitness | None:
    """First maximal minor (lexicographic index sets) that is a nonzero element."""
    tol = rtol * _hadamard_scale(m)
    for rows, cols, value in maximal_minors(m):
        if value.max_abs() > tol:
            return MinorWitness(rows, cols, value)
    return None


def _hadamard_scale_at_zero(m: RingMatrix) -> float:
    # constant terms of the minors are the minors of m(0); Hadamard's
    # inequality bounds them by the k largest row 2-norms
    row = np.linalg.norm(m.eval0(), axis=1)
    k = min(m.shape)
    return float(np.prod(np.sort(row)[::-1][:k])) or 1.0


def find_unit_minor(m: RingMatrix, rtol: float = MINOR_RTOL) -> MinorWitness | None:
    """First maximal minor whose constant term is nonzero, i.e. a unit of the ring."""
    tol = rtol * _hadamard_scale_at_zero(m)
    for rows, cols, value in maximal_minors(m):
        if abs(value.constant_term()) > tol:
            return MinorWitness(rows, cols, value)
    return None


def _check_pair(a: RingMatrix, other: RingMatrix, side: str):
    if a.rows != a.cols:
        raise DimensionMismatch(f"A must be square, got {a.shape}")
    if side == "C" and other.cols != a.rows:
        raise DimensionMismatch(f"C has {other.cols} columns, A is {a.shape}")
    if side == "B" and other.rows != a.rows:
        raise DimensionMismatch(f"B has {other.rows} rows, A is {a.shape}")


# certificates -------------------------------------------------------------


def observability_certificate(c: RingMatrix, a: RingMatrix) -> Certificate:
    """Certify injectivity of f -> (Cf, CAf, CA^2 f, ...).

    Full Kalman rank of the unperturbed pair (C(0), A(0)) suffices. Failing
    that, a nonzero N x N minor of the ring observability matrix does.
    """
    _check_pair(a, c, "C")
    n = a.rows
    rank0 = kalman_rank_at_zero(c.eval0(), a.eval0())
    if rank0 == n:
        return Certificate(Property.OBSERVABLE, Verdict.SUFFICIENT_AT_ZERO, {"kalman_rank_at_zero": rank0})
    hit = find_nonzero_minor(observability_matrix(c, a))
    if hit is not None:
        return Certificate(
            Property.OBSERVABLE,
            Verdict.SUFFICIENT_NONZERO_MINOR,
            {"kalman_rank_at_zero": rank0, **hit.to_dict()},
        )
    return Certificate(
        Property.OBSERVABLE,
        Verdict.INCONCLUSIVE,
        {"kalman_rank_at_zero": rank0, "reason": "every maximal minor vanishes under truncation"},
    )


def controllability_certificate(a: RingMatrix, b: RingMatrix) -> Certificate:
    """Certify that the columns of [B, AB, ...] generate the state module.

    A maximal minor with nonzero constant term is a unit, so the columns
    generate; that happens exactly when (A(0), B(0)) has full Kalman rank.
    A rank defect at zero refutes generation, since evaluation at 0 maps a
    generating set onto a spanning set of C^N.
    """
    _check_pair(a, b, "B")
    n = a.rows
    rank0 = controllability_rank_at_zero(a.eval0(), b.eval0())
    if rank0 < n:
        return Certificate(
            Property.CONTROLLABLE,
            Verdict.REFUTED_AT_ZERO,
            {"kalman_rank_at_zero": rank0, "rank_defect": n - rank0},
        )
    hit = find_unit_minor(controllability_matrix(a, b))
    if hit is None:
        return Certificate(
            Property.CONTROLLABLE,
            Verdict.INCONCLUSIVE,
            {"kalman_rank_at_zero": rank0, "reason": "no minor with a resolvable constant term"},
        )
    return Certificate(
        Property.CONTROLLABLE,
        Verdict.SUFFICIENT_AT_ZERO,
        {"kalman_rank_at_zero": rank0, **hit.to_dict()},
    )


def r_controllability_certificate(a: RingMatrix, b: RingMatrix) -> Certificate:
    """Certify injectivity of row vectors f -> f (I - zeta A)^-1 B.

    Expanding in zeta, this is injectivity of f -> f [B, AB, ...], i.e. full
    row rank of the controllability matrix over the fraction field.
    """
    _check_pair(a, b, "B")
    n = a.rows
    rank0 = controllability_rank_at_zero(a.eval0(), b.eval0())
    if rank0 == n:
        return Certificate(Property.R_CONTROLLABLE, Verdict.SUFFICIENT_AT_ZERO, {"kalman_rank_at_zero": rank0})
    hit = find_nonzero_minor(controllability_matrix(a, b))
    if hit is not None:
        return Certificate(
            Property.R_CONTROLLABLE,
            Verdict.SUFFICIENT_NONZERO_MINOR,
            {"kalman_rank_at_zero": rank0, **hit.to_dict()},
        )
    return Certificate(
        Property.R_CONTROLLABLE,
        Verdict.INCONCLUSIVE,
        {"kalman_rank_at_zero": rank0, "reason": "every maximal minor vanishes under truncation"},
    )


def minimality_certificate(sys: StateSpaceSystem) -> Certificate:
    """Observable and R-controllable; the weaker of the two verdicts wins."""
    obs = observability_certificate(sys.C, sys.A)
    ctrl = r_controllability_certificate(sys.A, sys.B)
    verdict = min(obs.verdict, ctrl.verdict, key=_STRENGTH.__getitem__)
    return Certificate(
        Property.R_MINIMAL,
        verdict,
        {"observable": obs.to_dict(), "r_controllable": ctrl.to_dict()},
    )
