"""Discrete-time state-space systems with ring-valued matrices.

The system is

    x_{n+1} = A x_n + B u_n,    y_n = C x_n + D u_n,

with every product a matrix Wick product. Its transfer function is
H(zeta) = D + zeta C (I - zeta A)^-1 B, with Markov parameters
H_0 = D, H_n = C A^(n-1) B.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from wicksys.errors import DimensionMismatch, InvalidRecursion, SingularAtPoint, SpecMismatch
from wicksys.multiindex import TruncationSpec, index_table
from wicksys.ring import RingElement
from wicksys.ringmatrix import SINGULAR_RTOL, RingMatrix, mat_inverse

#: |det(I - zeta A(z))| below this fraction of its Hadamard bound counts as singular.
PENCIL_RTOL = 1e-12


@dataclass(frozen=True)
class StateSpaceSystem:
    A: RingMatrix
    B: RingMatrix
    C: RingMatrix
    D: RingMatrix

    def __post_init__(self):
        spec = self.A.spec
        for name in "BCD":
            if getattr(self, name).spec != spec:
                raise SpecMismatch(f"{name} uses a different truncation than A")
        n = self.A.rows
        if self.A.cols != n:
            raise DimensionMismatch(f"A must be square, got {self.A.shape}")
        if self.B.rows != n:
            raise DimensionMismatch(f"B has {self.B.rows} rows, expected {n}")
        if self.C.cols != n:
            raise DimensionMismatch(f"C has {self.C.cols} columns, expected {n}")
        if self.D.shape != (self.C.rows, self.B.cols):
            raise DimensionMismatch(f"D has shape {self.D.shape}, expected {(self.C.rows, self.B.cols)}")

    @property
    def spec(self) -> TruncationSpec:
        return self.A.spec

    @property
    def n_states(self) -> int:
        return self.A.rows

    @property
    def n_inputs(self) -> int:
        return self.B.cols

    @property
    def n_outputs(self) -> int:
        return self.C.rows

    @property
    def dims(self) -> tuple[int, int, int]:
        """``(N, q, p)``: states, inputs, outputs."""
        return self.n_states, self.n_inputs, self.n_outputs

    @classmethod
    def from_constant(cls, spec: TruncationSpec, A, B, C, D) -> StateSpaceSystem:
        return cls(*(RingMatrix.from_constant(spec, m) for m in (A, B, C, D)))

    @classmethod
    def static(cls, D: RingMatrix) -> StateSpaceSystem:
        """Memoryless system H(zeta) = D, realized with one idle state."""
        spec = D.spec
        return cls(
            RingMatrix.zeros(spec, 1, 1),
            RingMatrix.zeros(spec, 1, D.cols),
            RingMatrix.zeros(spec, D.rows, 1),
            D,
        )

    def eval0(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """The unperturbed complex system (A(0), B(0), C(0), D(0))."""
        return self.A.eval0(), self.B.eval0(), self.C.eval0(), self.D.eval0()

    def evaluate(self, z: Sequence[complex]) -> tuple[np.ndarray, ...]:
        return tuple(m.evaluate(z) for m in (self.A, self.B, self.C, self.D))

    def negate(self) -> StateSpaceSystem:
        """Realization of -H (C and D scaled by -1)."""
        return StateSpaceSystem(self.A, self.B, -self.C, -self.D)


@dataclass(frozen=True)
class TransferSeries:
    """Markov parameters ``params[n] = H_n``, n = 0..horizon."""

    params: tuple[RingMatrix, ...]

    def __post_init__(self):
        if self.params:
            shape = self.params[0].shape
            if any(h.shape != shape for h in self.params):
                raise DimensionMismatch("Markov parameters must share one shape")

    @property
    def horizon(self) -> int:
        return len(self.params) - 1

    def __len__(self) -> int:
        return len(self.params)

    def __getitem__(self, n: int) -> RingMatrix:
        return self.params[n]

    def __iter__(self):
        return iter(self.params)


# simulation --------------------------------------------------------------


def _zero_vector(spec: TruncationSpec, n: int) -> RingMatrix:
    return RingMatrix.zeros(spec, n, 1)


def simulate(
    sys: StateSpaceSystem,
    u: Sequence[RingMatrix],
    x0: RingMatrix | None = None,
    steps: int | None = None,
) -> tuple[list[RingMatrix], list[RingMatrix]]:
    """Run the Wick recursion for ``steps`` steps.

    Inputs beyond ``len(u)`` are zero. Returns ``(states, outputs)`` with
    states x_0..x_steps and outputs y_0..y_{steps-1}.
    """
    n, q, p = sys.dims
    steps = len(u) if steps is None else steps
    for k, uk in enumerate(u):
        if uk.shape != (q, 1):
            raise DimensionMismatch(f"input u_{k} has shape {uk.shape}, expected {(q, 1)}")
    x = _zero_vector(sys.spec, n) if x0 is None else x0
    if x.shape != (n, 1):
        raise DimensionMismatch(f"initial state has shape {x.shape}, expected {(n, 1)}")
    u_zero = _zero_vector(sys.spec, q)
    states, outputs = [x], []
    for k in range(steps):
        uk = u[k] if k < len(u) else u_zero
        outputs.append(sys.C @ x + sys.D @ uk)
        x = sys.A @ x + sys.B @ uk
        states.append(x)
    return states, outputs


def markov(sys: StateSpaceSystem, horizon: int) -> TransferSeries:
    """[D, CB, CAB, ..., C A^(horizon-1) B]."""
    params = [sys.D]
    ak_b = sys.B
    for _ in range(horizon):
        params.append(sys.C @ ak_b)
        ak_b = sys.A @ ak_b
    return TransferSeries(tuple(params))


def convolve(series: TransferSeries, u: Sequence[RingMatrix], steps: int | None = None) -> list[RingMatrix]:
    """Outputs y_n = sum_{j<=n} H_{n-j} u_j of the zero-state response."""
    steps = len(u) if steps is None else steps
    if steps > len(series):
        raise DimensionMismatch(f"series horizon {series.horizon} is too short for {steps} steps")
    h0 = series[0]
    outputs = []
    for n in range(steps):
        y = RingMatrix.zeros(h0.spec, h0.rows, 1)
        for j in range(min(n + 1, len(u))):
            y = y + series[n - j] @ u[j]
        outputs.append(y)
    return outputs


# pointwise transfer functions --------------------------------------------


def _pencil_solve(a: np.ndarray, b: np.ndarray, zeta: complex) -> np.ndarray:
    n = a.shape[0]
    pencil = np.eye(n) - zeta * a
    d = np.linalg.det(pencil)
    hadamard = float(np.prod(np.linalg.norm(pencil, axis=1)))
    if not np.isfinite(d) or abs(d) <= PENCIL_RTOL * max(hadamard, 1e-300):
        raise SingularAtPoint(f"I - zeta A is singular at zeta={zeta} (|det| = {abs(d):.3e})", abs(d))
    return np.linalg.solve(pencil, b)


def tf_eval(sys: StateSpaceSystem, zeta: complex, z: Sequence[complex]) -> np.ndarray:
    """D(z) + zeta C(z) (I - zeta A(z))^-1 B(z) as a complex p x q matrix."""
    a, b, c, d = sys.evaluate(z)
    zeta = complex(zeta)
    return d + zeta * (c @ _pencil_solve(a, b, zeta))


def is_admissible(sys: StateSpaceSystem, zeta: complex) -> bool:
    """zeta is in the resolvent set: det(I - zeta A(0)) != 0."""
    try:
        _pencil_solve(sys.A.eval0(), np.zeros((sys.n_states, 1)), complex(zeta))
    except SingularAtPoint:
        return False
    return True


@dataclass(frozen=True)
class SeriesValue:
    value: np.ndarray
    tail_bound: float
    """Upper bound on the norm of the omitted terms; ``inf`` if unknown."""


def tf_series_eval(
    series: TransferSeries,
    zeta: complex,
    z: Sequence[complex],
    sys: StateSpaceSystem | None = None,
) -> SeriesValue:
    """Partial sum sum_{n<=T} zeta^n H_n(z) plus a bound on the remainder.

    With ``sys`` the bound is the geometric majorant
    ||C|| ||B|| |zeta|^(T+1) ||A||^T / (1 - |zeta| ||A||) in spectral norms,
    finite only when |zeta| ||A(z)|| < 1. Without it the remainder is
    extrapolated from the ratio of the last two terms.
    """
    zeta = complex(zeta)
    terms = [zeta**n * h.evaluate(z) for n, h in enumerate(series)]
    value = np.sum(terms, axis=0)
    horizon = series.horizon
    if sys is not None:
        a, b, c, _ = sys.evaluate(z)
        rho = abs(zeta) * np.linalg.norm(a, 2)
        if rho >= 1:
            tail = np.inf
        else:
            tail = (
                np.linalg.norm(c, 2)
                * np.linalg.norm(b, 2)
                * abs(zeta) ** (horizon + 1)
                * np.linalg.norm(a, 2) ** horizon
                / (1 - rho)
            )
    elif horizon >= 2:
        last, prev = np.linalg.norm(terms[-1], 2), np.linalg.norm(terms[-2], 2)
        if prev == 0:
            tail = 0.0 if last == 0 else np.inf
        else:
            ratio = last / prev
            tail = last * ratio / (1 - ratio) if ratio < 1 else np.inf
    else:
        tail = np.inf
    return SeriesValue(value, float(tail))


# realization calculus ----------------------------------------------------


def realize_inverse(sys: StateSpaceSystem, rtol: float = SINGULAR_RTOL) -> StateSpaceSystem:
    """Realization of H^-1 for square H with D(0) invertible.

    (A - B D^-1 C, B D^-1, -D^-1 C, D^-1).
    """
    if sys.n_inputs != sys.n_outputs:
        raise DimensionMismatch("only square transfer functions can be inverted")
    d_inv = mat_inverse(sys.D, rtol)
    b_dinv = sys.B @ d_inv
    return StateSpaceSystem(sys.A - b_dinv @ sys.C, b_dinv, -(d_inv @ sys.C), d_inv)


def realize_cascade(sys1: StateSpaceSystem, sys2: StateSpaceSystem) -> StateSpaceSystem:
    """Realization of the product H1 H2 on N1 + N2 states."""
    if sys1.n_inputs != sys2.n_outputs:
        raise DimensionMismatch(
            f"H1 has {sys1.n_inputs} columns but H2 has {sys2.n_outputs} rows"
        )
    n1, n2 = sys1.n_states, sys2.n_states
    spec = sys1.spec
    a = RingMatrix.block([[sys1.A, sys1.B @ sys2.C], [RingMatrix.zeros(spec, n2, n1), sys2.A]])
    b = RingMatrix.block([[sys1.B @ sys2.D], [sys2.B]])
    c = RingMatrix.block([[sys1.C, sys1.D @ sys2.C]])
    return StateSpaceSystem(a, b, c, sys1.D @ sys2.D)


def realize_concat_cols(sys1: StateSpaceSystem, sys2: StateSpaceSystem) -> StateSpaceSystem:
    """Realization of the row block [H1 H2] (side by side; equal output count)."""
    if sys1.n_outputs != sys2.n_outputs:
        raise DimensionMismatch("side-by-side concatenation needs equal output dimensions")
    spec = sys1.spec
    (n1, q1, _), (n2, q2, _) = sys1.dims, sys2.dims
    a = RingMatrix.block([[sys1.A, RingMatrix.zeros(spec, n1, n2)], [RingMatrix.zeros(spec, n2, n1), sys2.A]])
    b = RingMatrix.block([[sys1.B, RingMatrix.zeros(spec, n1, q2)], [RingMatrix.zeros(spec, n2, q1), sys2.B]])
    c = RingMatrix.block([[sys1.C, sys2.C]])
    d = RingMatrix.block([[sys1.D, sys2.D]])
    return StateSpaceSystem(a, b, c, d)


def realize_concat_rows(sys1: StateSpaceSystem, sys2: StateSpaceSystem) -> StateSpaceSystem:
    """Realization of the column block [H1; H2] (stacked; equal input count)."""
    if sys1.n_inputs != sys2.n_inputs:
        raise DimensionMismatch("stacked concatenation needs equal input dimensions")
    spec = sys1.spec
    (n1, _, p1), (n2, _, p2) = sys1.dims, sys2.dims
    a = RingMatrix.block([[sys1.A, RingMatrix.zeros(spec, n1, n2)], [RingMatrix.zeros(spec, n2, n1), sys2.A]])
    b = RingMatrix.block([[sys1.B], [sys2.B]])
    c = RingMatrix.block([[sys1.C, RingMatrix.zeros(spec, p1, n2)], [RingMatrix.zeros(spec, p2, n1), sys2.C]])
    d = RingMatrix.block([[sys1.D], [sys2.D]])
    return StateSpaceSystem(a, b, c, d)


def realize_sum(sys1: StateSpaceSystem, sys2: StateSpaceSystem) -> StateSpaceSystem:
    """Realization of H1 + H2, built as the product [H1 I_p] [I_q; H2].

    The idle states of the identity factors are dropped, which leaves
    block-diagonal A, stacked B, side-by-side C and D = D1 + D2.
    """
    if sys1.dims[1:] != sys2.dims[1:]:
        raise DimensionMismatch(f"cannot add transfer functions of shapes {sys1.dims[1:]} and {sys2.dims[1:]}")
    spec = sys1.spec
    _, q, p = sys1.dims
    left = _concat_with_identity_cols(sys1, RingMatrix.identity(spec, p))
    right = _concat_with_identity_rows(RingMatrix.identity(spec, q), sys2)
    return realize_cascade(left, right)


def _concat_with_identity_cols(sys: StateSpaceSystem, eye: RingMatrix) -> StateSpaceSystem:
    # [H  I]: the identity carries no state
    spec = sys.spec
    n = sys.n_states
    b = RingMatrix.block([[sys.B, RingMatrix.zeros(spec, n, eye.cols)]])
    return StateSpaceSystem(sys.A, b, sys.C, RingMatrix.block([[sys.D, eye]]))


def _concat_with_identity_rows(eye: RingMatrix, sys: StateSpaceSystem) -> StateSpaceSystem:
    # [I; H]
    spec = sys.spec
    n = sys.n_states
    c = RingMatrix.block([[RingMatrix.zeros(spec, eye.rows, n)], [sys.C]])
    return StateSpaceSystem(sys.A, sys.B, c, RingMatrix.block([[eye], [sys.D]]))


# backward shift and the shift realization -------------------------------


def r0_shift(series: TransferSeries) -> TransferSeries:
    """(f(zeta) - f(0)) / zeta on coefficients: drop H_0 and shift down."""
    return TransferSeries(series.params[1:])


def _scalar(h: RingMatrix) -> RingElement:
    if h.shape != (1, 1):
        raise DimensionMismatch("the shift realization handles scalar transfer functions only")
    return h[0, 0]


def realize_from_recursion(
    series: TransferSeries,
    order: int,
    recursion: RingMatrix,
    atol: float = 1e-10,
) -> StateSpaceSystem:
    """Shift realization of a scalar series from a recursion certificate.

    Let v = (1, R0 H, ..., R0^(M-1) H). The certificate ``recursion`` is an
    M x M matrix with R0 v = v * recursion; every coefficient of that
    identity available within the horizon is checked before building

        A = recursion,  B = e_2,  C = v(0) = (1, H_1, ..., H_{M-1}),  D = H_0.
    """
    m = order
    if m < 2:
        raise ValueError("the shift realization needs order >= 2")
    if recursion.shape != (m, m):
        raise DimensionMismatch(f"recursion certificate must be {m}x{m}, got {recursion.shape}")
    h = [_scalar(x) for x in series]
    horizon = series.horizon
    if horizon < m:
        raise ValueError(f"horizon {horizon} too short to check an order-{m} recursion")
    spec = recursion.spec
    one = RingElement.one(spec)
    zero = RingElement.zero(spec)

    def coeff(i: int, n: int) -> RingElement:
        # n-th zeta coefficient of v_i
        if i == 0:
            return one if n == 0 else zero
        return h[n + i]

    scale = 1.0 + max(x.max_abs() for x in h)
    for n in range(horizon - m + 1):
        for j in range(m):
            lhs = coeff(j, n + 1) if j else zero
            rhs = zero
            for i in range(m):
                rhs = rhs + recursion[i, j] * coeff(i, n)
            diff = (lhs - rhs).vector
            bad = np.flatnonzero(np.abs(diff) > atol * scale)
            if bad.size:
                alpha = index_table(spec).indices[bad[0]]
                raise InvalidRecursion(
                    f"recursion fails in column {j} at zeta^{n}, index {alpha}: "
                    f"residual {abs(diff[bad[0]]):.3e}",
                    column=j,
                    coefficient=(n, alpha),
                )
    b = RingMatrix.zeros(spec, m, 1).data.copy()
    b[1, 0, 0] = 1.0
    c = RingMatrix.from_entries([[one] + [h[i] for i in range(1, m)]])
    return StateSpaceSystem(recursion, RingMatrix(spec, b), c, series[0])
