import numpy as np
import pytest
import sympy

from oracles import brute_mul, dense_terms, random_element, random_matrix, sympy_coeffs, to_sympy, vanishing_at_zero
from wicksys.errors import DimensionMismatch, NotInvertible, SpecMismatch
from wicksys.multiindex import TruncationSpec
from wicksys.ring import RingElement
from wicksys.ringmatrix import (
    RingMatrix,
    apply_poly,
    char_poly,
    det,
    mat_inverse,
    mat_mul,
    maximal_minors,
    trace,
)

SPEC = TruncationSpec(2, 4)
Z1 = RingElement.variable(SPEC, 1)
Z2 = RingElement.variable(SPEC, 2)
ONE = RingElement.one(SPEC)
ZERO = RingElement.zero(SPEC)


def rm(rows):
    return RingMatrix.from_entries(rows)


def test_shapes_and_access():
    m = rm([[Z1, ONE, ZERO], [Z2, Z1, ONE]])
    assert m.shape == (2, 3)
    assert m[1, 0] == Z2
    assert m[0, :].shape == (1, 3) and m[:, 1].shape == (2, 1)
    assert m.T.shape == (3, 2) and m.T[2, 1] == ONE
    np.testing.assert_array_equal(m.eval0(), [[0, 1, 0], [0, 0, 1]])
    with pytest.raises(DimensionMismatch):
        rm([[Z1], [Z1, Z2]])
    with pytest.raises(SpecMismatch):
        rm([[Z1, RingElement.one(TruncationSpec(1, 1))]])


def test_mul_identity():
    rng = np.random.default_rng(0)
    x = random_matrix(rng, SPEC, 2, 3)
    assert mat_mul(x, RingMatrix.identity(SPEC, 3)) == x
    assert mat_mul(RingMatrix.identity(SPEC, 2), x) == x


def test_mul_one_by_one():
    assert mat_mul(rm([[Z1]]), rm([[Z2]])) == rm([[Z1 * Z2]])


def test_mul_matches_entrywise_brute_force():
    rng = np.random.default_rng(1)
    x = random_matrix(rng, SPEC, 2, 2, max_deg=2)
    y = random_matrix(rng, SPEC, 2, 2, max_deg=2)
    got = mat_mul(x, y)
    for i in range(2):
        for k in range(2):
            want = {}
            for j in range(2):
                for key, v in brute_mul(dense_terms(x[i, j]), dense_terms(y[j, k]), 4).items():
                    want[key] = want.get(key, 0) + v
            for key, v in want.items():
                assert abs(got[i, k][list(key)] - v) <= 1e-12 * (1 + abs(v))


def test_mul_shape_error():
    with pytest.raises(DimensionMismatch):
        mat_mul(rm([[Z1, Z2]]), rm([[Z1, Z2]]))


def test_block_and_arithmetic():
    a = rm([[Z1]])
    b = RingMatrix.block([[a, RingMatrix.zeros(SPEC, 1, 1)], [RingMatrix.identity(SPEC, 1), a]])
    assert b == rm([[Z1, ZERO], [ONE, Z1]])
    assert (b - b).is_zero()
    assert b.scale(2) == b + b
    assert b.scale_by(Z2) == rm([[Z1 * Z2, ZERO], [Z2, Z1 * Z2]])
    with pytest.raises(DimensionMismatch):
        RingMatrix.block([[a, RingMatrix.zeros(SPEC, 2, 1)]])


def test_eval0_is_a_homomorphism():
    rng = np.random.default_rng(2)
    for _ in range(10):
        x = random_matrix(rng, SPEC, 3, 2)
        y = random_matrix(rng, SPEC, 2, 4)
        np.testing.assert_allclose((x @ y).eval0(), x.eval0() @ y.eval0(), rtol=0, atol=1e-12)


def test_inverse_identity():
    eye = RingMatrix.identity(SPEC, 2)
    assert mat_inverse(eye) == eye


def test_inverse_unipotent():
    assert mat_inverse(rm([[ONE, Z1], [ZERO, ONE]])) == rm([[ONE, -Z1], [ZERO, ONE]])


def test_inverse_with_permutation_constant_part():
    rng = np.random.default_rng(3)
    m = RingMatrix.from_constant(SPEC, [[0, 1], [1, 0]]) + vanishing_at_zero(rng, SPEC, 2, 2, 4, scale=1.0)
    inv = mat_inverse(m)
    eye = RingMatrix.identity(SPEC, 2)
    assert (m @ inv).allclose(eye, atol=1e-10)
    assert (inv @ m).allclose(eye, atol=1e-10)


def test_inverse_both_sides_random():
    rng = np.random.default_rng(4)
    spec = TruncationSpec(3, 4)
    for n in (1, 2, 3):
        m0 = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) + 2 * np.eye(n)
        m = RingMatrix.from_constant(spec, m0) + vanishing_at_zero(rng, spec, n, n, 3)
        inv = mat_inverse(m)
        eye = RingMatrix.identity(spec, n)
        assert (m @ inv).allclose(eye, atol=1e-10)
        assert (inv @ m).allclose(eye, atol=1e-10)


def test_inverse_singular_constant_part():
    with pytest.raises(NotInvertible):
        mat_inverse(rm([[Z1, ONE], [ZERO, ONE]]))
    with pytest.raises(NotInvertible):
        mat_inverse(RingMatrix.from_constant(SPEC, [[1, 2], [2, 4]]))
    with pytest.raises(DimensionMismatch):
        mat_inverse(rm([[ONE, ONE]]))


def _elements(coeffs):
    return [str(c) for c in coeffs]


def test_char_poly_constant_scalar():
    c = RingElement.constant(SPEC, 3 - 1j)
    p = char_poly(rm([[c]]))
    assert p[1] == ONE and p[0] == -c


def test_char_poly_nilpotent():
    p = char_poly(RingMatrix.from_constant(SPEC, [[0, 1], [0, 0]]))
    assert p[2] == ONE and p[1].is_zero() and p[0].is_zero()


def test_char_poly_triangular_matches_cofactor_oracle():
    a = rm([[Z1, ONE], [ZERO, Z2]])
    p = char_poly(a)
    assert p[0] == Z1 * Z2
    assert p[1] == -(Z1 + Z2)
    assert p[2] == ONE


def test_char_poly_matches_sympy_determinant():
    rng = np.random.default_rng(5)
    spec = TruncationSpec(2, 6)
    syms = sympy.symbols("z1 z2")
    lam = sympy.Symbol("lam")
    for n in (2, 3):
        a = random_matrix(rng, spec, n, n, max_deg=2, density=0.5)
        sa = sympy.Matrix(n, n, lambda i, j: to_sympy(a[i, j], syms))
        charpoly = sympy.expand((lam * sympy.eye(n) - sa).det(method="berkowitz"))
        p = char_poly(a)
        for k in range(n + 1):
            want = sympy_coeffs(charpoly.coeff(lam, k), syms, 6) if k < n else {(0, 0): 1}
            got = dense_terms(p[k])
            for key in set(want) | set(got):
                assert abs(got.get(key, 0) - want.get(key, 0)) <= 1e-9 * (1 + abs(want.get(key, 0)))


def test_det_agrees_across_methods():
    rng = np.random.default_rng(6)
    spec = TruncationSpec(2, 5)
    for n in (1, 2, 3, 4, 5):
        a = random_matrix(rng, spec, n, n, max_deg=1, density=0.7)
        p0 = char_poly(a)[0]
        via_cp = p0 if n % 2 == 0 else -p0
        assert det(a).allclose(via_cp, atol=1e-9)
        z = rng.normal(size=2) * 0.5
        assert abs(det(a).evaluate(z) - np.linalg.det(a.evaluate(z))) < 1e-9 or n * 1 > spec.max_degree


def test_trace():
    assert trace(rm([[Z1, ONE], [ZERO, Z2]])) == Z1 + Z2


def test_apply_poly_trivial_cases():
    rng = np.random.default_rng(7)
    a = random_matrix(rng, SPEC, 2, 2)
    assert apply_poly([1], a) == RingMatrix.identity(SPEC, 2)
    assert apply_poly([0, 1], a).allclose(a, atol=0)
    assert apply_poly([ZERO, ZERO, ONE], a).allclose(a @ a, atol=1e-13)


def test_cayley_hamilton_triangular():
    a = rm([[Z1, ONE], [ZERO, Z2]])
    assert apply_poly(char_poly(a), a).allclose(RingMatrix.zeros(SPEC, 2, 2), atol=1e-13)


def test_cayley_hamilton_random():
    rng = np.random.default_rng(8)
    spec = TruncationSpec(2, 6)
    for n in (1, 2, 3):
        for _ in range(5):
            a = random_matrix(rng, spec, n, n, max_deg=2)
            r = apply_poly(char_poly(a), a)
            assert r.max_abs() <= 1e-9 * (1 + a.max_abs())


def test_maximal_minors_order():
    a = rm([[ONE, ZERO, Z1], [ZERO, ONE, Z2]])
    minors = list(maximal_minors(a))
    assert [(r, c) for r, c, _ in minors] == [((0, 1), (0, 1)), ((0, 1), (0, 2)), ((0, 1), (1, 2))]
    assert minors[0][2] == ONE and minors[1][2] == Z2 and minors[2][2] == -Z1


def test_evaluate_matrix():
    a = rm([[Z1, ONE], [ZERO, Z1 * Z2]])
    np.testing.assert_allclose(a.evaluate([2, 3]), [[2, 1], [0, 6]])
