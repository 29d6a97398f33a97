from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellipticgrowth import symbols as S
from ellipticgrowth.polyaction import (
    FormulaViolation,
    Polynomial,
    graded_basis,
    harmonic_space,
    nu,
    numeric_rank,
    operator_matrix,
    poly_apply,
    poly_preimage,
    surjectivity_check,
)

OPS = {
    "lap2": S.laplacian(2),
    "lap3": S.laplacian(3),
    "bil2": S.bilaplacian(2),
    "bil3": S.bilaplacian(3),
    "cr": S.cauchy_riemann(),
    "cr2": S.op_power(S.cauchy_riemann(), 2),
}


@st.composite
def polynomials(draw, dim, max_degree=5):
    deg = draw(st.integers(0, max_degree))
    basis = graded_basis(deg, dim)
    vals = draw(st.lists(st.floats(-3, 3), min_size=len(basis), max_size=len(basis)))
    return Polynomial(dim, dict(zip(basis, vals)))


def test_nu_values():
    assert nu(0, 3) == 1
    assert nu(2, 3) == 6
    assert nu(-1, 2) == 0
    assert nu(5, 2) == 6
    assert sum(nu(k, 3) for k in range(4)) == comb(3 + 3, 3)


def test_laplacian_of_r2():
    p = Polynomial(3, {(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1})
    out = poly_apply(S.laplacian(3), p)
    # -Delta |x|^2 = -2N
    assert out.coeffs == {(0, 0, 0): -6}


def test_cr_kills_z():
    # z = x1 + i x2 is annihilated by d-bar
    z = Polynomial(2, {(1, 0): 1, (0, 1): 1j})
    assert poly_apply(S.cauchy_riemann(), z).coeff_norm() == 0
    zbar = Polynomial(2, {(1, 0): 1, (0, 1): -1j})
    # i (-i/2 d_1 + 1/2 d_2) zbar = (1 + 1)/2
    assert poly_apply(S.cauchy_riemann(), zbar).coeffs == {(0, 0): 1}


def test_harmonic_dims_examples():
    assert harmonic_space(S.laplacian(3), 2).dimension == 5
    assert harmonic_space(S.laplacian(2), 3).dimension == 2
    assert harmonic_space(S.bilaplacian(2), 3).dimension == 4


@pytest.mark.parametrize("name", sorted(OPS))
def test_harmonic_dims_match_formula(name):
    op = OPS[name]
    for ell in range(7):
        kb = harmonic_space(op, ell)
        assert kb.dimension == nu(ell, op.dim) - nu(ell - op.order, op.dim)
        for p in kb.polynomials:
            assert poly_apply(op, p).coeff_norm() <= 1e-9


def test_first_derivative_kernel():
    # ker d_1 on homogeneous degree ell is spanned by monomials free of x1
    kb = harmonic_space(S.partial(2, 0), 3)
    assert not kb.elliptic
    assert kb.dimension == nu(3, 1)
    assert harmonic_space(S.partial(3, 0), 2).dimension == nu(2, 2)


def test_formula_violation_raises_for_bad_rank_tol():
    # a ridiculous threshold makes every singular value count as zero
    with pytest.raises(FormulaViolation):
        harmonic_space(S.laplacian(3), 3, rtol=2.0)


@pytest.mark.parametrize("name", sorted(OPS))
def test_surjectivity(name):
    op = OPS[name]
    for kappa in range(5):
        rep = surjectivity_check(op, kappa)
        assert rep["pass"], rep


def test_preimage_of_one():
    w = poly_preimage(S.laplacian(3), Polynomial(3, {(0, 0, 0): 1}), 2)
    expect = Polynomial(3, {(2, 0, 0): -1 / 6, (0, 2, 0): -1 / 6, (0, 0, 2): -1 / 6})
    assert (w - expect).coeff_norm() < 1e-14


def test_preimage_degree_guard():
    with pytest.raises(ValueError):
        poly_preimage(S.laplacian(2), Polynomial(2, {(2, 0): 1}), 3)


def test_preimage_non_elliptic_still_exists():
    # constant-coefficient operators are onto polynomials: d_1 (x1 x2) = -i x2 up to the i^m factor
    w = poly_preimage(S.partial(2, 0), Polynomial(2, {(0, 1): 1}), 2)
    assert (poly_apply(S.partial(2, 0), w) - Polynomial(2, {(0, 1): 1})).coeff_norm() < 1e-14
    assert poly_preimage(S.laplacian(2), Polynomial(2), 3).coeff_norm() == 0


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(OPS)), st.integers(0, 10**6), st.integers(1, 4))
def test_preimage_residual(name, seed, kappa):
    op = OPS[name]
    basis = graded_basis(kappa - 1, op.dim)
    rng = np.random.default_rng(seed)
    pi = Polynomial(op.dim, dict(zip(basis, rng.normal(size=len(basis)))))
    w = poly_preimage(op, pi, op.order + kappa - 1)
    assert (poly_apply(op, w) - pi).coeff_norm() <= 1e-10 * pi.coeff_norm()


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(OPS)), st.integers(0, 7))
def test_rank_nullity(name, d):
    op = OPS[name]
    pm = operator_matrix(op, d)
    rank = numeric_rank(pm.matrix)
    kernel = sum(harmonic_space(op, ell).dimension for ell in range(d + 1))
    assert rank + kernel == pm.source_dim


@settings(max_examples=25, deadline=None)
@given(polynomials(2))
def test_functoriality(p):
    # applying a product of operators equals applying them in turn
    a, b = S.laplacian(2), S.cauchy_riemann()
    lhs = poly_apply(S.op_multiply(a, b), p)
    rhs = poly_apply(a, poly_apply(b, p))
    assert (lhs - rhs).coeff_norm() <= 1e-9 * (1 + p.coeff_norm())


@settings(max_examples=25, deadline=None)
@given(polynomials(3, 4))
def test_matrix_matches_apply(p):
    op = S.laplacian(3)
    d = max(p.degree, 0)
    pm = operator_matrix(op, d)
    vec = pm.matrix @ p.vector(d)
    out = poly_apply(op, p)
    assert np.allclose(vec, out.vector(d - 2) if d >= 2 else vec * 0, atol=1e-10)


def test_evaluation_and_product():
    p = Polynomial(2, {(1, 0): 2.0, (0, 2): -1.0})
    q = Polynomial(2, {(0, 1): 1.0, (0, 0): 3.0})
    x = np.array([[0.5, -2.0], [1.5, 0.25]])
    assert np.allclose((p * q)(x), p(x) * q(x))
    assert np.allclose((p + q)(x), p(x) + q(x))
    sym = Polynomial.from_operator(S.laplacian(2))
    assert np.allclose(sym(x), np.sum(x**2, axis=1))
