import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellipticgrowth import symbols as S
from ellipticgrowth.sphere import covering_grid, sphere_area, sphere_rule


def coeff_strategy(dim, order):
    basis = S.multi_indices(order, dim)
    c = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
    return st.lists(c, min_size=len(basis), max_size=len(basis)).map(
        lambda cs: {a: v for a, v in zip(basis, cs)}
    )


@st.composite
def operators(draw, dim=None, max_order=3):
    dim = dim or draw(st.integers(1, 3))
    order = draw(st.integers(0, max_order))
    coeffs = draw(coeff_strategy(dim, order))
    if not any(abs(v) > 1e-300 for v in coeffs.values()):
        coeffs[S.multi_indices(order, dim)[0]] = 1.0
    return S.ScalarOperator(dim, order, coeffs)


def test_multi_indices_counts():
    assert S.multi_indices(0, 3) == [(0, 0, 0)]
    assert len(S.multi_indices(2, 3)) == 6
    assert len(S.multi_indices(4, 2)) == 5
    assert all(sum(a) == 3 for a in S.multi_indices(3, 4))


def test_mixed_order_rejected():
    with pytest.raises(ValueError):
        S.ScalarOperator(2, 2, {(2, 0): 1.0, (1, 0): 1.0})
    with pytest.raises(ValueError):
        S.ScalarOperator(2, 1, {(1, 0, 0): 1.0})


def test_catalog_symbols():
    # hand evaluations
    assert S.eval_symbol(S.laplacian(3), [1.0, 2.0, 2.0]) == pytest.approx(9.0)
    assert S.eval_symbol(S.cauchy_riemann(), [1.0, 1.0]) == pytest.approx(0.5 - 0.5j)
    assert S.fourier_symbol(S.partial(2, 0), [2.0, 0.0]) == pytest.approx(2j)
    assert S.fourier_symbol(S.bilaplacian(2), [1.0, 1.0]) == pytest.approx(4.0)


def test_fourier_symbol_sign():
    op = S.laplacian(2)
    xi = np.array([0.3, -1.2])
    assert S.fourier_symbol(op, xi) == pytest.approx((-1) ** 2 * S.eval_symbol(op, xi))
    d = S.partial(2, 1)
    assert S.fourier_symbol(d, xi) == pytest.approx(-S.eval_symbol(d, xi))


def test_zero_operator_is_additive_identity():
    z = S.zero_operator(2)
    lap = S.laplacian(2)
    assert S.op_add(z, lap).allclose(lap)
    assert S.op_add(lap, z).allclose(lap)
    assert S.op_multiply(z, lap).is_zero
    assert S.op_add(lap, S.op_scale(lap, -1)).is_zero


def test_order_mismatch_raises():
    with pytest.raises(ValueError):
        S.op_add(S.laplacian(2), S.partial(2, 0))


def test_bilaplacian_is_square():
    assert S.op_power(S.laplacian(3), 2).allclose(S.bilaplacian(3))
    assert S.op_power(S.laplacian(3), 0).allclose(S.identity_operator(3))


@settings(max_examples=40, deadline=None)
@given(operators(dim=2), operators(dim=2), st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_symbol_is_ring_morphism(a, b, xi):
    xi = np.array(xi)
    lhs = S.eval_symbol(S.op_multiply(a, b), xi)
    rhs = S.eval_symbol(a, xi) * S.eval_symbol(b, xi)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs))


@settings(max_examples=40, deadline=None)
@given(operators(), st.floats(0.1, 5.0), st.integers(0, 2**31))
def test_symbol_homogeneity(op, t, seed):
    xi = np.random.default_rng(seed).normal(size=op.dim)
    lhs = S.eval_symbol(op, t * xi)
    rhs = t**op.order * S.eval_symbol(op, xi)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs))


@settings(max_examples=30, deadline=None)
@given(operators(dim=2, max_order=2), operators(dim=2, max_order=2))
def test_multiplication_commutes(a, b):
    assert S.op_multiply(a, b).allclose(S.op_multiply(b, a), atol=1e-10)


def test_ellipticity_margins():
    cases = [
        (S.laplacian(3), 1.0),
        (S.laplacian(2), 1.0),
        (S.cauchy_riemann(), 0.5),
        (S.bilaplacian(3), 1.0),
        (S.bilaplacian(2), 1.0),
    ]
    for op, margin in cases:
        rep = S.certify_ellipticity(op)
        assert rep.elliptic and rep.certified
        assert rep.margin == pytest.approx(margin, abs=1e-12)


def test_first_derivative_rejected():
    for dim in (2, 3):
        rep = S.check_ellipticity(S.partial(dim, 0))
        assert not rep.elliptic and not rep.certified
        assert rep.margin <= 1e-12


def test_dimension_one_is_elliptic():
    rep = S.check_ellipticity(S.partial(1, 0))
    assert rep.elliptic and rep.certified and rep.margin == pytest.approx(1.0)


def test_certification_monotone_under_refinement():
    for op in (S.laplacian(3), S.cauchy_riemann(), S.bilaplacian(2)):
        seen = False
        for n in (2, 4, 8, 16, 32, 64, 128):
            c = S.check_ellipticity(op, n).certified
            assert c or not seen
            seen = seen or c
        assert seen


def test_zero_operator_ellipticity_raises():
    with pytest.raises(ValueError):
        S.check_ellipticity(S.zero_operator(2))


def test_resolvent_cone():
    lap = S.resolvent_cone(S.laplacian(2))
    assert lap["exists_spectral_shift"]
    # the symbol of -Delta is positive, so the shift points away from the positive axis
    assert lap["example_shift"].real < 0
    assert not S.resolvent_cone(S.cauchy_riemann())["exists_spectral_shift"]


def test_covering_radius_bound():
    # every random point of the sphere lies within h of a grid point
    rng = np.random.default_rng(1)
    for dim, n in ((2, 8), (3, 6), (4, 4)):
        pts, h = covering_grid(dim, n)
        x = rng.normal(size=(500, dim))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        d = np.min(np.linalg.norm(x[:, None, :] - pts[None], axis=-1), axis=1)
        assert d.max() <= h + 1e-12


@pytest.mark.parametrize("dim", [2, 3, 4, 5])
def test_sphere_rule_moments(dim):
    pts, w = sphere_rule(dim, 10)
    assert w.sum() == pytest.approx(sphere_area(dim), rel=1e-13)
    # int x_1^2 = |S|/N, int x_1^4 = 3|S|/(N(N+2))
    assert np.sum(w * pts[:, 0] ** 2) == pytest.approx(sphere_area(dim) / dim, rel=1e-12)
    assert np.sum(w * pts[:, -1] ** 4) == pytest.approx(3 * sphere_area(dim) / (dim * (dim + 2)), rel=1e-12)
    assert abs(np.sum(w * pts[:, 0] * pts[:, 1])) < 1e-12


def test_builtin_lookup():
    assert S.builtin_operator("laplacian", 3).allclose(S.laplacian(3))
    with pytest.raises(KeyError):
        S.builtin_operator("nonexistent", 2)
