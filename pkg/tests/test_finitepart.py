from math import gamma, pi

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from ellipticgrowth import symbols as S
from ellipticgrowth.finitepart import (
    FinitePartQuad,
    PolyGaussian,
    SampledTestFunction,
    finite_part_pairing,
)
from ellipticgrowth.polyaction import Polynomial, graded_basis
from ellipticgrowth.sphere import sphere_rule

CASES = [
    ("lap2", S.laplacian(2)),
    ("bil2", S.bilaplacian(2)),
    ("bil3", S.bilaplacian(3)),
    ("lap3", S.laplacian(3)),
    ("cr", S.cauchy_riemann()),
    ("cr2", S.op_power(S.cauchy_riemann(), 2)),
    ("lap2cube", S.op_power(S.laplacian(2), 3)),
]


def gauss_moment(alpha, c):
    """int_{R^N} xi^alpha exp(-c |xi|^2) d xi."""
    out = 1.0
    for a in alpha:
        if a % 2:
            return 0.0
        out *= gamma((a + 1) / 2) / c ** ((a + 1) / 2)
    return out


def poly_gauss_integral(p: Polynomial, c):
    return sum(v * gauss_moment(a, c) for a, v in p.coeffs.items())


def gaussian(dim, c=1.0):
    return PolyGaussian(Polynomial(dim, {(0,) * dim: 1.0}), c)


@pytest.mark.parametrize("name,op", CASES)
def test_division_identity(name, op):
    phi = gaussian(op.dim)
    res = finite_part_pairing(op, phi.times(Polynomial.from_operator(op)))
    assert res.branch == ("direct" if op.order < op.dim else "finite-part")
    assert abs(res.value - pi ** (op.dim / 2)) <= 1e-6


@pytest.mark.parametrize("name,op", CASES)
def test_division_identity_polynomial_weight(name, op):
    N = op.dim
    p = Polynomial(N, {(0,) * N: 1.0, (1,) + (0,) * (N - 1): 0.7, (0,) * (N - 1) + (2,): -0.4})
    phi = PolyGaussian(p, 0.8)
    res = finite_part_pairing(op, phi.times(Polynomial.from_operator(op)))
    assert abs(res.value - poly_gauss_integral(p, 0.8)) <= 1e-6


@pytest.mark.parametrize("name,op", CASES)
def test_doubling_stability(name, op):
    N = op.dim
    p = Polynomial(N, {(0,) * N: 1.0, (1,) * N: 0.3})
    phi = PolyGaussian(p, 0.7)
    a = finite_part_pairing(op, phi)
    b = finite_part_pairing(op, phi, FinitePartQuad().doubled())
    assert abs(a.value - b.value) <= 1e-6


@pytest.mark.parametrize("name,op", [c for c in CASES if c[1].order >= c[1].dim])
def test_vanishing_moment(name, op):
    # xi^alpha / A(xi) is bounded for |alpha| = m, so the pairing is an ordinary integral
    N, m = op.dim, op.order
    pts, w = sphere_rule(N, 64)
    inv = 1 / S.eval_symbol(op, pts)
    for alpha in S.multi_indices(m, N)[:3]:
        sph = np.sum(w * np.prod(pts ** np.array(alpha), axis=1) * inv)
        expect = sph * gamma(N / 2) / 2  # int_0^inf r^{N-1} e^{-r^2} dr
        phi = PolyGaussian(Polynomial(N, {alpha: 1.0}), 1.0)
        got = finite_part_pairing(op, phi).value
        assert abs(got - expect) <= 1e-6


def test_direct_branch_against_radial_quadrature():
    op = S.laplacian(3)
    phi = PolyGaussian(Polynomial(3, {(0, 0, 0): 1.0, (2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0}), 1.0)
    # int phi/|xi|^2 = 4 pi int_0^inf (1 + r^2) e^{-r^2} dr
    oracle = 4 * pi * quad(lambda r: (1 + r * r) * np.exp(-r * r), 0, np.inf)[0]
    res = finite_part_pairing(op, phi)
    assert res.branch == "direct"
    assert abs(res.value - oracle) <= 1e-8


def test_finite_part_branch_diagnostics():
    res = finite_part_pairing(S.bilaplacian(3), gaussian(3))
    assert res.branch == "finite-part"
    assert res.diagnostics["harmonic_number"] == pytest.approx(1.0)
    assert not res.diagnostics["finite_difference_derivatives"]


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([1, 2, 5]), st.floats(-2, 2), st.floats(-2, 2), st.integers(0, 10**6))
def test_linearity(idx, a, b, seed):
    name, op = CASES[idx]
    N = op.dim
    rng = np.random.default_rng(seed)
    basis = graded_basis(2, N)
    p1 = Polynomial(N, dict(zip(basis, rng.normal(size=len(basis)))))
    p2 = Polynomial(N, dict(zip(basis, rng.normal(size=len(basis)))))
    f1 = finite_part_pairing(op, PolyGaussian(p1)).value
    f2 = finite_part_pairing(op, PolyGaussian(p2)).value
    f12 = finite_part_pairing(op, PolyGaussian(p1.scaled(a) + p2.scaled(b))).value
    assert abs(f12 - (a * f1 + b * f2)) <= 1e-9 * (1 + abs(f1) + abs(f2))


def test_radial_derivatives_exact():
    phi = PolyGaussian(Polynomial(2, {(1, 0): 1.0}), 0.5)
    sigma = np.array([[1.0, 0.0], [0.6, 0.8]])
    rho = np.array([0.0, 0.7, 2.0])
    d = phi.radial_derivatives(2, rho, sigma)
    # phi(rho sigma) = s rho e^{-rho^2/2} with s = sigma_1
    f = lambda r: r * np.exp(-r * r / 2)  # noqa: E731
    f1 = lambda r: (1 - r * r) * np.exp(-r * r / 2)  # noqa: E731
    f2 = lambda r: (r**3 - 3 * r) * np.exp(-r * r / 2)  # noqa: E731
    for j, fj in enumerate((f, f1, f2)):
        assert np.allclose(d[j], fj(rho)[:, None] * sigma[:, 0][None, :], atol=1e-14)


def test_sampled_fallback_flagged_and_close():
    op = S.bilaplacian(2)
    fn = lambda x: np.exp(-np.sum(x * x, -1)) * np.sum(x * x, -1) ** 2  # noqa: E731
    res = finite_part_pairing(op, SampledTestFunction(fn, 2, 8.0))
    assert res.diagnostics["finite_difference_derivatives"]
    assert abs(res.value - pi) <= 1e-6


def test_input_errors():
    with pytest.raises(ValueError):
        finite_part_pairing(S.partial(2, 0), gaussian(2))
    with pytest.raises(ValueError):
        finite_part_pairing(S.laplacian(3), gaussian(2))

    class NoDerivs:
        dim = 2
        support_radius = 5.0

    with pytest.raises(ValueError):
        finite_part_pairing(S.laplacian(2), NoDerivs())
