"""Fourier-side pairing with the fundamental solution of a homogeneous operator.

For an elliptic ``A`` of order ``m`` in ``N`` variables the distribution
``E_hat`` solving ``A(xi) E_hat = 1`` acts on a test function ``phi`` through
the sphere average

    psi_phi(rho) = int_{S^{N-1}} A(sigma)^{-1} phi(rho sigma) dsigma.

If ``m < N`` it is the locally integrable function ``A^{-1}`` and the pairing is
``int_0^inf rho^{N-1-m} psi_phi(rho) drho``.  If ``m >= N`` that integral
diverges at 0 and is replaced by its finite part (``k = m - N``)

    <E_hat, phi> = (1/k!) [ -int_0^inf log(rho) psi^{(k+1)}(rho) drho
                            + (sum_{j=1}^{k} 1/j) psi^{(k)}(0) ].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy.special import roots_legendre

from .polyaction import Polynomial
from .sphere import sphere_rule
from .symbols import ScalarOperator, check_ellipticity, eval_symbol

__all__ = [
    "PolyGaussian",
    "SampledTestFunction",
    "FinitePartQuad",
    "FinitePartResult",
    "finite_part_pairing",
]


@dataclass(frozen=True)
class PolyGaussian:
    """``phi(xi) = P(xi) exp(-c |xi|^2)``, truncated at ``support``.

    ``support`` defaults to the radius where the Gaussian factor drops below
    ``1e-40``, so the truncation is invisible in double precision.  Radial
    derivatives ``d^j/drho^j phi(rho sigma)`` are exact.
    """

    poly: Polynomial
    c: float = 1.0
    support: float | None = None

    @property
    def dim(self) -> int:
        return self.poly.dim

    @property
    def support_radius(self) -> float:
        if self.support is not None:
            return float(self.support)
        return float(np.sqrt(40 * np.log(10) / self.c)) + 1.0

    def __call__(self, xi):
        xi = np.asarray(xi, float)
        return self.poly(xi) * np.exp(-self.c * np.sum(xi * xi, axis=-1))

    def times(self, p: Polynomial) -> "PolyGaussian":
        return PolyGaussian(self.poly * p, self.c, self.support)

    def _radial_coeffs(self, sigma):
        """Coefficients ``Q_k(sigma)`` with ``P(rho sigma) = sum_k Q_k rho^k``."""
        deg = max(self.poly.degree, 0)
        Q = np.zeros((deg + 1, len(sigma)), complex)
        for alpha, a in self.poly.coeffs.items():
            Q[sum(alpha)] += a * np.prod(sigma ** np.array(alpha), axis=-1)
        return Q

    def radial_derivatives(self, jmax: int, rho, sigma) -> np.ndarray:
        """``d^j/drho^j phi(rho sigma)`` for ``j = 0..jmax``; shape ``(jmax+1, len(rho), len(sigma))``."""
        rho = np.asarray(rho, float)
        sigma = np.asarray(sigma, float)
        Q = self._radial_coeffs(sigma)
        gauss = np.exp(-self.c * rho**2)
        out = np.empty((jmax + 1, rho.size, len(sigma)), complex)
        for j in range(jmax + 1):
            powers = rho[:, None] ** np.arange(Q.shape[0])[None, :]
            out[j] = (powers @ Q) * gauss[:, None]
            # (Q e^{-c rho^2})' = (Q' - 2 c rho Q) e^{-c rho^2}
            dQ = np.zeros((Q.shape[0] + 1, Q.shape[1]), complex)
            dQ[: Q.shape[0] - 1] += Q[1:] * np.arange(1, Q.shape[0])[:, None]
            dQ[1:] -= 2 * self.c * Q
            Q = dQ
        return out


@dataclass(frozen=True)
class SampledTestFunction:
    """Test function known only through point values.

    Radial derivatives come from central differences with one Richardson step;
    results that depend on them are flagged in the diagnostics.
    """

    func: object
    dim: int
    support_radius: float
    step: float = 1e-2

    def __call__(self, xi):
        return self.func(np.asarray(xi, float))

    def radial_derivatives(self, jmax: int, rho, sigma) -> np.ndarray:
        rho = np.asarray(rho, float)
        sigma = np.asarray(sigma, float)

        def g(r):
            return self.func(r[:, None, None] * sigma[None, :, :])

        def diff(j, h):
            # j-th central difference; for rho < j h/2 the stencil reaches negative
            # radii, which is fine since phi is defined on all of R^N
            acc = 0
            for i in range(j + 1):
                acc = acc + (-1) ** i * _binom(j, i) * g(rho + (j / 2 - i) * h)
            return acc / h**j

        out = np.empty((jmax + 1, rho.size, len(sigma)), complex)
        out[0] = g(rho)
        for j in range(1, jmax + 1):
            h = self.step
            d1, d2 = diff(j, h), diff(j, h / 2)
            out[j] = (4 * d2 - d1) / 3
        return out


def _binom(n, k):
    return factorial(n) // (factorial(k) * factorial(n - k))


@dataclass(frozen=True)
class FinitePartQuad:
    """Sphere rule order and composite Gauss-Legendre radial panels.

    ``[0, rho_supp]`` is split into ``panels`` uniform panels; the first one is
    further split geometrically (``grading_levels``, ratio ``grading_ratio``)
    towards 0 to absorb the logarithm.
    """

    sphere_order: int = 24
    radial_nodes: int = 20
    panels: int = 8
    grading_levels: int = 24
    grading_ratio: float = 0.2

    def doubled(self) -> "FinitePartQuad":
        return FinitePartQuad(2 * self.sphere_order, 2 * self.radial_nodes, self.panels, self.grading_levels, self.grading_ratio)


@dataclass
class FinitePartResult:
    value: complex
    branch: str  # "direct" (m < N) or "finite-part" (m >= N)
    diagnostics: dict = field(default_factory=dict)


def _radial_nodes(rho_s, quad: FinitePartQuad):
    edges = np.linspace(0.0, rho_s, quad.panels + 1)
    first = edges[1] * quad.grading_ratio ** np.arange(quad.grading_levels + 1)
    edges = np.concatenate([[0.0], first[::-1], edges[2:]])
    t, w = roots_legendre(quad.radial_nodes)
    rs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        rs.append(0.5 * (b - a) * t + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(rs), np.concatenate(ws)


def _psi_derivs(op, phi, jmax, rho, quad):
    pts, w = sphere_rule(op.dim, quad.sphere_order)
    inv_a = 1.0 / np.asarray(eval_symbol(op, pts))
    d = phi.radial_derivatives(jmax, rho, pts)
    return d @ (w * inv_a)  # shape (jmax+1, len(rho))


def finite_part_pairing(op: ScalarOperator, phi, quad: FinitePartQuad | None = None) -> FinitePartResult:
    """``<E_hat, phi>`` for the fundamental solution of ``op`` (see module docstring)."""
    quad = quad or FinitePartQuad()
    rep = check_ellipticity(op, 64)
    if not rep.elliptic:
        raise ValueError("finite_part_pairing requires an elliptic operator")
    if getattr(phi, "dim", op.dim) != op.dim:
        raise ValueError("test function dimension does not match the operator")
    if not hasattr(phi, "radial_derivatives"):
        raise ValueError("test function must provide radial_derivatives(j, rho, sigma)")
    m, N = op.order, op.dim
    rho_s = phi.support_radius
    rho, w = _radial_nodes(rho_s, quad)
    diag = {
        "sphere_order": quad.sphere_order,
        "radial_nodes": int(rho.size),
        "support_radius": rho_s,
        "finite_difference_derivatives": isinstance(phi, SampledTestFunction),
    }
    if m < N:
        psi = _psi_derivs(op, phi, 0, rho, quad)[0]
        value = complex(np.sum(w * rho ** (N - 1 - m) * psi))
        return FinitePartResult(value, "direct", diag)
    k = m - N
    psi = _psi_derivs(op, phi, k + 1, rho, quad)[k + 1]
    psi0 = _psi_derivs(op, phi, k, np.zeros(1), quad)[k, 0]
    harmonic = sum(1.0 / j for j in range(1, k + 1))
    integral = complex(np.sum(w * np.log(rho) * psi))
    value = (-integral + harmonic * psi0) / factorial(k)
    diag.update({"harmonic_number": harmonic, "psi_k_at_0": complex(psi0), "log_integral": integral})
    return FinitePartResult(complex(value), "finite-part", diag)
