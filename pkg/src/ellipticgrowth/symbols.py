"""Homogeneous constant-coefficient operators and their symbols.

An operator of order ``m`` in ``N`` variables is stored through its symbol
coefficients ``a_alpha`` (``|alpha|_1 = m``) and acts as

    A u = i^m * sum_alpha a_alpha d^alpha u,

so that substituting ``xi`` for the derivatives gives the polynomial symbol
``A(xi) = sum_alpha a_alpha xi^alpha``.  With this normalisation the product of
two operators corresponds to the product of their symbols, and the set of
operators is a commutative ring under :func:`op_add` / :func:`op_multiply`.

Fourier convention used throughout the package: ``F(d_j u) = i xi_j F(u)``,
hence ``F(A u) = (-1)^m A(xi) F(u)`` (see :func:`fourier_symbol`).
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Mapping

import numpy as np

from . import sphere

__all__ = [
    "MultiIndex",
    "multi_indices",
    "ScalarOperator",
    "EllipticityReport",
    "zero_operator",
    "identity_operator",
    "eval_symbol",
    "fourier_symbol",
    "op_add",
    "op_multiply",
    "op_scale",
    "op_power",
    "check_ellipticity",
    "certify_ellipticity",
    "resolvent_cone",
    "laplacian",
    "bilaplacian",
    "cauchy_riemann",
    "cauchy_riemann_conj",
    "partial",
    "BUILTIN_OPERATORS",
    "builtin_operator",
]

MultiIndex = tuple  # tuple[int, ...] of length N


def multi_indices(order: int, dim: int) -> list[tuple[int, ...]]:
    """All multi-indices of length ``dim`` with ``|alpha|_1 == order``.

    Graded-lex order (descending on the first entry), the basis order used by
    :mod:`ellipticgrowth.polyaction`.
    """
    if order < 0:
        return []
    out = []
    for combo in combinations_with_replacement(range(dim), order):
        alpha = [0] * dim
        for j in combo:
            alpha[j] += 1
        out.append(tuple(alpha))
    return out


def _check_index(alpha, dim):
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != dim:
        raise ValueError(f"multi-index {alpha} has length {len(alpha)}, expected {dim}")
    if any(a < 0 for a in alpha):
        raise ValueError(f"multi-index {alpha} has negative entries")
    return alpha


@dataclass(frozen=True)
class ScalarOperator:
    """Homogeneous operator ``i^m sum a_alpha d^alpha`` in ``dim`` variables.

    ``order is None`` marks the zero operator, which is the additive identity
    for every order.  Coefficients below ``1e-300`` in modulus are dropped.
    """

    dim: int
    order: int | None
    coeffs: Mapping[tuple[int, ...], complex] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        clean = {}
        for alpha, c in dict(self.coeffs).items():
            alpha = _check_index(alpha, self.dim)
            c = complex(c)
            if abs(c) > 1e-300:
                clean[alpha] = clean.get(alpha, 0j) + c
        if self.order is None:
            if clean:
                raise ValueError("zero operator cannot carry coefficients")
        else:
            if self.order < 0:
                raise ValueError("order must be >= 0")
            bad = [a for a in clean if sum(a) != self.order]
            if bad:
                raise ValueError(f"coefficients {bad} are not of pure order {self.order}")
            if not clean:
                raise ValueError("nonzero operator needs a nonzero coefficient; use zero_operator")
        object.__setattr__(self, "coeffs", dict(sorted(clean.items(), reverse=True)))

    @property
    def is_zero(self) -> bool:
        return self.order is None

    def __call__(self, xi):
        return eval_symbol(self, xi)

    def __add__(self, other):
        return op_add(self, other)

    def __sub__(self, other):
        return op_add(self, op_scale(other, -1))

    def __mul__(self, other):
        if isinstance(other, ScalarOperator):
            return op_multiply(self, other)
        return op_scale(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return op_scale(self, -1)

    def coeff_array(self) -> tuple[list[tuple[int, ...]], np.ndarray]:
        """Coefficients on the full graded basis of order ``m`` (zeros included)."""
        if self.is_zero:
            return [], np.zeros(0, complex)
        basis = multi_indices(self.order, self.dim)
        return basis, np.array([self.coeffs.get(a, 0j) for a in basis])

    def coeff_norm(self) -> float:
        """Maximum modulus of the coefficients (0 for the zero operator)."""
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def allclose(self, other: "ScalarOperator", atol: float = 1e-12) -> bool:
        if self.dim != other.dim:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self.coeffs.get(k, 0) - other.coeffs.get(k, 0)) <= atol for k in keys)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"ScalarOperator{label}(dim={self.dim}, order={self.order}, terms={len(self.coeffs)})"


def zero_operator(dim: int) -> ScalarOperator:
    return ScalarOperator(dim, None, {}, name="zero")


def identity_operator(dim: int) -> ScalarOperator:
    return ScalarOperator(dim, 0, {(0,) * dim: 1.0}, name="identity")


def _monomials(alphas, xi):
    """Matrix of xi^alpha: rows are points, columns multi-indices."""
    xi = np.asarray(xi, dtype=float)
    pts = np.atleast_2d(xi)
    powers = np.array(alphas, dtype=int).reshape(len(alphas), -1)
    # 0**0 == 1 in numpy, which is what the symbol needs at coordinate zeros
    return np.prod(pts[:, None, :] ** powers[None, :, :], axis=2)


def eval_symbol(op: ScalarOperator, xi) -> complex | np.ndarray:
    """Evaluate ``A(xi) = sum a_alpha xi^alpha``.

    ``xi`` may be a single point of length ``N`` or an array of points with
    shape ``(..., N)``; the result has the matching leading shape.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1:] != (op.dim,):
        raise ValueError(f"point dimension {xi.shape[-1:]} does not match operator dim {op.dim}")
    lead = xi.shape[:-1]
    if op.is_zero:
        out = np.zeros(lead, complex)
    else:
        alphas = list(op.coeffs)
        coef = np.array(list(op.coeffs.values()))
        out = _monomials(alphas, xi.reshape(-1, op.dim)) @ coef
        out = out.reshape(lead)
    return complex(out) if not lead else out


def fourier_symbol(op: ScalarOperator, xi):
    """Multiplier ``sigma_A(xi) = (-1)^m A(xi)`` with ``F(A u) = sigma_A F(u)``."""
    val = eval_symbol(op, xi)
    if op.is_zero or op.order % 2 == 0:
        return val
    return -val


def op_scale(op: ScalarOperator, c) -> ScalarOperator:
    c = complex(c)
    if op.is_zero or c == 0:
        return zero_operator(op.dim)
    return ScalarOperator(op.dim, op.order, {a: c * v for a, v in op.coeffs.items()})


def op_add(a: ScalarOperator, b: ScalarOperator) -> ScalarOperator:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if a.order != b.order:
        raise ValueError(f"cannot add operators of orders {a.order} and {b.order}")
    acc = dict(a.coeffs)
    for k, v in b.coeffs.items():
        acc[k] = acc.get(k, 0j) + v
    scale = max(a.coeff_norm(), b.coeff_norm())
    acc = {k: v for k, v in acc.items() if abs(v) > 1e-15 * scale}
    if not acc:
        return zero_operator(a.dim)
    return ScalarOperator(a.dim, a.order, acc)


def op_multiply(a: ScalarOperator, b: ScalarOperator) -> ScalarOperator:
    """Composition, i.e. convolution of the coefficient tables."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.is_zero or b.is_zero:
        return zero_operator(a.dim)
    acc = defaultdict(complex)
    for ka, va in a.coeffs.items():
        for kb, vb in b.coeffs.items():
            acc[tuple(x + y for x, y in zip(ka, kb))] += va * vb
    scale = a.coeff_norm() * b.coeff_norm()
    acc = {k: v for k, v in acc.items() if abs(v) > 1e-15 * scale}
    if not acc:
        return zero_operator(a.dim)
    return ScalarOperator(a.dim, a.order + b.order, acc)


def op_power(op: ScalarOperator, k: int) -> ScalarOperator:
    out = identity_operator(op.dim)
    for _ in range(k):
        out = op_multiply(out, op)
    return out


# -- ellipticity ---------------------------------------------------------------


@dataclass(frozen=True)
class EllipticityReport:
    elliptic: bool
    margin: float
    certified: bool
    samples_used: int
    lipschitz: float = float("nan")
    covering_radius: float = float("nan")
    tolerance: float = 1e-10

    def as_dict(self):
        return {
            "elliptic": self.elliptic,
            "margin": self.margin,
            "certified": self.certified,
            "samples_used": self.samples_used,
            "lipschitz": self.lipschitz,
            "covering_radius": self.covering_radius,
        }


def symbol_lipschitz(op: ScalarOperator) -> float:
    """Bound on the Lipschitz constant of ``A`` on the closed unit ball.

    ``|grad xi^alpha| <= |alpha|_2 <= m`` for ``|xi| <= 1``, hence
    ``L <= m * sum |a_alpha|``.
    """
    if op.is_zero:
        return 0.0
    return op.order * sum(abs(c) for c in op.coeffs.values())


def check_ellipticity(op: ScalarOperator, refinement: int = 64, tol: float = 1e-10) -> EllipticityReport:
    """Sample ``|A(sigma)|`` on the unit sphere and certify positivity.

    ``refinement`` is the number of angular samples per half turn of the
    hyperspherical product grid.  The verdict is certified when the sampled
    minimum exceeds ``L * h`` with ``L`` from :func:`symbol_lipschitz` and ``h``
    the covering radius of the grid.
    """
    if op.is_zero:
        raise ValueError("ellipticity of the zero operator is undefined")
    pts, h = sphere.covering_grid(op.dim, refinement)
    vals = np.abs(eval_symbol(op, pts))
    vals = np.atleast_1d(vals)
    margin = float(vals.min())
    lip = symbol_lipschitz(op)
    certified = bool(margin - lip * h > 0)
    return EllipticityReport(
        elliptic=margin > tol,
        margin=margin,
        certified=certified,
        samples_used=int(vals.size),
        lipschitz=lip,
        covering_radius=h,
        tolerance=tol,
    )


def certify_ellipticity(op: ScalarOperator, start: int = 16, max_refinement: int = 1024, tol: float = 1e-10):
    """Double the sampling density until the verdict is certified or rejected."""
    n = start
    while True:
        rep = check_ellipticity(op, n, tol)
        if rep.certified or not rep.elliptic or 2 * n > max_refinement:
            return rep
        n *= 2


def resolvent_cone(op: ScalarOperator, refinement: int = 256) -> dict:
    """Describe the cone ``{t A(sigma)}`` swept by the symbol.

    Some ``z`` avoids the range of ``A`` exactly when the arguments of the
    sampled ``A(sigma)`` leave a gap in the circle.  A gap is declared when the
    largest angular gap exceeds the angular resolution implied by the sampling
    (Lipschitz bound divided by the margin, times the covering radius).
    """
    rep = check_ellipticity(op, refinement)
    if not rep.elliptic:
        raise ValueError("resolvent_cone requires an elliptic operator")
    pts, h = sphere.covering_grid(op.dim, refinement)
    vals = np.atleast_1d(eval_symbol(op, pts))
    args = np.sort(np.mod(np.angle(vals), 2 * np.pi))
    gaps = np.diff(np.concatenate([args, [args[0] + 2 * np.pi]]))
    k = int(np.argmax(gaps))
    widest = float(gaps[k])
    # arcsin of (L h / margin) bounds how far the argument can move between samples
    ratio = min(1.0, rep.lipschitz * h / rep.margin)
    resolution = 2 * np.arcsin(ratio)
    exists = widest > max(resolution, 1e-9)
    span_start = float(np.mod(args[k] + widest, 2 * np.pi))
    span = 2 * np.pi - widest
    shift = None
    if exists:
        mid = args[k] + widest / 2
        shift = complex(np.exp(1j * mid))
    return {
        "range_cone_description": {
            "arg_start": span_start,
            "arg_span": span,
            "widest_gap": widest,
            "modulus_min": rep.margin,
            "modulus_max": float(np.abs(vals).max()),
        },
        "exists_spectral_shift": bool(exists),
        "example_shift": shift,
    }


# -- catalog -------------------------------------------------------------------


def laplacian(dim: int) -> ScalarOperator:
    """``-Delta`` (symbol ``|xi|^2``)."""
    coeffs = {}
    for j in range(dim):
        a = [0] * dim
        a[j] = 2
        coeffs[tuple(a)] = 1.0
    return ScalarOperator(dim, 2, coeffs, name="laplacian")


def bilaplacian(dim: int) -> ScalarOperator:
    """``Delta^2`` (symbol ``|xi|^4``)."""
    op = op_multiply(laplacian(dim), laplacian(dim))
    return ScalarOperator(dim, 4, op.coeffs, name="bilaplacian")


def cauchy_riemann(dim: int = 2) -> ScalarOperator:
    """``(d_1 + i d_2)/2`` with symbol ``(-i xi_1 + xi_2)/2``."""
    if dim != 2:
        raise ValueError("cauchy_riemann is defined for dim = 2")
    return ScalarOperator(2, 1, {(1, 0): -0.5j, (0, 1): 0.5}, name="cauchy_riemann")


def cauchy_riemann_conj(dim: int = 2) -> ScalarOperator:
    """``(d_1 - i d_2)/2`` with symbol ``(-i xi_1 - xi_2)/2``."""
    if dim != 2:
        raise ValueError("cauchy_riemann_conj is defined for dim = 2")
    return ScalarOperator(2, 1, {(1, 0): -0.5j, (0, 1): -0.5}, name="cauchy_riemann_conj")


def partial(dim: int, j: int) -> ScalarOperator:
    """First derivative ``d_j`` (0-based ``j``), symbol ``-i xi_j``."""
    a = [0] * dim
    a[j] = 1
    return ScalarOperator(dim, 1, {tuple(a): -1j}, name=f"d{j + 1}")


BUILTIN_OPERATORS = {
    "laplacian": laplacian,
    "bilaplacian": bilaplacian,
    "cauchy_riemann": cauchy_riemann,
    "cauchy_riemann_sq": lambda dim=2: op_power(cauchy_riemann(dim), 2),
    "d1": lambda dim: partial(dim, 0),
}


def builtin_operator(name: str, dim: int) -> ScalarOperator:
    try:
        factory = BUILTIN_OPERATORS[name]
    except KeyError:
        raise KeyError(f"unknown operator {name!r}; known: {sorted(BUILTIN_OPERATORS)}") from None
    return factory(dim)
