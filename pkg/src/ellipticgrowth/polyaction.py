"""Operators acting on polynomial spaces P_d.

Polynomials are coefficient tables over the graded-lex monomial basis
``x^alpha``.  The action of ``A = i^m sum a_alpha d^alpha`` is exact
differentiation, so the matrices built here are integer combinatorics times
the operator coefficients.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from math import comb, factorial
from typing import Mapping

import numpy as np

from .symbols import ScalarOperator, check_ellipticity, multi_indices

__all__ = [
    "Polynomial",
    "PolyMap",
    "KernelBasis",
    "FormulaViolation",
    "nu",
    "graded_basis",
    "poly_apply",
    "operator_matrix",
    "harmonic_space",
    "poly_preimage",
    "surjectivity_check",
    "numeric_rank",
]

RANK_RTOL = 1e-8


class FormulaViolation(ArithmeticError):
    """A dimension or solvability statement failed numerically."""


def nu(ell: int, dim: int) -> int:
    """Number of multi-indices of order ``ell`` in ``dim`` variables."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if ell < 0:
        return 0
    return comb(dim + ell - 1, ell)


def graded_basis(degree: int, dim: int) -> list[tuple[int, ...]]:
    """Monomials of P_degree, degree 0 first; empty for ``degree < 0``."""
    out = []
    for ell in range(degree + 1):
        out.extend(multi_indices(ell, dim))
    return out


@dataclass(frozen=True)
class Polynomial:
    dim: int
    coeffs: Mapping[tuple[int, ...], complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for a, c in dict(self.coeffs).items():
            a = tuple(int(v) for v in a)
            if len(a) != self.dim or min(a, default=0) < 0:
                raise ValueError(f"bad exponent {a} for dim {self.dim}")
            c = complex(c)
            if c != 0:
                clean[a] = clean.get(a, 0j) + c
        object.__setattr__(self, "coeffs", clean)

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.coeffs), default=-1)

    def vector(self, degree: int | None = None) -> np.ndarray:
        """Coefficients on :func:`graded_basis` of the given degree."""
        d = self.degree if degree is None else degree
        if self.degree > d:
            raise ValueError(f"polynomial of degree {self.degree} does not fit in P_{d}")
        return np.array([self.coeffs.get(a, 0j) for a in graded_basis(d, self.dim)], dtype=complex)

    @classmethod
    def from_vector(cls, dim: int, degree: int, vec, drop: float = 0.0) -> "Polynomial":
        basis = graded_basis(degree, dim)
        vec = np.asarray(vec)
        return cls(dim, {a: c for a, c in zip(basis, vec) if abs(c) > drop})

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1], complex)
        if not self.coeffs:
            return out
        deg = max(max(a) for a in self.coeffs)
        # coordinate power tables, reused across monomials
        pw = [[np.ones(x.shape[:-1])] for _ in range(self.dim)]
        for j in range(self.dim):
            for _ in range(deg):
                pw[j].append(pw[j][-1] * x[..., j])
        for a, c in self.coeffs.items():
            term = pw[0][a[0]]
            for j in range(1, self.dim):
                if a[j]:
                    term = term * pw[j][a[j]]
            out += c * term
        return out

    def coeff_norm(self) -> float:
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values())))

    def __add__(self, other):
        acc = dict(self.coeffs)
        for a, c in other.coeffs.items():
            acc[a] = acc.get(a, 0j) + c
        return Polynomial(self.dim, acc)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scaled(other)
        acc = defaultdict(complex)
        for a, c in self.coeffs.items():
            for b, d in other.coeffs.items():
                acc[tuple(x + y for x, y in zip(a, b))] += c * d
        return Polynomial(self.dim, acc)

    @classmethod
    def from_operator(cls, op: ScalarOperator) -> "Polynomial":
        """The symbol ``A(xi)`` as a polynomial."""
        return cls(op.dim, op.coeffs)

    def scaled(self, c) -> "Polynomial":
        return Polynomial(self.dim, {a: c * v for a, v in self.coeffs.items()})

    def gradient(self) -> list["Polynomial"]:
        out = []
        for j in range(self.dim):
            acc = {}
            for a, c in self.coeffs.items():
                if a[j]:
                    b = list(a)
                    b[j] -= 1
                    acc[tuple(b)] = c * a[j]
            out.append(Polynomial(self.dim, acc))
        return out


def _derivative_factor(beta, alpha):
    """d^alpha x^beta = factor * x^(beta - alpha); factor 0 when alpha > beta."""
    f = 1
    for b, a in zip(beta, alpha):
        if a > b:
            return 0
        f *= factorial(b) // factorial(b - a)
    return f


def poly_apply(op: ScalarOperator, p: Polynomial) -> Polynomial:
    """Apply ``i^m sum a_alpha d^alpha`` to ``p`` exactly."""
    if op.dim != p.dim:
        raise ValueError(f"dimension mismatch: operator {op.dim}, polynomial {p.dim}")
    if op.is_zero:
        return Polynomial(p.dim)
    pref = 1j**op.order
    acc = defaultdict(complex)
    for beta, c in p.coeffs.items():
        for alpha, a in op.coeffs.items():
            f = _derivative_factor(beta, alpha)
            if f:
                acc[tuple(b - x for b, x in zip(beta, alpha))] += pref * a * f * c
    return Polynomial(p.dim, acc)


@dataclass(frozen=True)
class PolyMap:
    """Matrix of an operator from P_d to P_{d-m} in graded monomial bases."""

    source_degree: int
    target_degree: int
    dim: int
    order: int
    matrix: np.ndarray

    @property
    def source_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def target_dim(self) -> int:
        return self.matrix.shape[0]

    def block(self, ell: int) -> np.ndarray:
        """Restriction to homogeneous degree ``ell`` -> ``ell - m``."""
        c0 = sum(nu(k, self.dim) for k in range(ell))
        r0 = sum(nu(k, self.dim) for k in range(ell - self.order))
        return self.matrix[r0 : r0 + nu(ell - self.order, self.dim), c0 : c0 + nu(ell, self.dim)]


def operator_matrix(op: ScalarOperator, d: int) -> PolyMap:
    if d < 0:
        raise ValueError("degree must be >= 0")
    m = 0 if op.is_zero else op.order
    src = graded_basis(d, op.dim)
    tgt = graded_basis(d - m, op.dim)
    row = {a: i for i, a in enumerate(tgt)}
    mat = np.zeros((len(tgt), len(src)), complex)
    if not op.is_zero:
        pref = 1j**m
        for col, beta in enumerate(src):
            for alpha, a in op.coeffs.items():
                f = _derivative_factor(beta, alpha)
                if f:
                    mat[row[tuple(b - x for b, x in zip(beta, alpha))], col] += pref * a * f
    return PolyMap(d, d - m, op.dim, m, mat)


def numeric_rank(mat: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


@dataclass(frozen=True)
class KernelBasis:
    """Orthonormal basis of the homogeneous degree-``ell`` kernel of an operator."""

    dim: int
    ell: int
    order: int
    monomials: list
    vectors: np.ndarray  # columns, orthonormal in coefficient space
    formula_dim: int
    elliptic: bool

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    @property
    def polynomials(self) -> list[Polynomial]:
        return [Polynomial(self.dim, dict(zip(self.monomials, v))) for v in self.vectors.T]


def harmonic_space(op: ScalarOperator, ell: int, rtol: float = RANK_RTOL) -> KernelBasis:
    """Homogeneous degree-``ell`` polynomials annihilated by ``op``.

    For elliptic ``op`` the dimension must equal ``nu(ell, N) - nu(ell - m, N)``;
    otherwise the kernel is returned without that check.
    """
    if ell < 0:
        raise ValueError("ell must be >= 0")
    elliptic = check_ellipticity(op).elliptic
    monos = multi_indices(ell, op.dim)
    block = operator_matrix(op, ell).block(ell)
    if block.shape[0] == 0:
        vectors = np.eye(len(monos), dtype=complex)
    else:
        _, s, vh = np.linalg.svd(block)
        rank = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
        vectors = vh[rank:].conj().T
    formula = nu(ell, op.dim) - nu(ell - op.order, op.dim)
    if elliptic and vectors.shape[1] != formula:
        raise FormulaViolation(
            f"kernel dimension {vectors.shape[1]} != nu({ell},{op.dim}) - nu({ell - op.order},{op.dim}) = {formula}"
        )
    return KernelBasis(op.dim, ell, op.order, monos, vectors, formula, elliptic)


def poly_preimage(op: ScalarOperator, pi: Polynomial, target_degree: int, tol: float = 1e-10) -> Polynomial:
    """Minimum-norm ``w`` in P_target_degree with ``op(w) = pi``.

    Solved degree by degree (the operator maps degree ``l`` into ``l - m``).
    """
    if op.dim != pi.dim:
        raise ValueError("dimension mismatch")
    m = op.order
    if pi.degree > target_degree - m:
        raise ValueError(f"deg pi = {pi.degree} exceeds target_degree - m = {target_degree - m}")
    if pi.degree < 0:
        return Polynomial(op.dim)
    pmap = operator_matrix(op, target_degree)
    rhs = pi.vector(target_degree - m)
    sol = np.zeros(pmap.source_dim, complex)
    r0 = 0
    c0 = sum(nu(k, op.dim) for k in range(m))
    for j in range(target_degree - m + 1):
        nr, nc = nu(j, op.dim), nu(j + m, op.dim)
        block = pmap.matrix[r0 : r0 + nr, c0 : c0 + nc]
        b = rhs[r0 : r0 + nr]
        if np.any(b):
            sol[c0 : c0 + nc] = np.linalg.lstsq(block, b, rcond=None)[0]
        r0 += nr
        c0 += nc
    w = Polynomial.from_vector(op.dim, target_degree, sol)
    resid = (poly_apply(op, w) - pi).coeff_norm()
    if resid > tol * max(pi.coeff_norm(), 1e-300):
        raise FormulaViolation(f"no polynomial preimage: residual {resid:.3e}")
    return w


def surjectivity_check(op: ScalarOperator, kappa: int) -> dict:
    """Rank of ``op: P_{m+kappa-1} -> P_{kappa-1}`` against ``dim P_{kappa-1}``."""
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    expected = sum(nu(ell, op.dim) for ell in range(kappa))
    d = op.order + kappa - 1
    rank = 0 if d < 0 else numeric_rank(operator_matrix(op, d).matrix)
    return {"rank": rank, "expected_rank": expected, "pass": rank == expected}
