"""Douglis-Nirenberg systems over the ring of homogeneous operators."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .symbols import (
    EllipticityReport,
    ScalarOperator,
    check_ellipticity,
    eval_symbol,
    fourier_symbol,
    identity_operator,
    laplacian,
    multi_indices,
    op_add,
    op_multiply,
    op_scale,
    partial,
    zero_operator,
)

__all__ = [
    "DNSystem",
    "dn_validate",
    "dn_det",
    "dn_cofactor",
    "verify_cofactor_identity",
    "check_dn_ellipticity",
    "stokes",
    "diagonal_system",
    "random_dn_system",
]


def _perm_sign(p):
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class DNSystem:
    """``n x n`` matrix of homogeneous operators with DN weights ``m`` and ``kappa``.

    Entry ``(j, k)`` must have order ``m_k + kappa_k - kappa_j`` and vanish when
    that number is negative.  Construction does not enforce this; call
    :func:`dn_validate`.
    """

    dim: int
    m_weights: tuple[int, ...]
    k_weights: tuple[int, ...]
    entries: tuple[tuple[ScalarOperator, ...], ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "m_weights", tuple(int(v) for v in self.m_weights))
        object.__setattr__(self, "k_weights", tuple(int(v) for v in self.k_weights))
        object.__setattr__(self, "entries", tuple(tuple(row) for row in self.entries))
        n = len(self.m_weights)
        if len(self.k_weights) != n or len(self.entries) != n or any(len(r) != n for r in self.entries):
            raise ValueError("DN system must be square with weight vectors of matching length")

    @property
    def n(self) -> int:
        return len(self.m_weights)

    @property
    def total_order(self) -> int:
        return sum(self.m_weights)

    def entry_order(self, j: int, k: int) -> int:
        """``m_jk = m_k + kappa_k - kappa_j`` (0-based indices)."""
        return self.m_weights[k] + self.k_weights[k] - self.k_weights[j]

    def order_table(self) -> np.ndarray:
        return np.array([[self.entry_order(j, k) for k in range(self.n)] for j in range(self.n)])

    def shifted(self, iota: int) -> "DNSystem":
        return DNSystem(self.dim, self.m_weights, tuple(k + iota for k in self.k_weights), self.entries, self.name)

    def symbol_matrix(self, xi) -> np.ndarray:
        """``[A_jk(xi)]`` with shape ``(..., n, n)``."""
        xi = np.asarray(xi, dtype=float)
        rows = [[np.asarray(eval_symbol(e, xi)) for e in row] for row in self.entries]
        return np.moveaxis(np.array(rows), (0, 1), (-2, -1))

    def fourier_symbol_matrix(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        rows = [[np.asarray(fourier_symbol(e, xi)) for e in row] for row in self.entries]
        return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


def dn_validate(sys: DNSystem) -> list[str]:
    """List every violation of the DN order structure (empty when valid)."""
    problems = []
    for j, row in enumerate(sys.entries):
        for k, e in enumerate(row):
            if e.dim != sys.dim:
                problems.append(f"({j + 1},{k + 1}): dimension {e.dim} != {sys.dim}")
                continue
            mjk = sys.entry_order(j, k)
            if e.is_zero:
                continue
            if mjk < 0:
                problems.append(f"({j + 1},{k + 1}): must vanish since m_jk = {mjk} < 0")
            elif e.order != mjk:
                problems.append(f"({j + 1},{k + 1}): order {e.order} != m_jk = {mjk}")
    if sys.total_order < 0:
        problems.append(f"total order M = {sys.total_order} < 0")
    # m_jk depends on kappa differences only
    if not np.array_equal(sys.shifted(7).order_table(), sys.order_table()):
        problems.append("order table changes under kappa -> kappa + 1")
    return problems


def _require_valid(sys):
    problems = dn_validate(sys)
    if problems:
        raise ValueError("invalid DN system: " + "; ".join(problems))


def _ring_det(matrix, dim):
    n = len(matrix)
    if n == 0:
        return identity_operator(dim)
    total = zero_operator(dim)
    for p in permutations(range(n)):
        term = identity_operator(dim)
        for i in range(n):
            term = op_multiply(term, matrix[i][p[i]])
            if term.is_zero:
                break
        if term.is_zero:
            continue
        total = op_add(total, term if _perm_sign(p) > 0 else op_scale(term, -1))
    return total


def dn_det(sys: DNSystem) -> ScalarOperator:
    """Determinant in the operator ring (Leibniz expansion)."""
    _require_valid(sys)
    return _ring_det(sys.entries, sys.dim)


def dn_cofactor(sys: DNSystem, j: int, k: int) -> ScalarOperator:
    """Cofactor ``C_jk`` with 1-based indices, of order ``M - m_k - kappa_k + kappa_j``."""
    _require_valid(sys)
    if not (1 <= j <= sys.n and 1 <= k <= sys.n):
        raise IndexError(f"cofactor index ({j},{k}) outside 1..{sys.n}")
    minor = [[e for c, e in enumerate(row) if c != k - 1] for r, row in enumerate(sys.entries) if r != j - 1]
    c = _ring_det(minor, sys.dim)
    return c if (j + k) % 2 == 0 else op_scale(c, -1)


def verify_cofactor_identity(sys: DNSystem) -> dict:
    """Residual of ``sum_l A_jl C_kl - delta_jk det A`` over all ``(j, k)``.

    Coefficient tables are accumulated without order bookkeeping so that a
    faulty expansion shows up as a residual rather than an exception.
    """
    _require_valid(sys)
    det = dn_det(sys)
    n = sys.n
    cof = [[dn_cofactor(sys, a + 1, b + 1) for b in range(n)] for a in range(n)]
    worst = 0.0
    scale = det.coeff_norm()
    for j in range(n):
        for k in range(n):
            acc = defaultdict(complex)
            for l in range(n):
                prod = op_multiply(sys.entries[j][l], cof[k][l])
                scale = max(scale, prod.coeff_norm())
                for alpha, c in prod.coeffs.items():
                    acc[alpha] += c
            if j == k:
                for alpha, c in det.coeffs.items():
                    acc[alpha] -= c
            worst = max(worst, max((abs(v) for v in acc.values()), default=0.0))
    return {
        "max_residual": worst,
        "relative_residual": worst / scale if scale > 0 else worst,
        "det_order": det.order,
    }


def check_dn_ellipticity(sys: DNSystem, refinement: int = 64) -> EllipticityReport:
    det = dn_det(sys)
    if det.is_zero:
        return EllipticityReport(False, 0.0, False, 0)
    return check_ellipticity(det, refinement)


# -- builders ------------------------------------------------------------------


def stokes(dim: int, kappa: int = 0) -> DNSystem:
    """Stokes system ``-Delta u + grad p = f, div u = g`` (n = N + 1).

    Weights ``m = (2,...,2,0)`` and ``kappa = (k,...,k,k+1)``.
    """
    n = dim + 1
    lap = laplacian(dim)
    rows = []
    for j in range(n):
        row = []
        for k in range(n):
            if j < dim and k < dim:
                row.append(lap if j == k else zero_operator(dim))
            elif j < dim:
                row.append(partial(dim, j))
            elif k < dim:
                row.append(partial(dim, k))
            else:
                row.append(zero_operator(dim))
        rows.append(row)
    return DNSystem(dim, (2,) * dim + (0,), (kappa,) * dim + (kappa + 1,), rows, name=f"stokes{dim}")


def diagonal_system(ops, k_weights=None) -> DNSystem:
    """Diagonal system ``diag(A_1, ..., A_n)``; ``m_j`` is the order of ``A_j``."""
    ops = list(ops)
    dim = ops[0].dim
    n = len(ops)
    kw = tuple(k_weights) if k_weights is not None else (0,) * n
    rows = [[ops[j] if j == k else zero_operator(dim) for k in range(n)] for j in range(n)]
    return DNSystem(dim, tuple(op.order for op in ops), kw, rows, name="diagonal")


def random_operator(rng: np.random.Generator, dim: int, order: int, density: float = 1.0) -> ScalarOperator:
    basis = multi_indices(order, dim)
    c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    keep = rng.random(len(basis)) < density
    keep[rng.integers(len(basis))] = True
    return ScalarOperator(dim, order, {a: v for a, v, f in zip(basis, c, keep) if f})


def random_dn_system(rng: np.random.Generator, n: int = 2, dim: int = 2, max_weight: int = 2) -> DNSystem:
    """Random valid DN system with complex coefficients."""
    m = rng.integers(0, max_weight + 1, size=n)
    kap = rng.integers(0, max_weight + 1, size=n)
    rows = []
    for j in range(n):
        row = []
        for k in range(n):
            mjk = int(m[k] + kap[k] - kap[j])
            row.append(random_operator(rng, dim, mjk) if mjk >= 0 else zero_operator(dim))
        rows.append(row)
    return DNSystem(dim, tuple(m), tuple(kap), rows, name="random")
