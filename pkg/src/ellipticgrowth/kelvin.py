"""Kelvin transform and the exterior Dirichlet problem outside the unit ball.

The inversion ``y = x/|x|^2`` maps ``Omega = {|x| > 1}`` onto the punctured
unit ball.  With ``h^K(y) = |y|^{2-N} h(y/|y|^2)`` the exterior problem

    Delta u = f in Omega,  u = g on |x| = 1

becomes ``Delta u^K = |y|^{-4} f^K`` in the ball with ``u^K = g`` on the
sphere.  The ball problem is solved by second-order finite differences with
Shortley-Weller stencils at the curved boundary and mapped back.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import pyamg
import scipy.sparse as sp
from scipy.integrate import quad as _quad
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import gmres

from .growth import AnalyticField, QuadratureSpec, RadiusLadder, ball_norm, ball_norms, classify, fit_exponent
from .sphere import sphere_rule

__all__ = [
    "SolverError",
    "WeightCheckError",
    "ExteriorDomain",
    "BoundaryData",
    "TransformedData",
    "BallSolution",
    "ExteriorSolution",
    "invert_point",
    "kelvin_transform",
    "transform_data",
    "solve_ball_dirichlet",
    "exterior_solve",
    "radial_oracle",
    "jacobian_check",
    "grid_convergence",
]


class SolverError(RuntimeError):
    """The sparse linear solve did not reach its tolerance."""


class WeightCheckError(ValueError):
    """The source fails the weighted integrability hypothesis."""


def invert_point(x):
    """``x / |x|^2`` along the last axis; raises at the origin."""
    x = np.asarray(x, float)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    if np.any(r2 == 0):
        raise ValueError("inversion is undefined at x = 0")
    return x / r2


def kelvin_transform(h: AnalyticField, dim: int | None = None) -> AnalyticField:
    """``h^K(y) = |y|^{2-N} h(y/|y|^2)``.  Evaluation at ``y = 0`` raises."""
    N = h.dim if dim is None else dim
    if N != h.dim:
        raise ValueError("dimension mismatch")
    if N < 3:
        raise ValueError("the Kelvin transform here is for N >= 3")
    f = h.evaluator

    def ev(y):
        y = np.asarray(y, float)
        r = np.linalg.norm(y, axis=-1)
        return r ** (2 - N) * f(invert_point(y))

    return AnalyticField(N, ev, label=f"K[{h.label}]")


@dataclass(frozen=True)
class ExteriorDomain:
    """Exterior of the closed unit ball; ``Omega_R = B_R`` minus the hole."""

    dim: int = 3

    def __post_init__(self):
        if self.dim < 3:
            raise ValueError("exterior problems are supported for N >= 3")

    def contains(self, x) -> np.ndarray:
        return np.linalg.norm(np.asarray(x, float), axis=-1) > 1

    def omega_R(self, x, R) -> np.ndarray:
        r = np.linalg.norm(np.asarray(x, float), axis=-1)
        return (r > 1) & (r < R)


def _zero(x):
    return np.zeros(np.asarray(x).shape[:-1])


@dataclass(frozen=True)
class BoundaryData:
    """Boundary values ``g`` on the unit sphere and a source ``f`` on Omega.

    ``q`` is the exponent of the weighted hypothesis
    ``|x|^{(N+2) - 2N/q} f in L^q(Omega)``.
    """

    dim: int = 3
    g: Callable = field(default=lambda x: np.ones(np.asarray(x).shape[:-1]))
    f: Callable | None = None
    q: float = 2.0
    label: str = ""

    def weight_check(self, ladder: RadiusLadder | None = None, quad: QuadratureSpec | None = None, tol: float = 0.05) -> dict:
        """Estimate finiteness of the weighted norm from its growth over ``Omega_R``.

        The norms over ``Omega_R`` are finite iff their fitted growth rate is
        negative (they converge) or they vanish identically.
        """
        if self.f is None:
            return {"finite": True, "growth_rate": -np.inf, "norm_estimate": 0.0}
        N, q = self.dim, float(self.q)
        expo = (N + 2) - (0.0 if np.isinf(q) else 2 * N / q)
        f = self.f
        w = AnalyticField(N, lambda x: np.linalg.norm(x, axis=-1) ** expo * f(x), label="weighted f")
        ladder = ladder or RadiusLadder(2.0, 2.0, 12)
        norms = ball_norms(w, q, ladder.radii, quad, r_inner=1.0)
        if not np.any(norms > 0):
            return {"finite": True, "growth_rate": -np.inf, "norm_estimate": 0.0}
        # the increments of ||w||_{q,Omega_R}^q must decay geometrically
        if np.isinf(q):
            slope, _ = fit_exponent(ladder.radii, norms, N, q)
            finite = slope <= tol
        else:
            tot = norms**q
            inc = np.diff(tot)
            if inc[-1] <= 1e-12 * tot[-1]:
                # converged to machine precision
                slope, finite = -np.inf, True
            else:
                k = len(inc) // 2
                slope = np.polyfit(np.log(ladder.radii[1:][-k:]), np.log(np.maximum(inc[-k:], 1e-300)), 1)[0]
                finite = slope < -tol
        return {"finite": bool(finite), "growth_rate": float(slope), "norm_estimate": float(norms[-1])}


@dataclass
class TransformedData:
    dim: int
    f_K_weighted: Callable  # |y|^{-4} f^K on the punctured ball
    g_K: Callable  # on the unit sphere, equal to g
    q: float


def transform_data(data: BoundaryData, check: bool = True) -> TransformedData:
    """Ball data ``(|y|^{-4} f^K, g^K = g)`` of the inverted problem."""
    N = data.dim
    if check:
        rep = data.weight_check()
        if not rep["finite"]:
            raise WeightCheckError(
                f"source violates the hypothesis |x|^((N+2)-2N/q) f in L^q(Omega) for q = {data.q} "
                f"(growth rate {rep['growth_rate']:.3g})"
            )
    if data.f is None:
        fk = _zero
    else:
        f = data.f

        def fk(y):
            y = np.asarray(y, float)
            r = np.linalg.norm(y, axis=-1)
            return r ** (-2 - N) * f(invert_point(y))

    return TransformedData(N, fk, data.g, data.q)


@dataclass
class BallSolution:
    """Finite-difference solution on ``[-1, 1]^N`` restricted to the unit ball.

    ``values`` holds ``u^K`` at interior nodes and the radially projected
    boundary data at nodes outside the ball, so that multilinear interpolation
    is defined everywhere in the cube.
    """

    dim: int
    n: int
    values: np.ndarray
    interior: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def h(self) -> float:
        return 2.0 / (self.n - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.n)

    def interpolator(self):
        return RegularGridInterpolator((self.axis,) * self.dim, self.values, method="linear")

    def __call__(self, y):
        y = np.asarray(y, float)
        return self.interpolator()(np.clip(y.reshape(-1, self.dim), -1, 1)).reshape(y.shape[:-1])


def _origin_value(fk, dim, h):
    """Limit of ``fk`` at 0 if it extends continuously, else ``None``."""
    dirs = np.vstack([np.eye(dim), -np.eye(dim), np.ones((1, dim)) / np.sqrt(dim)])
    with np.errstate(all="ignore"):
        a = np.asarray(fk(1e-6 * h * dirs), float)
        b = np.asarray(fk(1e-8 * h * dirs), float)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        return None
    vals = np.concatenate([a, b])
    if np.ptp(vals) > 1e-6 * (1 + np.abs(vals).max()):
        return None
    return float(vals.mean())


def solve_ball_dirichlet(fk, g, n: int = 65, dim: int = 3, tol: float = 1e-11) -> BallSolution:
    """Solve ``Delta u = fk`` in the unit ball, ``u = g`` on the sphere.

    ``n`` nodes per axis on ``[-1, 1]^N``.  Nodes within ``1e-9 h`` of the
    sphere are treated as boundary nodes.  A neighbour outside the ball is
    replaced by the sphere crossing on that grid line (Shortley-Weller), where
    ``g`` is evaluated exactly.
    """
    if dim != 3 and dim != 2:
        raise ValueError("the finite-difference solver supports N = 2 and N = 3")
    if n < 5 or n % 2 == 0:
        raise ValueError("n must be odd and >= 5 so that the origin is a node")
    h = 2.0 / (n - 1)
    ax = np.linspace(-1.0, 1.0, n)
    Y = np.stack(np.meshgrid(*([ax] * dim), indexing="ij"), axis=-1)
    R = np.linalg.norm(Y, axis=-1)
    interior = R < 1 - 1e-9 * h
    idx = -np.ones(R.shape, dtype=np.int64)
    idx[interior] = np.arange(interior.sum())
    pts = Y[interior]
    nint = len(pts)

    rhs = np.zeros(nint)
    origin = tuple([n // 2] * dim)
    r_int = R[interior]
    ok = r_int > 0
    rhs[ok] = np.asarray(fk(pts[ok]), float)
    diag = {"unknowns": int(nint), "h": h}
    o = idx[origin]
    lim = _origin_value(fk, dim, h)
    if lim is not None:
        rhs[o] = lim
        diag["origin_source"] = "limit"
    else:
        nb = []
        for j in range(dim):
            for s in (-1, 1):
                k = list(origin)
                k[j] += s
                nb.append(rhs[idx[tuple(k)]])
        rhs[o] = float(np.mean(nb))
        diag["origin_source"] = "neighbour average"
    if not np.all(np.isfinite(rhs)):
        raise ValueError("transformed source is not finite at the grid nodes")

    rows, cols, vals = [], [], []
    center = np.zeros(nint)
    ijk = np.argwhere(interior)
    me = idx[interior]
    for j in range(dim):
        dist = {}
        nbr = {}
        for s in (-1, 1):
            k = ijk.copy()
            k[:, j] += s
            inside = interior[tuple(k.T)]
            # distance (in units of h) to the next node or to the sphere crossing
            p = pts
            c = p[:, j]
            rest = np.sum(p * p, axis=1) - c * c
            cross = s * np.sqrt(np.maximum(1 - rest, 0)) - c
            theta = np.where(inside, 1.0, np.abs(cross) / h)
            theta = np.minimum(theta, 1.0)
            dist[s] = theta
            nbr[s] = (k, inside, c + s * theta * h)
        hl, hr = dist[-1] * h, dist[1] * h
        for s, hs in ((-1, hl), (1, hr)):
            coef = 2.0 / (hs * (hl + hr))
            center -= coef
            k, inside, cc = nbr[s]
            ii = np.nonzero(inside)[0]
            rows.append(me[ii])
            cols.append(idx[tuple(k[ii].T)])
            vals.append(coef[ii])
            bb = np.nonzero(~inside)[0]
            if bb.size:
                bp = pts[bb].copy()
                bp[:, j] = cc[bb]
                bp /= np.linalg.norm(bp, axis=1, keepdims=True)
                rhs[bb] -= coef[bb] * np.asarray(g(bp), float)
    rows.append(me)
    cols.append(me)
    vals.append(center)
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(nint, nint))

    # -A is an M-matrix; AMG on its symmetric part preconditions GMRES well
    As = -0.5 * (A + A.T)
    ml = pyamg.smoothed_aggregation_solver(As.tocsr())
    M = ml.aspreconditioner()
    x0 = np.zeros(nint)
    sol, info = gmres(-A, -rhs, x0=x0, M=M, rtol=tol, atol=0.0, restart=50, maxiter=200)
    res = float(np.linalg.norm(A @ sol - rhs) / max(np.linalg.norm(rhs), 1e-300))
    diag.update({"relative_residual": res, "gmres_info": int(info)})
    if info != 0 or res > 100 * tol:
        raise SolverError(f"linear solve did not converge: relative residual {res:.3e}")

    values = np.empty(R.shape)
    values[interior] = sol
    ext = ~interior
    proj = Y[ext] / np.maximum(R[ext], 1e-300)[:, None]
    values[ext] = np.asarray(g(proj), float)
    return BallSolution(dim, n, values, interior, diag)


@dataclass
class ExteriorSolution:
    ball: BallSolution
    u: AnalyticField
    profile: object  # GrowthProfile
    decay_certified: bool


def exterior_solve(
    data: BoundaryData,
    n: int = 65,
    ladder: RadiusLadder | None = None,
    q: float = 1.0,
    quad: QuadratureSpec | None = None,
) -> ExteriorSolution:
    """Solve the exterior problem through the ball and profile the decay of ``u``.

    ``u(x) = |x|^{2-N} u^K(x/|x|^2)``; the growth profile is taken over
    ``Omega_R`` with ``R`` on ``ladder`` and ``decay_certified`` requires a
    negative fitted exponent (membership in ``M_0^{0,1}``).
    """
    N = data.dim
    td = transform_data(data)
    ball = solve_ball_dirichlet(td.f_K_weighted, td.g_K, n, N)
    interp = ball.interpolator()

    def u(x):
        x = np.asarray(x, float)
        r = np.linalg.norm(x, axis=-1)
        y = invert_point(x)
        vals = interp(np.clip(y.reshape(-1, N), -1, 1)).reshape(x.shape[:-1])
        return r ** (2 - N) * vals

    uf = AnalyticField(N, u, label=f"exterior solution {data.label}".strip())
    ladder = ladder or RadiusLadder(1.5, 1.5, 16)
    prof = classify(uf, q, ladder, quad, s=0.0, r_inner=1.0)
    return ExteriorSolution(ball, uf, prof, bool(prof.fitted_exponent < 0))


def radial_oracle(F: Callable[[float], float], g0: float, dim: int = 3):
    """Solution of ``u'' + (N-1) u'/r = F(r)``, ``u'(0) = 0``, ``u(1) = g0``.

    Returns a callable of ``r`` built from the closed-form double integral.
    """

    def G(s):
        return _quad(lambda t: t ** (dim - 1) * F(t), 0, s, epsabs=1e-13, epsrel=1e-12)[0]

    def u(r):
        r = np.atleast_1d(np.asarray(r, float))
        out = [g0 - _quad(lambda s: G(s) * s ** (1 - dim), ri, 1.0, epsabs=1e-13, epsrel=1e-12)[0] for ri in r]
        return np.array(out)

    return u


def jacobian_check(sol: ExteriorSolution, R: float, quad: QuadratureSpec | None = None) -> dict:
    """Compare ``int_{Omega_R} |u| dx`` with ``int_{1/R<|y|<1} |y|^{-(N+2)} |u^K| dy``."""
    N = sol.u.dim
    direct = ball_norm(sol.u, 1, R, quad, r_inner=1.0)
    ball = sol.ball
    pts, w = sphere_rule(N, 16 if N == 3 else 32)
    t, wt = np.polynomial.legendre.leggauss(24)
    # geometric panels in r = |y| on [1/R, 1]
    edges = np.geomspace(1.0 / R, 1.0, 25)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        r = 0.5 * (b - a) * t + 0.5 * (a + b)
        wr = 0.5 * (b - a) * wt
        vals = np.abs(ball(r[:, None, None] * pts[None]))
        total += float(np.sum(wr * r ** (N - 1) * r ** (-(N + 2)) * (vals @ w)))
    return {"direct": direct, "substituted": total, "relative_gap": abs(direct - total) / abs(direct)}


def grid_convergence(exact: Callable, fk=None, ns=(17, 33, 65), dim: int = 3) -> dict:
    """Max nodal error of :func:`solve_ball_dirichlet` against ``exact`` for each ``n``.

    ``exact`` also supplies the boundary data.  Returns errors and observed
    orders ``log2(e_coarse / e_fine)`` for successive halvings of ``h``.
    """
    fk = fk or _zero
    errs = []
    for n in ns:
        sol = solve_ball_dirichlet(fk, exact, n, dim)
        ax = sol.axis
        Y = np.stack(np.meshgrid(*([ax] * dim), indexing="ij"), axis=-1)
        e = np.abs(sol.values[sol.interior] - exact(Y[sol.interior]))
        errs.append(float(e.max()))
    orders = [float(np.log2(a / b)) for a, b in zip(errs[:-1], errs[1:])]
    return {"n": list(ns), "errors": errs, "orders": orders}
