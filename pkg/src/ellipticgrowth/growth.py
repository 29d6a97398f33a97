"""Growth spaces M^{s,q}: ball norms over a geometric ladder of radii.

``||u||_{M^{s,q}} = sup_{R >= 1} R^{-s-N/q} ||u||_{q,B_R}`` is estimated on the
rungs of a :class:`RadiusLadder`.  A finite ladder only gives a lower bound of
the supremum; limits at infinity are judged from the fitted growth exponent.
All verdicts produced here are heuristics of that kind.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import roots_legendre

from .sphere import sphere_rule

__all__ = [
    "AnalyticField",
    "RadiusLadder",
    "QuadratureSpec",
    "GrowthProfile",
    "ball_norm",
    "ball_norms",
    "m_norm",
    "fit_exponent",
    "classify",
    "weighted_norm",
    "check_product",
    "check_integration",
    "check_embedding_sandwich",
]


@dataclass(frozen=True)
class AnalyticField:
    """Point-evaluable field on (a subset of) R^N.

    ``evaluator`` maps an array of points of shape ``(..., N)`` to values of shape
    ``(...)``; ``gradient`` (optional) maps to ``(..., N)``.  Both must be
    vectorised and stateless.
    """

    dim: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = ""
    r_max: float = np.inf

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))

    def __mul__(self, other: "AnalyticField") -> "AnalyticField":
        f, g = self.evaluator, other.evaluator
        return AnalyticField(
            self.dim, lambda x: f(x) * g(x), label=f"({self.label})*({other.label})", r_max=min(self.r_max, other.r_max)
        )

    def __add__(self, other: "AnalyticField") -> "AnalyticField":
        f, g = self.evaluator, other.evaluator
        return AnalyticField(
            self.dim, lambda x: f(x) + g(x), label=f"({self.label})+({other.label})", r_max=min(self.r_max, other.r_max)
        )

    def scaled(self, c) -> "AnalyticField":
        f = self.evaluator
        grad = None if self.gradient is None else (lambda x, gr=self.gradient: c * gr(x))
        return AnalyticField(self.dim, lambda x: c * f(x), grad, f"{c}*({self.label})", self.r_max)

    def gradient_modulus(self) -> "AnalyticField":
        """The field ``|grad u|``."""
        if self.gradient is None:
            raise ValueError(f"field {self.label!r} has no gradient evaluator")
        gr = self.gradient
        return AnalyticField(
            self.dim, lambda x: np.linalg.norm(np.abs(gr(x)), axis=-1), label=f"|grad {self.label}|", r_max=self.r_max
        )


@dataclass(frozen=True)
class RadiusLadder:
    R0: float = 1.0
    gamma: float = 1.5
    count: int = 16

    def __post_init__(self):
        if self.R0 <= 0 or self.gamma <= 1 or self.count < 1:
            raise ValueError("ladder needs R0 > 0, gamma > 1, count >= 1")

    @property
    def radii(self) -> np.ndarray:
        return self.R0 * self.gamma ** np.arange(self.count)

    @property
    def R_max(self) -> float:
        return float(self.radii[-1])

    def extended(self, extra: int) -> "RadiusLadder":
        return RadiusLadder(self.R0, self.gamma, self.count + extra)


@dataclass(frozen=True)
class QuadratureSpec:
    """Radial Gauss-Legendre panels times a product sphere rule.

    The innermost ball is split into geometrically graded panels (ratio
    ``grading_ratio``, ``grading_levels`` of them) so that integrable power
    singularities at the origin are resolved; every further shell is covered
    by ``shell_panels`` panels.  ``sphere_order`` defaults by dimension.
    """

    radial_nodes: int = 16
    sphere_order: Optional[int] = None
    grading_levels: int = 30
    grading_ratio: float = 0.15
    shell_panels: int = 1

    def __post_init__(self):
        if self.radial_nodes < 2 or self.grading_levels < 1 or not 0 < self.grading_ratio < 1:
            raise ValueError("invalid quadrature specification")

    def sphere(self, dim: int):
        n = self.sphere_order
        if n is None:
            n = {1: 1, 2: 32, 3: 16}.get(dim, 8)
        return sphere_rule(dim, n)


def _panel_nodes(a, b, n):
    t, w = roots_legendre(n)
    return 0.5 * (b - a) * t + 0.5 * (a + b), 0.5 * (b - a) * w


def _radial_rule(a, b, quad: QuadratureSpec, graded: bool):
    if graded and a == 0.0:
        edges = b * quad.grading_ratio ** np.arange(quad.grading_levels + 1)
        edges = np.append(edges, 0.0)[::-1]
    else:
        edges = np.linspace(a, b, quad.shell_panels + 1)
    rs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            r, w = _panel_nodes(lo, hi, quad.radial_nodes)
            rs.append(r)
            ws.append(w)
    return np.concatenate(rs), np.concatenate(ws)


def _shell(u: AnalyticField, q, a, b, quad, graded):
    """``int_{a<|x|<b} |u|^q`` (or the node maximum of ``|u|`` for q = inf)."""
    pts, wsph = quad.sphere(u.dim)
    r, wr = _radial_rule(a, b, quad, graded)
    if np.isinf(q):
        r = np.concatenate([r, [b]] + ([[a]] if a > 0 else []))
    x = r[:, None, None] * pts[None, :, :]
    vals = np.abs(np.asarray(u(x)))
    if vals.shape != x.shape[:-1]:
        vals = np.broadcast_to(vals, x.shape[:-1])
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"field {u.label!r} is not finite at quadrature nodes in {a} < |x| < {b}")
    if np.isinf(q):
        return float(vals.max())
    return float(np.sum(wr * r ** (u.dim - 1) * (vals**q @ wsph)))


def _check_q(q):
    q = float(q)
    if not (q >= 1):
        raise ValueError(f"exponent q must lie in [1, inf], got {q}")
    return q


def ball_norms(u: AnalyticField, q, radii, quad: QuadratureSpec | None = None, r_inner: float = 0.0) -> np.ndarray:
    """``||u||_{q, B_R \\ B_{r_inner}}`` for every ``R`` in ``radii`` (ascending)."""
    quad = quad or QuadratureSpec()
    q = _check_q(q)
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    if radii[-1] > u.r_max:
        raise ValueError(f"radius {radii[-1]} exceeds the declared domain r_max = {u.r_max} of {u.label!r}")
    if radii[0] < r_inner:
        raise ValueError("radii must not be smaller than r_inner")
    out = np.empty(len(radii))
    acc = 0.0
    lo = r_inner
    for k, R in enumerate(radii):
        if R > lo:
            piece = _shell(u, q, lo, R, quad, graded=(lo == 0.0))
            acc = max(acc, piece) if np.isinf(q) else acc + piece
        out[k] = acc if np.isinf(q) else acc ** (1.0 / q)
        lo = R
    return out


def ball_norm(u: AnalyticField, q, R, quad: QuadratureSpec | None = None, r_inner: float = 0.0) -> float:
    """Quadrature estimate of ``||u||_{q, B_R}`` (node maximum when q = inf)."""
    return float(ball_norms(u, q, [R], quad, r_inner)[0])


def _normalise(norms, radii, s, q, dim):
    return radii ** (-s - (0.0 if np.isinf(q) else dim / q)) * norms


def m_norm(u: AnalyticField, s, q, ladder: RadiusLadder | None = None, quad: QuadratureSpec | None = None) -> float:
    """Ladder lower bound of ``sup_{R>=1} R^{-s-N/q} ||u||_{q,B_R}``."""
    ladder = ladder or RadiusLadder()
    if ladder.R0 < 1:
        raise ValueError("the M^{s,q} norm takes R >= 1; ladder must start at R0 >= 1")
    radii = ladder.radii
    norms = ball_norms(u, q, radii, quad)
    return float(np.max(_normalise(norms, radii, s, q, u.dim)))


def fit_exponent(radii, norms, dim, q, tail_fraction: float = 0.5, min_rungs: int = 4):
    """Least-squares slope of ``log||u||_{q,B_R} - (N/q) log R`` over the tail rungs.

    Returns ``(slope, stderr)``; ``(-inf, 0)`` when every norm vanishes.
    """
    radii = np.asarray(radii, float)
    norms = np.asarray(norms, float)
    pos = norms > 0
    if not pos.any():
        return -np.inf, 0.0
    k = max(min_rungs, int(np.ceil(tail_fraction * len(radii))))
    idx = np.nonzero(pos)[0][-k:]
    if len(idx) < 2:
        raise ValueError("need at least two rungs with nonzero norm to fit an exponent")
    x = np.log(radii[idx])
    y = np.log(norms[idx]) - (0.0 if np.isinf(q) else dim / q) * x
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    dof = len(idx) - 2
    if dof > 0:
        resid = y - A @ coef
        sigma2 = resid @ resid / dof
        stderr = float(np.sqrt(sigma2 / np.sum((x - x.mean()) ** 2)))
    else:
        stderr = 0.0
    return float(coef[0]), stderr


@dataclass
class GrowthProfile:
    q: float
    dim: int
    radii: np.ndarray
    ball_norms: np.ndarray
    fitted_exponent: float
    stderr: float
    s: Optional[float] = None
    normalized: Optional[np.ndarray] = None
    tail_trend: str = "bounded"
    verdicts: dict = field(default_factory=dict)
    label: str = ""

    def rows(self):
        """Per-rung rows ``(rung, R, ball_norm, normalized)``."""
        norm = self.normalized if self.normalized is not None else np.full(len(self.radii), np.nan)
        return [(k, float(R), float(b), float(v)) for k, (R, b, v) in enumerate(zip(self.radii, self.ball_norms, norm))]

    def summary(self) -> dict:
        return {
            "label": self.label,
            "dim": self.dim,
            "q": "inf" if np.isinf(self.q) else self.q,
            "s": self.s,
            "fitted_exponent": self.fitted_exponent,
            "stderr": self.stderr,
            "tail_trend": self.tail_trend,
            "verdicts": self.verdicts,
            "R_max": float(self.radii[-1]),
        }


def classify(
    u: AnalyticField,
    q,
    ladder: RadiusLadder | None = None,
    quad: QuadratureSpec | None = None,
    tol: float = 0.05,
    s: float | None = None,
    r_inner: float = 0.0,
) -> GrowthProfile:
    """Fit the growth exponent of ``u`` and, for a queried ``s``, judge membership.

    * ``M^{s,q}``: fitted exponent ``<= s + tol``;
    * ``M_0^{s,q}``: fitted exponent ``<= s - tol`` and the normalised values
      are nonincreasing over the tail rungs.

    ``r_inner > 0`` profiles the exterior region ``B_R \\ B_{r_inner}``.
    """
    ladder = ladder or RadiusLadder()
    if ladder.count < 4:
        raise ValueError("exponent fitting needs at least 4 rungs")
    radii = ladder.radii
    norms = ball_norms(u, q, radii, quad, r_inner)
    q = float(q)
    slope, err = fit_exponent(radii, norms, u.dim, q)
    prof = GrowthProfile(q, u.dim, radii, norms, slope, err, label=u.label)
    s_ref = 0.0 if s is None else float(s)
    prof.s = s
    prof.normalized = _normalise(norms, radii, s_ref, q, u.dim)
    drift = slope - s_ref
    prof.tail_trend = "growing" if drift > tol else ("decaying" if drift < -tol else "bounded")
    if s is not None:
        tail = prof.normalized[len(radii) // 2 :]
        monotone = bool(np.all(np.diff(tail) <= 1e-12 * np.abs(tail[:-1]).max(initial=0)))
        prof.verdicts = {
            "M": bool(slope <= s + tol),
            "M0": bool(slope <= s - tol and monotone),
            "heuristic": True,
            "sup_beyond_ladder": bool(np.argmax(prof.normalized) == len(radii) - 1 and drift > -tol),
        }
    return prof


def weighted_norm(u: AnalyticField, s, q, quad: QuadratureSpec | None = None, R_max: float = 437.0) -> float:
    """``||(1+|x|)^{-s-N/q} u||_{q, B_{R_max}}``, a truncated L^q_s norm."""
    q = _check_q(q)
    return float(_weighted_norms(u, s, q, [R_max], quad)[0])


def _weighted_norms(u, s, q, radii, quad):
    expo = -s - (0.0 if np.isinf(q) else u.dim / q)
    f = u.evaluator
    w = AnalyticField(
        u.dim, lambda x: (1 + np.linalg.norm(x, axis=-1)) ** expo * f(x), label=f"weighted {u.label}", r_max=u.r_max
    )
    return ball_norms(w, q, radii, quad)


def check_product(u, v, s1, q1, s2, q2, ladder=None, quad=None, tol: float = 1e-9) -> dict:
    """Product estimate ``||uv||_{M^{s1+s2,q3}} <= ||u||_{M^{s1,q1}} ||v||_{M^{s2,q2}}``."""
    inv = (0 if np.isinf(q1) else 1 / q1) + (0 if np.isinf(q2) else 1 / q2)
    if inv > 1 + 1e-14:
        raise ValueError(f"need 1/q1 + 1/q2 <= 1, got {inv}")
    q3 = np.inf if inv == 0 else 1 / inv
    lhs = m_norm(u * v, s1 + s2, q3, ladder, quad)
    rhs = m_norm(u, s1, q1, ladder, quad) * m_norm(v, s2, q2, ladder, quad)
    return {"lhs": lhs, "rhs": rhs, "q3": q3, "pass": bool(lhs <= rhs * (1 + tol))}


def check_integration(u: AnalyticField, s, q, lam, ladder=None, quad=None, tol: float = 0.05) -> dict:
    """Check the ball inequality behind the gradient-to-function growth transfer.

    (a) ``||u||_{q,B_R} <= 2 lam^{-N/q} ||u||_{q,B_{lam R}} + 2 lam^{(1-N)/q} R || |grad u| ||_{q,B_R}``
    at every rung;
    (b) ``fitted(u) <= max(fitted(|grad u|), s) + 1 + tol``, where ``s > -1`` is
    the hypothesised growth class of the gradient.
    """
    if not s > -1:
        raise ValueError("the growth transfer needs s > -1")
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    if u.gradient is None:
        raise ValueError(f"field {u.label!r} has no gradient evaluator")
    ladder = ladder or RadiusLadder()
    q = _check_q(q)
    radii = ladder.radii
    grad = u.gradient_modulus()
    nu_ = ball_norms(u, q, radii, quad)
    nu_in = np.array([ball_norm(u, q, lam * R, quad) for R in radii])
    ng = ball_norms(grad, q, radii, quad)
    iq = 0.0 if np.isinf(q) else 1.0 / q
    rhs = 2 * lam ** (-u.dim * iq) * nu_in + 2 * lam ** ((1 - u.dim) * iq) * radii * ng
    margin = rhs - nu_
    su, _ = fit_exponent(radii, nu_, u.dim, q)
    sg, _ = fit_exponent(radii, ng, u.dim, q)
    bound = max(sg, s) + 1
    return {
        "lhs": nu_,
        "rhs": rhs,
        "ineq11_margin": margin,
        "ineq11_pass": bool(np.all(margin >= -1e-12 * rhs)),
        "exponent_u": su,
        "exponent_grad": sg,
        "exponent_relation": bool(su <= bound + tol),
    }


def _plateaus(values, radii, q, tol):
    """Whether a nondecreasing sequence of truncated norms converges.

    The increments of ``||.||^q`` must decay like a negative power of ``R``.
    """
    vals = np.asarray(values) if np.isinf(q) else np.asarray(values) ** q
    inc = np.diff(vals)
    if np.all(inc <= 1e-14 * max(vals[-1], 1e-300)):
        return True
    if np.isinf(q):
        return False
    pos = inc > 0
    if pos.sum() < 2:
        return True
    x = np.log(radii[1:][pos])
    y = np.log(inc[pos])
    k = max(4, len(x) // 2)
    slope = np.polyfit(x[-k:], y[-k:], 1)[0]
    return bool(slope < -tol)


def check_embedding_sandwich(u: AnalyticField, s, t, q, ladder=None, quad=None, tol: float = 0.05) -> dict:
    """Check ``L^q_s -> M^{s,q} -> L^q_t`` (``t > s >= -N/q``, ``q < inf``) on ``u``."""
    if not (t > s >= -u.dim / q) or np.isinf(q):
        raise ValueError("need t > s >= -N/q and q < inf")
    ladder = ladder or RadiusLadder()
    radii = ladder.radii
    ws = _weighted_norms(u, s, q, radii, quad)
    wt = _weighted_norms(u, t, q, radii, quad)
    norms = ball_norms(u, q, radii, quad)
    zero = not np.any(norms > 0)
    in_Ls = zero or _plateaus(ws, radii, q, tol)
    in_Lt = zero or _plateaus(wt, radii, q, tol)
    if zero:
        in_M = True
    else:
        slope, _ = fit_exponent(radii, norms, u.dim, q)
        in_M = bool(slope <= s + tol)
    first = (not in_Ls) or in_M
    second = (not in_M) or in_Lt
    return {
        "weighted_s_finite": bool(in_Ls),
        "m_bounded": bool(in_M),
        "weighted_t_finite": bool(in_Lt),
        "weighted_s": ws,
        "weighted_t": wt,
        "pass": bool(first and second),
    }
