"""Catalog of analytic test fields with closed-form gradients."""
from __future__ import annotations

import numpy as np

from .growth import AnalyticField
from .polyaction import Polynomial

__all__ = [
    "const",
    "monomial",
    "power",
    "one_plus_power",
    "log_field",
    "smooth_step",
    "smoothed_power",
    "oscillatory",
    "polynomial_field",
    "FIELD_CATALOG",
    "field_from_spec",
]


def _r(x):
    return np.linalg.norm(x, axis=-1)


def const(dim: int, c: complex = 1.0) -> AnalyticField:
    return AnalyticField(
        dim,
        lambda x: np.full(x.shape[:-1], c),
        lambda x: np.zeros(x.shape),
        label=f"const {c}",
    )


def monomial(alpha) -> AnalyticField:
    alpha = tuple(int(a) for a in alpha)
    return polynomial_field(Polynomial(len(alpha), {alpha: 1.0}), label=f"x^{alpha}")


def polynomial_field(p: Polynomial, label: str | None = None) -> AnalyticField:
    grads = p.gradient()
    return AnalyticField(
        p.dim,
        lambda x: p(x),
        lambda x: np.stack([g(x) for g in grads], axis=-1),
        label=label or f"polynomial deg {p.degree}",
    )


def power(dim: int, t: float) -> AnalyticField:
    """``|x|^t`` (singular at the origin for ``t < 0``)."""
    t = float(t)

    def grad(x):
        r = _r(x)
        return (t * r ** (t - 2))[..., None] * x

    return AnalyticField(dim, lambda x: _r(x) ** t, grad, label=f"|x|^{t:g}")


def one_plus_power(dim: int, a: float) -> AnalyticField:
    """``(1 + |x|)^a``."""
    a = float(a)

    def grad(x):
        r = _r(x)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = a * (1 + r) ** (a - 1) / r
        g = np.where(r > 0, g, 0.0)
        return g[..., None] * x

    return AnalyticField(dim, lambda x: (1 + _r(x)) ** a, grad, label=f"(1+|x|)^{a:g}")


def log_field(dim: int) -> AnalyticField:
    """``log(1 + |x|)``."""

    def grad(x):
        r = _r(x)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = 1 / ((1 + r) * r)
        return np.where(r > 0, g, 0.0)[..., None] * x

    return AnalyticField(dim, lambda x: np.log1p(_r(x)), grad, label="log(1+|x|)")


def _psi(t):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(t > 0, np.exp(-1 / np.where(t > 0, t, 1.0)), 0.0)


def _dpsi(t):
    tt = np.where(t > 0, t, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(t > 0, np.exp(-1 / tt) / tt**2, 0.0)


def smooth_step(r, a, b):
    """C-infinity step: 0 for ``r <= a``, 1 for ``r >= b``; returns (value, derivative)."""
    t = (np.asarray(r, float) - a) / (b - a)
    p, q = _psi(t), _psi(1 - t)
    val = p / (p + q)
    dp, dq = _dpsi(t), -_dpsi(1 - t)
    dval = (dp * (p + q) - p * (dp + dq)) / (p + q) ** 2 / (b - a)
    return val, dval


def smoothed_power(dim: int, t: float, r0: float = 1.0) -> AnalyticField:
    """Smooth radial field equal to ``|x|^t`` for ``|x| >= r0`` and ``r0^t`` near 0.

    The splice uses :func:`smooth_step` on ``[r0/2, r0]``.
    """
    t = float(t)
    c = r0**t

    def profile(r):
        b, db = smooth_step(r, r0 / 2, r0)
        rs = np.where(r > 0, r, r0)
        pw = rs**t
        val = (1 - b) * c + b * pw
        dval = db * (pw - c) + b * t * rs ** (t - 1)
        return val, np.where(r > 0, dval, 0.0)

    def grad(x):
        r = _r(x)
        _, d = profile(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = np.where(r > 0, d / np.where(r > 0, r, 1.0), 0.0)
        return g[..., None] * x

    return AnalyticField(dim, lambda x: profile(_r(x))[0], grad, label=f"smoothed |x|^{t:g} (r0={r0:g})")


def oscillatory(dim: int, n: int) -> AnalyticField:
    """``g_n(x) = (1+|x|^2)^{-N/2} exp(i |x|^{2n})``, in every L^p with p > 1."""

    def ev(x):
        r2 = np.sum(x * x, axis=-1)
        return (1 + r2) ** (-dim / 2) * np.exp(1j * r2**n)

    def grad(x):
        r2 = np.sum(x * x, axis=-1)
        amp = (1 + r2) ** (-dim / 2)
        ph = np.exp(1j * r2**n)
        d = (-dim / (1 + r2) + 1j * 2 * n * r2 ** (n - 1)) * amp * ph
        return d[..., None] * x

    return AnalyticField(dim, ev, grad, label=f"g_{n}")


FIELD_CATALOG = {
    "const": "const[:c]  constant field",
    "monomial": "monomial:a1,a2,...  x^alpha",
    "power": "power:t  |x|^t",
    "one_plus_power": "one_plus_power:a  (1+|x|)^a",
    "log": "log  log(1+|x|)",
    "smoothed_power": "smoothed_power:t[,r0]  |x|^t spliced smoothly to a constant inside r0",
    "oscillatory": "oscillatory:n  (1+|x|^2)^(-N/2) exp(i|x|^(2n))",
}


def field_from_spec(spec: str, dim: int) -> AnalyticField:
    """Build a catalog field from ``name[:args]`` (e.g. ``power:-1``)."""
    name, _, arg = spec.partition(":")
    args = [a for a in arg.replace(" ", "").split(",") if a]
    if name == "const":
        return const(dim, complex(args[0]) if args else 1.0)
    if name == "monomial":
        alpha = [int(a) for a in args]
        if len(alpha) != dim:
            raise ValueError(f"monomial exponent {alpha} does not match N = {dim}")
        return monomial(alpha)
    if name == "power":
        return power(dim, float(args[0]))
    if name == "one_plus_power":
        return one_plus_power(dim, float(args[0]))
    if name == "log":
        return log_field(dim)
    if name == "smoothed_power":
        return smoothed_power(dim, float(args[0]), float(args[1]) if len(args) > 1 else 1.0)
    if name == "oscillatory":
        return oscillatory(dim, int(args[0]))
    raise KeyError(f"unknown field {name!r}; known: {sorted(FIELD_CATALOG)}")
