"""Sampling grids and quadrature rules on the unit sphere S^{N-1}."""
from __future__ import annotations

from functools import lru_cache
from math import gamma, pi

import numpy as np
from scipy.special import roots_jacobi


def sphere_area(dim: int) -> float:
    """Surface measure of S^{dim-1}."""
    return 2 * pi ** (dim / 2) / gamma(dim / 2)


def ball_volume(dim: int, radius: float = 1.0) -> float:
    return sphere_area(dim) / dim * radius**dim


def _angles_to_points(thetas, phi):
    """Hyperspherical coordinates -> Cartesian points on the unit sphere."""
    cols = []
    s = np.ones_like(phi)
    for th in thetas:
        cols.append(s * np.cos(th))
        s = s * np.sin(th)
    cols.append(s * np.cos(phi))
    cols.append(s * np.sin(phi))
    return np.stack(cols, axis=-1)


def covering_grid(dim: int, n: int) -> tuple[np.ndarray, float]:
    """Product angular grid with ``n`` intervals per half turn.

    Returns the points and a bound on their covering radius (every point of the
    sphere lies within that Euclidean distance of some sample).  The bound uses
    ``ds^2 = dth_1^2 + sin^2 th_1 dth_2^2 + ... <= sum dth_i^2``.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]]), 0.0
    n = max(int(n), 1)
    phi = np.arange(2 * n) * (pi / n)
    if dim == 2:
        pts = _angles_to_points([], phi)
        return pts, float(2 * np.sin(pi / (4 * n)))
    theta = np.linspace(0.0, pi, n + 1)
    mesh = np.meshgrid(*([theta] * (dim - 2)), phi, indexing="ij")
    pts = _angles_to_points([m.ravel() for m in mesh[:-1]], mesh[-1].ravel())
    h = np.sqrt(dim - 1) * pi / (2 * n)
    return pts, float(min(h, 2.0))


@lru_cache(maxsize=64)
def _rule(dim: int, n: int):
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if dim == 2:
        phi = np.arange(2 * n) * (pi / n)
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1), np.full(2 * n, pi / n)
    a = (dim - 3) / 2
    t, wt = roots_jacobi(n, a, a)
    sub_pts, sub_w = _rule(dim - 1, n)
    r = np.sqrt(1 - t**2)
    pts = np.empty((n, len(sub_w), dim))
    pts[..., 0] = t[:, None]
    pts[..., 1:] = r[:, None, None] * sub_pts[None]
    pts = pts.reshape(-1, dim)
    w = (wt[:, None] * sub_w[None, :]).ravel()
    return pts, w


def sphere_rule(dim: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Product Gauss rule on S^{dim-1}.

    Trapezoidal in the azimuth (``2n`` nodes, exact for trigonometric degree
    ``< 2n``) and Gauss-Gegenbauer in each polar angle (``n`` nodes).  Weights
    are positive and sum to :func:`sphere_area`.
    """
    pts, w = _rule(int(dim), int(n))
    return pts.copy(), w.copy()
