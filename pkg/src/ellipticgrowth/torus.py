"""Fourier-multiplier inversion of homogeneous operators on the torus.

The torus ``[0, L)^N`` with ``n_g`` points per axis stands in for R^N.  The zero
mode, where every homogeneous symbol vanishes, is removed by requiring zero
mean data; constants are then the only polynomial ambiguity left.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from math import factorial
from pathlib import Path

import numpy as np

from .dn import DNSystem, check_dn_ellipticity, dn_cofactor, dn_det
from .symbols import ScalarOperator, check_ellipticity, fourier_symbol, multi_indices

__all__ = [
    "GridSpec",
    "GridField",
    "VectorGridField",
    "CompatibilityError",
    "EllipticityError",
    "spectral_apply",
    "solve_scalar",
    "derivative_field",
    "gradient_tensor_norm",
    "lp_norm",
    "cz_ratio",
    "random_battery",
    "cz_survey",
    "apply_system",
    "solve_system",
    "solve_system_cofactor",
    "write_grid",
    "read_grid",
]


class CompatibilityError(ValueError):
    """Data has a nonzero zero-Fourier mode."""


class EllipticityError(ValueError):
    """The operator (or system) is not invertible off the zero mode."""


@dataclass(frozen=True)
class GridSpec:
    dim: int
    n: int
    L: float = 2 * np.pi

    def __post_init__(self):
        if self.n % 2 or self.n < 2:
            raise ValueError("points per axis must be even")
        if self.L <= 0:
            raise ValueError("box length must be positive")

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return (self.L / self.n) ** self.dim

    def coords(self):
        x = np.arange(self.n) * (self.L / self.n)
        return np.meshgrid(*([x] * self.dim), indexing="ij")

    def points(self) -> np.ndarray:
        return np.stack(self.coords(), axis=-1)

    def frequencies(self) -> np.ndarray:
        """Lattice frequencies ``2 pi k / L`` with shape ``shape + (N,)``."""
        k = 2 * np.pi * np.fft.fftfreq(self.n, d=self.L / self.n)
        return np.stack(np.meshgrid(*([k] * self.dim), indexing="ij"), axis=-1)


@dataclass(frozen=True)
class GridField:
    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.size != self.spec.n**self.spec.dim:
            raise ValueError(f"grid field has {v.size} values, spec needs {self.spec.n ** self.spec.dim}")
        object.__setattr__(self, "values", v.reshape(self.spec.shape))

    @classmethod
    def from_function(cls, spec: GridSpec, func) -> "GridField":
        return cls(spec, func(*spec.coords()))

    def mean(self) -> complex:
        return complex(self.values.mean())

    def l2(self) -> float:
        return lp_norm(self, 2)

    def __sub__(self, other):
        return GridField(self.spec, self.values - other.values)

    def __add__(self, other):
        return GridField(self.spec, self.values + other.values)


@dataclass(frozen=True)
class VectorGridField:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps or any(c.spec != comps[0].spec for c in comps):
            raise ValueError("components must share one grid spec")
        object.__setattr__(self, "components", comps)

    @property
    def spec(self) -> GridSpec:
        return self.components[0].spec

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def stacked(self) -> np.ndarray:
        return np.stack([c.values for c in self.components])

    def l2(self) -> float:
        return float(np.sqrt(sum(c.l2() ** 2 for c in self.components)))


def _fft(f: GridField):
    return np.fft.fftn(f.values)


def _ifft(spec, vh):
    return GridField(spec, np.fft.ifftn(vh))


def _symbol_on_grid(op, spec):
    if op.dim != spec.dim:
        raise ValueError(f"operator dim {op.dim} does not match grid dim {spec.dim}")
    return np.asarray(fourier_symbol(op, spec.frequencies()))


def spectral_apply(op: ScalarOperator, u: GridField) -> GridField:
    """Apply ``op`` modewise: ``F(A u) = sigma_A(xi) F(u)``."""
    return _ifft(u.spec, _symbol_on_grid(op, u.spec) * _fft(u))


def _check_mean(f: GridField, tol=1e-12):
    scale = np.sqrt(np.mean(np.abs(f.values) ** 2))
    if abs(f.mean()) > tol * max(scale, 1e-300):
        raise CompatibilityError(f"data has nonzero mean {f.mean():.3e}; only zero-mean data are solvable")


def _inverse_symbol(op, spec):
    rep = check_ellipticity(op, 32)
    if not rep.elliptic:
        raise EllipticityError(f"operator is not elliptic (sphere margin {rep.margin:.3e})")
    sig = _symbol_on_grid(op, spec)
    zero = (0,) * spec.dim
    sig[zero] = 1.0
    if np.any(sig == 0):
        raise EllipticityError("symbol vanishes at a nonzero lattice frequency")
    inv = 1.0 / sig
    inv[zero] = 0.0
    return inv


def solve_scalar(op: ScalarOperator, f: GridField) -> GridField:
    """Zero-mean ``u`` with ``A u = f`` (``f`` must have zero mean)."""
    _check_mean(f)
    return _ifft(f.spec, _inverse_symbol(op, f.spec) * _fft(f))


def _ik_power(spec, alpha):
    xi = spec.frequencies()
    out = np.ones(spec.shape, complex)
    for j, a in enumerate(alpha):
        if a:
            out = out * (1j * xi[..., j]) ** a
    return out


def derivative_field(op: ScalarOperator, alpha, f: GridField) -> GridField:
    """``d^alpha u`` for the zero-mean solution of ``A u = f``, as one multiplier.

    The multiplier is ``(i xi)^alpha / sigma_A(xi)``; no differencing.
    """
    _check_mean(f)
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != f.spec.dim:
        raise ValueError("multi-index length does not match grid dim")
    return _ifft(f.spec, _ik_power(f.spec, alpha) * _inverse_symbol(op, f.spec) * _fft(f))


def _tensor_norm_from_hat(spec, vh, k):
    acc = np.zeros(spec.shape)
    for alpha in multi_indices(k, spec.dim):
        w = factorial(k)
        for a in alpha:
            w //= factorial(a)
        acc += w * np.abs(np.fft.ifftn(_ik_power(spec, alpha) * vh)) ** 2
    return np.sqrt(acc)


def gradient_tensor_norm(u: GridField, k: int) -> np.ndarray:
    """Pointwise ``|grad^k u| = (sum_{|alpha|=k} k!/alpha! |d^alpha u|^2)^{1/2}``."""
    return _tensor_norm_from_hat(u.spec, _fft(u), k)


def lp_norm(f, p, spec: GridSpec | None = None) -> float:
    """Discrete L^p norm with uniform weights ``(L/n)^N``; max for p = inf."""
    if isinstance(f, GridField):
        spec, vals = f.spec, f.values
    else:
        vals = np.asarray(f)
    a = np.abs(vals)
    if np.isinf(p):
        return float(a.max())
    return float((np.sum(a**p) * spec.cell_volume) ** (1 / p))


def cz_ratio(op: ScalarOperator, f: GridField, p, kappa: int = 0) -> float:
    """``||grad^{m+kappa} u||_p / ||grad^kappa f||_p`` for ``A u = f`` on the torus."""
    _check_mean(f)
    fh = _fft(f)
    src = _tensor_norm_from_hat(f.spec, fh, kappa)
    denom = lp_norm(src, p, f.spec)
    if denom == 0:
        raise ZeroDivisionError("ratio undefined for f with vanishing kappa-th derivatives")
    uh = _inverse_symbol(op, f.spec) * fh
    num = lp_norm(_tensor_norm_from_hat(f.spec, uh, op.order + kappa), p, f.spec)
    return num / denom


def random_battery(spec: GridSpec, count: int = 20, seed: int = 0, band: float = 2 / 3):
    """Band-limited zero-mean complex Gaussian fields.

    Modes with ``|k_j| > band * n/2`` on any axis are zeroed, as is the zero mode.
    """
    rng = np.random.default_rng(seed)
    k = np.fft.fftfreq(spec.n, d=1.0 / spec.n)
    mask = np.ones(spec.shape, bool)
    for j in range(spec.dim):
        shp = [1] * spec.dim
        shp[j] = spec.n
        mask &= (np.abs(k) <= band * spec.n / 2).reshape(shp)
    mask[(0,) * spec.dim] = False
    out = []
    for _ in range(count):
        vh = (rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)) * mask
        v = np.fft.ifftn(vh)
        v = v / np.sqrt(np.mean(np.abs(v) ** 2))
        out.append(GridField(spec, v))
    return out


def cz_survey(op: ScalarOperator, ps, spec: GridSpec, count: int = 20, seed: int = 0, kappa: int = 0) -> list[dict]:
    """Max and median CZ ratio over a random battery for each ``p``.

    The maximum is an empirical lower bound for the constant of the estimate.
    """
    battery = random_battery(spec, count, seed)
    rows = []
    for p in ps:
        r = np.array([cz_ratio(op, f, p, kappa) for f in battery])
        rows.append({"p": p, "n": spec.n, "max": float(r.max()), "median": float(np.median(r)), "count": len(r)})
    return rows


# -- systems -------------------------------------------------------------------


def _stack_hat(F: VectorGridField):
    return np.stack([np.fft.fftn(c.values) for c in F.components])


def _unstack(spec, uh):
    return VectorGridField(tuple(GridField(spec, np.fft.ifftn(c)) for c in uh))


def apply_system(sys: DNSystem, U: VectorGridField) -> VectorGridField:
    spec = U.spec
    S = sys.fourier_symbol_matrix(spec.frequencies())
    uh = _stack_hat(U)
    return _unstack(spec, np.einsum("...jk,k...->j...", S, uh))


def _system_checks(sys, F):
    if len(F) != sys.n:
        raise ValueError(f"system has {sys.n} rows, data has {len(F)} components")
    if F.spec.dim != sys.dim:
        raise ValueError("grid dim does not match system dim")
    rep = check_dn_ellipticity(sys, 32)
    if not rep.elliptic:
        raise EllipticityError(f"system is not DN elliptic (det margin {rep.margin:.3e})")
    for c in F.components:
        _check_mean(c)


def solve_system(sys: DNSystem, F: VectorGridField) -> VectorGridField:
    """Modewise ``u_hat = sigma(xi)^{-1} f_hat`` with the zero mode set to 0."""
    _system_checks(sys, F)
    spec = F.spec
    S = sys.fourier_symbol_matrix(spec.frequencies())
    zero = (0,) * spec.dim
    S[zero] = np.eye(sys.n)
    fh = np.moveaxis(_stack_hat(F), 0, -1)
    det = np.linalg.det(S)
    scale = np.max(np.abs(S), axis=(-2, -1)) ** sys.n
    if np.any(np.abs(det) <= 1e-13 * scale):
        raise EllipticityError("singular mode matrix at a nonzero frequency")
    uh = np.linalg.solve(S, fh[..., None])[..., 0]
    uh[zero] = 0.0
    return _unstack(spec, np.moveaxis(uh, -1, 0))


def solve_system_cofactor(sys: DNSystem, F: VectorGridField) -> VectorGridField:
    """Right inverse through cofactors: ``u_l = sum_k C_kl (det A)^{-1} f_k``."""
    _system_checks(sys, F)
    spec = F.spec
    det_inv = _inverse_symbol(dn_det(sys), spec)
    fh = _stack_hat(F)
    vh = det_inv[None] * fh
    uh = np.zeros_like(fh)
    for k in range(sys.n):
        for l in range(sys.n):
            c = dn_cofactor(sys, k + 1, l + 1)
            if not c.is_zero:
                uh[l] += _symbol_on_grid(c, spec) * vh[k]
    return _unstack(spec, uh)


# -- file format ---------------------------------------------------------------

_MAGIC = b"HESSOGRD"
_VERSION = 1
_HEADER = struct.Struct("<8sIIId")


def write_grid(path, field: GridField) -> None:
    """Binary grid file: header then ``n^N`` little-endian complex128, row-major."""
    spec = field.spec
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, spec.dim, spec.n, float(spec.L)))
        fh.write(np.ascontiguousarray(field.values, dtype="<c16").tobytes())


def read_grid(path) -> GridField:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError("file too short for a grid header")
    magic, version, dim, n, L = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != _VERSION:
        raise ValueError(f"unsupported grid file version {version}")
    vals = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)
    if vals.size != n**dim:
        raise ValueError(f"payload has {vals.size} values, header implies {n ** dim}")
    return GridField(GridSpec(dim, n, L), vals.astype(complex))
