"""JSON coefficient files for operators, polynomials and DN systems.

Operators and polynomials share one layout::

    {"dim": 2, "order": 2, "coeffs": [{"alpha": [2, 0], "re": 1.0, "im": 0.0}, ...]}

Polynomials may mix orders and omit ``"order"``.  A DN system file holds
``"m_weights"``, ``"k_weights"`` and an ``"entries"`` matrix of operator
blocks, with ``null`` for zero entries.
"""
from __future__ import annotations

import json
import os

from .dn import DNSystem, stokes
from .polyaction import Polynomial
from .symbols import ScalarOperator, builtin_operator, zero_operator

__all__ = [
    "operator_to_dict",
    "operator_from_dict",
    "polynomial_to_dict",
    "polynomial_from_dict",
    "system_to_dict",
    "system_from_dict",
    "resolve_operator",
    "resolve_system",
    "BUILTIN_SYSTEMS",
]


def _coeff_list(coeffs):
    return [{"alpha": list(a), "re": float(c.real), "im": float(c.imag)} for a, c in sorted(coeffs.items())]


def _read_coeffs(items, dim):
    out = {}
    for it in items:
        alpha = tuple(int(v) for v in it["alpha"])
        if len(alpha) != dim:
            raise ValueError(f"multi-index {alpha} has wrong length for dim {dim}")
        out[alpha] = out.get(alpha, 0j) + complex(it.get("re", 0.0), it.get("im", 0.0))
    return out


def operator_to_dict(op: ScalarOperator) -> dict:
    d = {"dim": op.dim, "order": op.order, "coeffs": _coeff_list(op.coeffs)}
    if op.name:
        d["name"] = op.name
    return d


def operator_from_dict(d: dict) -> ScalarOperator:
    dim = int(d["dim"])
    coeffs = _read_coeffs(d.get("coeffs", []), dim)
    order = d.get("order")
    if order is None or not any(abs(c) > 0 for c in coeffs.values()):
        if any(abs(c) > 0 for c in coeffs.values()):
            raise ValueError("operator file needs an 'order'")
        return zero_operator(dim)
    return ScalarOperator(dim, int(order), coeffs, name=d.get("name", ""))


def polynomial_to_dict(p: Polynomial) -> dict:
    return {"dim": p.dim, "coeffs": _coeff_list(p.coeffs)}


def polynomial_from_dict(d: dict) -> Polynomial:
    dim = int(d["dim"])
    return Polynomial(dim, _read_coeffs(d.get("coeffs", []), dim))


def system_to_dict(sys: DNSystem) -> dict:
    return {
        "dim": sys.dim,
        "m_weights": list(sys.m_weights),
        "k_weights": list(sys.k_weights),
        "entries": [[None if e.is_zero else operator_to_dict(e) for e in row] for row in sys.entries],
        "name": sys.name,
    }


def system_from_dict(d: dict) -> DNSystem:
    dim = int(d["dim"])
    rows = []
    for row in d["entries"]:
        rows.append([zero_operator(dim) if e is None else operator_from_dict({"dim": dim, **e}) for e in row])
    return DNSystem(dim, d["m_weights"], d["k_weights"], rows, name=d.get("name", ""))


BUILTIN_SYSTEMS = {"stokes": stokes}


def _load(path):
    with open(path) as fh:
        return json.load(fh)


def resolve_operator(ref: str, dim: int | None = None) -> ScalarOperator:
    """Built-in name (needs ``dim``) or path to an operator JSON file."""
    if os.path.isfile(ref):
        op = operator_from_dict(_load(ref))
        if dim is not None and op.dim != dim:
            raise ValueError(f"operator file has dim {op.dim}, requested N = {dim}")
        return op
    if dim is None:
        raise ValueError("built-in operators need a dimension")
    return builtin_operator(ref, dim)


def resolve_system(ref: str, dim: int | None = None) -> DNSystem:
    if os.path.isfile(ref):
        return system_from_dict(_load(ref))
    if ref not in BUILTIN_SYSTEMS:
        raise KeyError(f"unknown system {ref!r}; known: {sorted(BUILTIN_SYSTEMS)}")
    if dim is None:
        raise ValueError("built-in systems need a dimension")
    return BUILTIN_SYSTEMS[ref](dim)
