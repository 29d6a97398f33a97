"""
Pairing with the Fourier transform of a fundamental solution
============================================================

1/A(xi) is locally integrable only when m < N.  Otherwise the radial
integral is regularised by a finite part.  Both branches pass the division
test <1/A, A phi> = int phi.
"""
from math import pi

import numpy as np

from ellipticgrowth import symbols as S
from ellipticgrowth.finitepart import FinitePartQuad, PolyGaussian, SampledTestFunction, finite_part_pairing
from ellipticgrowth.polyaction import Polynomial

for op in (S.laplacian(3), S.laplacian(2), S.bilaplacian(2), S.bilaplacian(3)):
    N = op.dim
    gauss = PolyGaussian(Polynomial(N, {(0,) * N: 1.0}))
    phi = gauss.times(Polynomial.from_operator(op))
    res = finite_part_pairing(op, phi)
    fine = finite_part_pairing(op, phi, FinitePartQuad().doubled())
    print(f"m={op.order} N={N} {res.branch:>12s}  error={abs(res.value - pi ** (N / 2)):.2e}  doubling gap={abs(res.value - fine.value):.1e}")

# diagnostics of the regularised branch
print(finite_part_pairing(S.bilaplacian(2), PolyGaussian(Polynomial(2, {(0, 0): 1.0}))).diagnostics)

# A sampled test function falls back to finite-difference radial
# derivatives, and says so.
fn = lambda x: np.exp(-np.sum(x * x, -1)) * np.sum(x * x, -1) ** 2  # noqa: E731
res = finite_part_pairing(S.bilaplacian(2), SampledTestFunction(fn, 2, 8.0))
print(res.value - pi, res.diagnostics["finite_difference_derivatives"])
