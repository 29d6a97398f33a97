"""
Symbols, ellipticity and A-harmonic polynomials
===============================================

Build a few homogeneous operators, certify ellipticity on the sphere and
count the homogeneous polynomials each one annihilates.
"""
import numpy as np

from ellipticgrowth import symbols as S
from ellipticgrowth.polyaction import Polynomial, harmonic_space, nu, poly_apply, poly_preimage

# Operators are coefficient tables over multi-indices.  The Cauchy-Riemann
# operator carries the complex pair (-i/2, 1/2).
lap = S.laplacian(2)
dbar = S.cauchy_riemann()
print(lap)
print(dbar.coeffs)

# The symbol is sampled on a grid of the unit sphere; the verdict is
# certified once the sampled minimum beats the Lipschitz bound times the
# covering radius.
for op in (lap, dbar, S.bilaplacian(3), S.partial(2, 0)):
    rep = S.certify_ellipticity(op)
    print(f"{op.name:>16s}  margin={rep.margin:.3f}  elliptic={rep.elliptic}  certified={rep.certified}")

# Products of operators multiply symbols.
sq = S.op_multiply(dbar, dbar)
xi = np.array([0.3, -1.2])
print(S.eval_symbol(sq, xi), S.eval_symbol(dbar, xi) ** 2)

# Kernel of the Laplacian on degree-ell polynomials in the plane: two
# dimensional for every ell >= 1 (Re and Im of z^ell).
for ell in range(6):
    kb = harmonic_space(lap, ell)
    print(ell, kb.dimension, nu(ell, 2) - nu(ell - 2, 2))

# dbar kills exactly the holomorphic monomials, one per degree.
print([harmonic_space(dbar, ell).dimension for ell in range(6)])

# Every polynomial has a polynomial preimage.
pi_ = Polynomial(3, {(1, 0, 0): 1.0, (0, 0, 2): -2.0})
bil = S.bilaplacian(3)
w = poly_preimage(bil, pi_, 6)
print("residual", (poly_apply(bil, w) - pi_).coeff_norm())
