"""
Exterior Dirichlet problem through the Kelvin transform
=======================================================

Invert the exterior of the unit ball onto the ball, solve there with a
Shortley-Weller finite-difference scheme and map back.
"""
import numpy as np

from ellipticgrowth import fields as F
from ellipticgrowth.kelvin import BoundaryData, exterior_solve, grid_convergence, kelvin_transform

# The transform is an involution.
h = F.one_plus_power(3, 0.7)
y = np.random.default_rng(0).normal(size=(5, 3))
print(kelvin_transform(kelvin_transform(h))(y) - h(y))

# g = 1 on the sphere and no source: the decaying solution is 1/|x|.
sol = exterior_solve(BoundaryData(3), n=33)
x = np.array([[1.5, 0, 0], [0, 2.5, 0], [0, 0, 4.0]])
print(sol.u(x), 1 / np.linalg.norm(x, axis=1))
print("decay exponent", sol.profile.fitted_exponent, sol.ball.diagnostics)

# g = x1 gives the dipole x1/|x|^3.
sol = exterior_solve(BoundaryData(3, g=lambda p: p[..., 0]), n=33)
print(sol.u(x[:1]), 1.5 / 1.5**3, sol.profile.fitted_exponent)

# A source f = |x|^-8 transforms to |y|^3 in the ball.
sol = exterior_solve(BoundaryData(3, f=lambda p: np.linalg.norm(p, axis=-1) ** -8.0), n=33)
r = np.linalg.norm(x, axis=1)
print(sol.u(x), (1 / r) * (1 - (1 - r**-5) / 30))

# Second-order convergence of the ball solver.
rep = grid_convergence(lambda p: np.exp(p[..., 0]) * np.cos(p[..., 1]), ns=(17, 33))
print(rep)
