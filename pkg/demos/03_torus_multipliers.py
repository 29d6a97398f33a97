"""
Fourier multipliers on the torus
================================

Solve A u = f spectrally, look at Calderon-Zygmund ratios and solve the
Stokes system two different ways.
"""
import numpy as np

from ellipticgrowth import dn
from ellipticgrowth import symbols as S
from ellipticgrowth.torus import (
    GridField,
    GridSpec,
    VectorGridField,
    apply_system,
    cz_ratio,
    cz_survey,
    random_battery,
    solve_scalar,
    solve_system,
    solve_system_cofactor,
    spectral_apply,
)

spec = GridSpec(2, 64)
f = random_battery(spec, 1, seed=0)[0]

# round trip through the solver
for op in (S.laplacian(2), S.bilaplacian(2), S.cauchy_riemann()):
    u = solve_scalar(op, f)
    print(op.name, (spectral_apply(op, u) - f).l2() / f.l2())

# At p = 2 Plancherel fixes the ratio: 1 for -Delta, 2 for dbar.
print(cz_ratio(S.laplacian(2), f, 2), cz_ratio(S.cauchy_riemann(), f, 2))

# Away from p = 2 only empirical lower bounds are available.
for row in cz_survey(S.laplacian(2), [1.5, 4], spec, count=10):
    print(row)

# Stokes: velocity components plus a zero pressure slot.
st = dn.stokes(2)
print("det =", dn.dn_det(st))
F = VectorGridField((f, random_battery(spec, 1, seed=1)[0], GridField(spec, np.zeros(spec.shape))))
U = solve_system(st, F)
V = solve_system_cofactor(st, F)
gap = max(np.max(np.abs(a.values - b.values)) for a, b in zip(U.components, V.components))
R = apply_system(st, U)
print("route gap", gap, "residual", max(np.max(np.abs(R[j].values - F[j].values)) for j in range(3)))
