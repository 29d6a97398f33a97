"""
Measuring growth at infinity
============================

Ball norms over a geometric ladder of radii give a log-log slope.  That
slope decides membership in the growth spaces.
"""
import numpy as np

from ellipticgrowth import fields as F
from ellipticgrowth.growth import RadiusLadder, check_integration, check_product, classify

ladder = RadiusLadder(1.0, 1.5, 16)
print("R_max =", ladder.R_max)

# Powers of |x| recover their exponent at every q with tq + N > 0.
for t in (-1.0, -0.5, 0.5, 2.0):
    prof = classify(F.power(3, t), 2, ladder, s=t)
    print(f"|x|^{t:+.1f}: fitted {prof.fitted_exponent:+.4f}  verdicts {prof.verdicts}")

# A polynomial belongs to M^{s,q} exactly when its degree is at most s.
u = F.monomial((2, 1))
for s in (2.5, 3.0, 3.5):
    prof = classify(u, np.inf, ladder, s=s)
    print(f"x1^2 x2, s={s}: M={prof.verdicts['M']}  M0={prof.verdicts['M0']}")

# The rows are what the CLI writes to CSV.
for row in classify(F.const(2), 1, ladder, s=0).rows()[:3]:
    print(row)

# Products add growth exponents; for pure powers the ratio of the two sides
# has a closed form below one.
rep = check_product(F.power(2, 0.5), F.power(2, 1.0), 0.5, 2, 1.0, 2, ladder)
print("product", rep["lhs"], rep["rhs"], rep["pass"])

# Integrating a gradient bound: margins stay nonnegative rung by rung.
rep = check_integration(F.smoothed_power(2, 2.0), 1.0, 2, 0.5, ladder)
print("min margin", np.min(rep["ineq11_margin"]))
