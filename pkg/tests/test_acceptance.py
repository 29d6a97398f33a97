"""End-to-end acceptance battery.

Each test prints one ``PASS``/``FAIL`` line naming its criterion, then asserts.
Run ``python tests/test_acceptance.py`` for the summary lines alone.
"""
from math import pi

import numpy as np
import pytest

from ellipticgrowth import dn
from ellipticgrowth import fields as F
from ellipticgrowth import symbols as S
from ellipticgrowth.finitepart import FinitePartQuad, PolyGaussian, finite_part_pairing
from ellipticgrowth.growth import RadiusLadder, check_integration, classify
from ellipticgrowth.kelvin import BoundaryData, exterior_solve, grid_convergence, invert_point, kelvin_transform
from ellipticgrowth.polyaction import Polynomial, graded_basis, harmonic_space, nu, poly_apply, poly_preimage, surjectivity_check
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

OPERATORS = {
    "-lap": S.laplacian,
    "bilap": S.bilaplacian,
    "dbar": lambda N: S.cauchy_riemann(),
    "dbar^2": lambda N: S.op_power(S.cauchy_riemann(), 2),
}


def operator_set(N):
    # the Cauchy-Riemann operator lives in the plane only
    return {k: f(N) for k, f in OPERATORS.items() if not (k.startswith("dbar") and N != 2)}


def line(k, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"


@pytest.fixture
def report(capsys):
    def _report(k, ok, detail):
        with capsys.disabled():
            print("\n" + line(k, ok, detail))
        assert ok, detail

    return _report


# -- 1 --------------------------------------------------------------------------


def criterion_1():
    fails = []
    margins = [(S.laplacian(2), 1.0), (S.laplacian(3), 1.0), (S.cauchy_riemann(), 0.5), (S.bilaplacian(2), 1.0), (S.bilaplacian(3), 1.0)]
    for op, want in margins:
        rep = S.certify_ellipticity(op)
        if not (rep.elliptic and rep.certified and abs(rep.margin - want) <= 1e-12):
            fails.append(f"{op.name}: margin {rep.margin}")
        seen = False
        for n in (2, 4, 8, 16, 32, 64, 128):
            c = S.check_ellipticity(op, n).certified
            if seen and not c:
                fails.append(f"{op.name}: certification lost at refinement {n}")
            seen = seen or c
    for N in (2, 3):
        rep = S.check_ellipticity(S.partial(N, 0))
        if rep.elliptic or rep.certified:
            fails.append(f"d1 (N={N}) accepted")
    return not fails, "ellipticity margins exact, d1 rejected, certification monotone" if not fails else "; ".join(fails)


# -- 2 --------------------------------------------------------------------------


def criterion_2():
    fails = []
    checked = 0
    for N in (2, 3):
        for name, op in operator_set(N).items():
            for ell in range(7):
                got = harmonic_space(op, ell).dimension
                want = nu(ell, N) - nu(ell - op.order, N)
                checked += 1
                if got != want:
                    fails.append(f"{name} N={N} ell={ell}: {got} != {want}")
    return not fails, f"{checked} kernel dimensions equal nu(l,N)-nu(l-m,N)" if not fails else "; ".join(fails)


# -- 3 --------------------------------------------------------------------------


def criterion_3():
    fails = []
    worst = 0.0
    rng = np.random.default_rng(3)
    for N in (2, 3):
        for name, op in operator_set(N).items():
            for kappa in range(1, 5):
                rep = surjectivity_check(op, kappa)
                if rep["rank"] != sum(nu(j, N) for j in range(kappa)):
                    fails.append(f"{name} N={N} kappa={kappa}: rank {rep['rank']}")
                basis = graded_basis(kappa - 1, N)
                pi_ = Polynomial(N, dict(zip(basis, rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis)))))
                w = poly_preimage(op, pi_, op.order + kappa - 1)
                res = (poly_apply(op, w) - pi_).coeff_norm() / pi_.coeff_norm()
                worst = max(worst, res)
    ok = not fails and worst <= 1e-10
    return ok, f"full rank for kappa <= 4, worst preimage residual {worst:.1e}" if not fails else "; ".join(fails)


# -- 4 --------------------------------------------------------------------------


def stokes_det_expected(N):
    # (-1)^N Delta^N with Delta = -laplacian
    lap = S.op_scale(S.laplacian(N), -1)
    return S.op_scale(S.op_power(lap, N), (-1) ** N)


def criterion_4():
    worst = 0.0
    fails = []
    for N in (2, 3):
        sys = dn.stokes(N)
        worst = max(worst, dn.verify_cofactor_identity(sys)["relative_residual"])
        det = dn.dn_det(sys)
        want = stokes_det_expected(N)
        if set(det.coeffs) != set(want.coeffs) or any(abs(det.coeffs[a] - want.coeffs[a]) > 1e-14 for a in want.coeffs):
            fails.append(f"det(stokes{N}) coefficient table differs")
    rng = np.random.default_rng(4)
    made = 0
    while made < 10:
        sys = dn.random_dn_system(rng, n=int(rng.integers(2, 4)), dim=int(rng.integers(2, 4)))
        if dn.dn_det(sys).is_zero:
            continue
        worst = max(worst, dn.verify_cofactor_identity(sys)["relative_residual"])
        made += 1
    ok = not fails and worst <= 1e-12
    return ok, f"worst relative cofactor residual {worst:.1e}, det(stokes) tables exact" if not fails else "; ".join(fails)


# -- 5 --------------------------------------------------------------------------

LADDER = RadiusLadder(1.0, 1.5, 16)


def criterion_5():
    fails = []
    worst = 0.0
    for t in (-1.0, -0.5, 0.0, 0.5, 2.0):
        # tq + N > 0 keeps the ball norms finite
        qs = (1.0, 2.0) if t < 0 else (1.0, 2.0, np.inf)
        for q in qs:
            prof = classify(F.power(3, t), q, LADDER, s=t)
            worst = max(worst, abs(prof.fitted_exponent - t))
            if abs(prof.fitted_exponent - t) > 0.05:
                fails.append(f"|x|^{t} q={q}: fitted {prof.fitted_exponent:.3f}")
    rng = np.random.default_rng(5)
    for N in (2, 3):
        for d in range(5):
            basis = [a for a in graded_basis(d, N)]
            coeffs = dict(zip(basis, rng.normal(size=len(basis))))
            top = [a for a in basis if sum(a) == d]
            coeffs[top[0]] = 1.0 + abs(coeffs[top[0]])
            u = F.polynomial_field(Polynomial(N, coeffs))
            for q in (1.0, 2.0, np.inf):
                for s in (d - 0.1, d, d + 0.1):
                    prof = classify(u, q, LADDER, s=s)
                    worst = max(worst, abs(prof.fitted_exponent - d))
                    if abs(prof.fitted_exponent - d) > 0.05:
                        fails.append(f"deg {d} N={N} q={q}: fitted {prof.fitted_exponent:.3f}")
                    if prof.verdicts["M"] != (d <= s):
                        fails.append(f"deg {d} N={N} q={q} s={s}: verdict M={prof.verdicts['M']}")
    return not fails, f"worst exponent error {worst:.3f}, M verdict iff deg <= s" if not fails else "; ".join(sorted(set(fails))[:6])


# -- 6 --------------------------------------------------------------------------


def criterion_6():
    battery = [
        (F.const(2), 0.0),
        (F.monomial((1, 0)), 0.0),
        (F.smoothed_power(2, 2.0), 1.0),
        (F.one_plus_power(2, 0.5), 0.0),
    ]
    fails = []
    low = np.inf
    for lam in (0.25, 0.5):
        for q in (1, 2):
            for u, s in battery:
                rep = check_integration(u, s, q, lam, LADDER)
                m = float(np.min(rep["ineq11_margin"]))
                low = min(low, m)
                if not rep["ineq11_pass"] or m < 0:
                    fails.append(f"{u.label} lam={lam} q={q}: margin {m:.2e}")
    return not fails, f"all rungs hold, smallest margin {low:.3e}" if not fails else "; ".join(fails)


# -- 7 --------------------------------------------------------------------------


def criterion_7():
    fails = []
    spec = GridSpec(2, 32)
    for op, want in ((S.laplacian(2), 1.0), (S.bilaplacian(2), 1.0), (S.cauchy_riemann(), 2.0)):
        for f in random_battery(spec, 10, seed=7):
            r = cz_ratio(op, f, 2)
            if abs(r - want) > 1e-10:
                fails.append(f"{op.name} p=2 ratio {r}")
                break
    worst = 0.0
    for op in (S.laplacian(2), S.bilaplacian(2), S.cauchy_riemann()):
        for f in random_battery(GridSpec(2, 64), 5, seed=8):
            u = solve_scalar(op, f)
            worst = max(worst, (spectral_apply(op, u) - f).l2() / f.l2())
    if worst > 1e-9:
        fails.append(f"round trip {worst:.1e}")
    drift = 0.0
    for op in (S.laplacian(2), S.bilaplacian(2), S.cauchy_riemann()):
        a = cz_survey(op, [1.5, 4], GridSpec(2, 32), count=20, seed=0)
        b = cz_survey(op, [1.5, 4], GridSpec(2, 64), count=20, seed=0)
        for ra, rb in zip(a, b):
            d = abs(rb["max"] - ra["max"]) / ra["max"]
            drift = max(drift, d)
            if d > 0.2:
                fails.append(f"{op.name} p={ra['p']} drift {d:.2f}")
    detail = f"p=2 identities exact, round trip {worst:.1e}, survey drift {drift:.1%}"
    return not fails, detail if not fails else "; ".join(fails)


# -- 8 --------------------------------------------------------------------------


def criterion_8():
    fails = []
    worst = gap = 0.0
    cases = [(S.laplacian(2), "finite-part"), (S.bilaplacian(2), "finite-part"), (S.bilaplacian(3), "finite-part"), (S.laplacian(3), "direct")]
    for op, branch in cases:
        N = op.dim
        g = PolyGaussian(Polynomial(N, {(0,) * N: 1.0}))
        phi = g.times(Polynomial.from_operator(op))
        a = finite_part_pairing(op, phi)
        b = finite_part_pairing(op, phi, FinitePartQuad().doubled())
        err = abs(a.value - pi ** (N / 2))
        worst, gap = max(worst, err), max(gap, abs(a.value - b.value))
        if a.branch != branch or err > 1e-6 or abs(a.value - b.value) > 1e-6:
            fails.append(f"(m,N)=({op.order},{N}) branch {a.branch} err {err:.1e}")
    return not fails, f"division identity error {worst:.1e}, doubling gap {gap:.1e}" if not fails else "; ".join(fails)


# -- 9 --------------------------------------------------------------------------


def criterion_9():
    fails = []
    sol = exterior_solve(BoundaryData(3), n=65)
    rng = np.random.default_rng(9)
    d = rng.normal(size=(4000, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    x = d * rng.uniform(1.25, 4.0, len(d))[:, None]
    x = np.vstack([x, d[:50] * 1.25, d[50:100] * 4.0])
    r = np.linalg.norm(x, axis=1)
    rel = float(np.max(np.abs(sol.u(x) - 1 / r) * r))
    if rel > 0.02:
        fails.append(f"max relative error {rel:.2%}")
    slope = sol.profile.fitted_exponent
    if abs(slope + 1) > 0.1:
        fails.append(f"decay exponent {slope:.3f}")
    y = rng.normal(size=(10**4, 3)) * 2
    inv = float(np.max(np.abs(invert_point(invert_point(y)) - y) / np.linalg.norm(y, axis=1)[:, None]))
    h = F.one_plus_power(3, 0.7)
    kk = kelvin_transform(kelvin_transform(h))
    inv = max(inv, float(np.max(np.abs(kk(y) - h(y)) / np.abs(h(y)))))
    if inv > 1e-12:
        fails.append(f"involution {inv:.1e}")
    conv = grid_convergence(lambda p: np.exp(p[..., 0]) * np.cos(p[..., 1]), ns=(17, 33, 65))
    order = float(conv["orders"][-1])
    if order < 1.8:
        fails.append(f"FD order {order:.2f}")
    detail = f"max rel error {rel:.1e}, exponent {slope:.3f}, involution {inv:.1e}, FD order {order:.2f}"
    return not fails, detail if not fails else "; ".join(fails)


# -- 10 -------------------------------------------------------------------------


def criterion_10():
    spec = GridSpec(2, 64)
    rng = np.random.default_rng(10)
    comps = [random_battery(spec, 1, int(rng.integers(1 << 30)))[0] for _ in range(2)]
    comps.append(GridField(spec, np.zeros(spec.shape)))
    Fv = VectorGridField(tuple(comps))
    sys = dn.stokes(2)
    a = solve_system(sys, Fv)
    b = solve_system_cofactor(sys, Fv)
    gap = max(np.max(np.abs(x.values - y.values)) for x, y in zip(a.components, b.components))
    R = apply_system(sys, a)
    num = np.sqrt(sum(np.sum(np.abs(R[j].values - Fv[j].values) ** 2) for j in range(3)))
    den = np.sqrt(sum(np.sum(np.abs(Fv[j].values) ** 2) for j in range(3)))
    res = num / den
    ok = gap <= 1e-8 and res <= 1e-9
    return ok, f"route gap {gap:.1e}, residual {res:.1e}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k, report):
    ok, detail = CRITERIA[k - 1]()
    report(k, ok, detail)


if __name__ == "__main__":
    for k, crit in enumerate(CRITERIA, 1):
        print(line(k, *crit()))
