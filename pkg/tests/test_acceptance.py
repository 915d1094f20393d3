"""End-to-end acceptance criteria at their stated resolutions and tolerances.

Each test collects named sub-checks, prints one PASS/FAIL line and fails if
any sub-check fails.  The lines are repeated in the terminal summary.
"""

import warnings

import numpy as np

from conftest import ACCEPTANCE
from cp2willmore import twistor
from cp2willmore.geometry import geometry_at, theta_cubic, twistor_complex_conditions
from cp2willmore.invariants import build_grid, excision_limit, invariant_report, locate_H_zeros, preimage_count
from cp2willmore.jets import SPHERE, TORUS
from cp2willmore.optimize import DEFAULT_STARTS, minimise_flat_torus
from cp2willmore.suites import ZOO, Context, run_suite, sample_points
from cp2willmore.variational import bump_field, el_residual, first_variation_check, whitney_identity_residual
from cp2willmore.zoo import surface

PI = np.pi
CLIFFORD_AREA = 4 * PI**2 / (3 * np.sqrt(3))
SEED = 20240501


class Checks:
    def __init__(self, n):
        self.n = n
        self.items = []

    def rel(self, name, value, target, tol):
        self.items.append((name, abs(value - target) <= tol * abs(target), f"{value:.12g} vs {target:.12g}"))

    def le(self, name, value, bound):
        self.items.append((name, value <= bound, f"{value:.3g} <= {bound:g}"))

    def true(self, name, cond, detail=""):
        self.items.append((name, bool(cond), detail))

    def finish(self):
        failed = [f"{n} ({d})" for n, ok, d in self.items if not ok]
        ok = not failed
        detail = f"{len(self.items)} checks" + ("" if ok else "; failed: " + ", ".join(failed))
        ACCEPTANCE[self.n] = (ok, detail)
        print(f"{'PASS' if ok else 'FAIL'} criterion {self.n}: {detail}")
        assert ok, detail


def points(domain, n=6, seed=SEED):
    return sample_points(domain, n, np.random.default_rng(seed))


def degrees(im):
    grid = build_grid(SPHERE, 48, 96)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return twistor.component_degree(im, 1, grid), twistor.component_degree(im, 2, grid)


def test_criterion_1_complex_line():
    c = Checks(1)
    r = invariant_report(surface("complex_line"), build_grid(SPHERE, 96, 192))
    for name, v, t in [("area", r.area, PI), ("Wminus", r.Wminus, 2 * PI), ("Wplus", r.Wplus, 6 * PI), ("W", r.W, 4 * PI), ("d", r.degree_d, 1), ("chi", r.chi, 2)]:
        c.rel(name, v, t, 1e-8)
    c.finish()


def test_criterion_2_clifford_torus():
    c = Checks(2)
    im = surface("clifford")
    r = invariant_report(im, build_grid(TORUS, 128, 128))
    c.rel("area", r.area, CLIFFORD_AREA, 1e-10)
    c.rel("Wminus", r.Wminus, 2 * CLIFFORD_AREA, 1e-10)
    c.le("max|H|", r.max_abs_H, 1e-10)
    c.le("max|C|", r.max_abs_C, 1e-12)
    vals = np.array([theta_cubic(im, p) for p in points(TORUS, 12)])
    c.le("theta-spread", float(np.max(np.abs(vals - vals[0]))), 1e-8)
    c.finish()


def test_criterion_3_whitney_spheres():
    c = Checks(3)
    pole = [0, 0, 1]
    for t in (0.0, 0.3, 1.0, 2.0):
        im = surface("whitney", t=t)
        r = invariant_report(im)
        c.rel(f"t={t}:Wminus", r.Wminus, 8 * PI, 1e-6)
        c.le(f"t={t}:max|C|", r.max_abs_C, 1e-9)
        c.true(f"t={t}:chi", r.snapped("chi") == 2, str(r.chi))
        c.true(f"t={t}:chi_perp", r.snapped("chi_perp") == 2, str(r.chi_perp))
        c.le(f"t={t}:sigma_minus_sq", r.max_sigma_minus_sq, 1e-9)
        pts = points(SPHERE)
        c.le(f"t={t}:whitney-identity", max(float(np.linalg.norm(whitney_identity_residual(im, pole, p))) for p in pts), 1e-7)
        c.le(f"t={t}:EL", max(float(np.linalg.norm(el_residual(im, p, richardson=True))) for p in pts), 1e-3)
    c.finish()


def test_criterion_4_phi_ab():
    c = Checks(4)
    for a, b in ((1, 0), (0, 1), (1, 2j)):
        im = surface("phi_ab", a=a, b=b)
        r = invariant_report(im)
        s = f"({a},{b})"
        c.rel(f"{s}:Wminus", r.Wminus, 4 * PI, 1e-6)
        c.true(f"{s}:d", r.snapped("degree_d") == 0, str(r.degree_d))
        c.true(f"{s}:chi_perp", r.snapped("chi_perp") == 0, str(r.chi_perp))
        c.true(f"{s}:min|H|>0", r.min_abs_H > 0, f"{r.min_abs_H:.3g}")
        d1, d2 = degrees(im)
        c.le(f"{s}:d1=d2=1", max(abs(d1 - 1), abs(d2 - 1)), 1e-4)
        c.le(f"{s}:negative-spin-condition", max(abs(twistor_complex_conditions(im, p).neg) for p in points(SPHERE)), 1e-6)
    rng = np.random.default_rng(SEED)
    A = np.eye(3) + 0.1 * (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    r = invariant_report(twistor.deform_surface(A, surface("phi_ab", a=1, b=0)), error_estimate=False)
    c.rel("PGL-deformation:Wminus", r.Wminus, 4 * PI, 1e-5)
    c.finish()


def test_criterion_5_psi():
    # [1:0] is a branched map (see the decisions ledger): its chi_perp check is
    # expected to fail and is reported as such
    c = Checks(5)
    for a, b in ((1, 0), (1, 1)):
        im = surface("psi", a=a, b=b)
        r = invariant_report(im)
        s = f"[{a}:{b}]"
        c.rel(f"{s}:Wminus", r.Wminus, 6 * PI, 1e-6)
        c.true(f"{s}:d", r.snapped("degree_d") == 1, str(r.degree_d))
        c.true(f"{s}:chi_perp", r.snapped("chi_perp") == 1, f"chi_perp={r.chi_perp:.6g}")
        c.true(f"{s}:one-H-zero", len(locate_H_zeros(im)) == 1)
        d1, d2 = degrees(im)
        c.le(f"{s}:(d1,d2)=(1,2)", max(abs(d1 - 1), abs(d2 - 2)), 1e-4)
    c.finish()


def test_criterion_6_nodal_sphere():
    c = Checks(6)
    im = surface("nodal_sphere")
    r = invariant_report(im)
    c.rel("Wminus", r.Wminus, 6 * PI, 1e-6)
    mu = preimage_count(im, [0, 0, 1])
    c.true("preimages", mu == 2, str(mu))
    c.true("Wminus<4pi*mu", r.Wminus < 4 * PI * mu)
    c.finish()


def test_criterion_7_bounds():
    c = Checks(7)
    for chk in run_suite("bounds", Context(zoo=ZOO, seed=SEED)):
        c.true(f"{chk.id}[{chk.surface}]", chk.passed, f"{chk.computed}")
    c.finish()


def test_criterion_8_excision():
    c = Checks(8)
    for name, im, a, mu in (("line", surface("complex_line"), [1, 0, 0], 1), ("whitney", surface("whitney", t=1.0), [0, 0, 1], 2)):
        lim, _ = excision_limit(im, a, eps_seq=(0.1, 0.05, 0.025))
        c.rel(f"{name}:-4pi*mu", lim, -4 * PI * mu, 0.01)
    c.finish()


def test_criterion_9_first_variation():
    c = Checks(9)
    im = surface("flat_torus", r1=0.8, r2=0.44, r3=0.41)
    fv = first_variation_check(im, bump_field(TORUS, centre=(1.0, 2.0), width=0.7), build_grid(TORUS, 64, 64))
    c.le("flat-torus:|fd-integral|", fv.discrepancy, 1e-3 * max(1.0, abs(fv.fd)))
    fv = first_variation_check(
        surface("whitney", t=1.0), bump_field(SPHERE, centre=(0.3, -0.2), width=0.6, chart=0), build_grid(SPHERE, 48, 96)
    )
    c.le("whitney:|fd|", abs(fv.fd), 1e-4)
    c.le("whitney:|integral|", abs(fv.integral), 1e-4)
    c.finish()


def test_criterion_10_optimizer():
    c = Checks(10)
    for start in DEFAULT_STARTS:
        res = minimise_flat_torus(start)
        s = ",".join(f"{v:g}" for v in start)
        c.true(f"({s}):converged", res.converged, res.message)
        c.le(f"({s}):r_i^2=1/3", float(np.max(np.abs(res.weights - 1 / 3))), 1e-6)
        c.rel(f"({s}):min Wminus", res.value, 2 * CLIFFORD_AREA, 1e-6)
    c.finish()


def test_criterion_11_property_suites():
    c = Checks(11)
    ctx = Context(zoo=ZOO, seed=SEED)
    for suite in ("identities", "variational", "twistor"):
        for chk in run_suite(suite, ctx):
            c.true(f"{chk.id}[{chk.surface}]", chk.passed, f"{chk.computed}")
    # pointwise Kahler-function identity on fixed-seed samples
    for spec in ZOO:
        im = surface(spec.family, **spec.params)
        for p in points(im.domain, 4):
            rec = geometry_at(im, p)
            c.le(f"Kbar=1+3C^2[{spec.family}]", abs(float(rec.Kbar) - 1 - 3 * float(rec.C) ** 2), 1e-9)
    c.finish()
