"""Verification suites over the surface zoo.

Each suite returns a list of :class:`Check` rows.  Random sample points come
from a seeded generator, so a suite run is reproducible given its seed.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from . import twistor
from .errors import DomainError
from .geometry import geometry_at, kahler_projection_residual, spin_identity_residuals, theta_cubic
from .invariants import InvariantReport, build_grid, excision_limit, invariant_report
from .jets import SPHERE, ChartPoint, Immersion, best_chart, sphere_to_chart
from .variational import (
    bump_field,
    distance_checks,
    el_residual,
    first_variation_check,
    whitney_identity_residual,
)
from .zoo import FamilySpec, expected_value, make_surface

PI = np.pi
SUITES = ("bounds", "twistor", "variational", "identities")
EQUALITY_REL = 1e-6
SPIN_ZERO = 1e-9
GENERIC_FOCUS = np.array([1.0, 2.0j, 0.5]) / np.linalg.norm([1.0, 2.0, 0.5])
POLE_FOCUS = np.array([0.0, 0.0, 1.0])

# the default zoo: every family, several parameters where the family has them
ZOO = (
    FamilySpec("complex_line"),
    FamilySpec("whitney", {"t": 0.0}),
    FamilySpec("whitney", {"t": 0.3}),
    FamilySpec("whitney", {"t": 1.0}),
    FamilySpec("whitney", {"t": 2.0}),
    FamilySpec("phi_ab", {"a": 1, "b": 0}),
    FamilySpec("phi_ab", {"a": 0, "b": 1}),
    FamilySpec("phi_ab", {"a": 1, "b": 2j}),
    FamilySpec("psi", {"a": 1, "b": 1}),
    FamilySpec("psi", {"a": 1, "b": 2j}),
    FamilySpec("nodal_sphere"),
    FamilySpec("clifford"),
    FamilySpec("flat_torus", {"r1": 0.8, "r2": 0.44, "r3": 0.41}),
)


@dataclass
class Check:
    id: str
    surface: str
    computed: float
    expected: Optional[float]
    tol: float
    passed: bool
    basis: str = ""

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def as_dict(self) -> dict:
        out = asdict(self)
        out["status"] = self.status
        return out


def close(cid, surf, computed, expected, tol, rel=False, basis="") -> Check:
    computed, expected = float(computed), float(expected)
    scale = max(1.0, abs(expected)) if rel else 1.0
    return Check(cid, surf, computed, expected, tol, bool(abs(computed - expected) <= tol * scale), basis)


def at_most(cid, surf, computed, bound, basis="") -> Check:
    return Check(cid, surf, float(computed), None, float(bound), bool(computed <= bound), basis)


def at_least(cid, surf, slack, tol, basis="") -> Check:
    """``slack`` is lhs - rhs of an inequality lhs >= rhs."""
    return Check(cid, surf, float(slack), 0.0, tol, bool(slack >= -tol), basis)


def agree(cid, surf, computed: bool, expected: bool, basis="") -> Check:
    return Check(cid, surf, float(computed), float(expected), 0.0, computed == expected, basis)


def label(spec: FamilySpec) -> str:
    if not spec.params:
        return spec.family
    inner = ",".join(f"{k}={_fmt(v)}" for k, v in spec.params.items())
    return f"{spec.family}({inner})"


def _fmt(v) -> str:
    if isinstance(v, complex):
        if v.imag == 0:
            return f"{v.real:g}"
        return f"{v.real:g}{v.imag:+g}i"
    return f"{v:g}" if isinstance(v, float) else str(v)


def sample_points(domain: str, n: int, rng: np.random.Generator) -> list:
    """Uniform random points; sphere points use the stereographic chart where |z| <= 1."""
    pts = []
    for _ in range(n):
        if domain == SPHERE:
            s = rng.standard_normal(3)
            s /= np.linalg.norm(s)
            chart = int(best_chart(s))
            x, y = sphere_to_chart(s, chart)
            pts.append(ChartPoint(SPHERE, float(x), float(y), chart))
        else:
            x, y = rng.uniform(0, 2 * PI, 2)
            pts.append(ChartPoint(domain, float(x), float(y), 0))
    return pts


class Context:
    """Caches surfaces and reports for one suite run."""

    def __init__(self, zoo=ZOO, seed: int = 0, grid: Optional[tuple] = None, samples: int = 6):
        self.zoo = tuple(zoo)
        self.seed = seed
        self.grid = grid
        self.samples = samples
        self._im: dict = {}
        self._rep: dict = {}

    def surface(self, spec: FamilySpec) -> Immersion:
        key = label(spec)
        if key not in self._im:
            self._im[key] = make_surface(spec)
        return self._im[key]

    def grid_for(self, im: Immersion):
        return build_grid(im.domain, *self.grid) if self.grid else None

    def report(self, spec: FamilySpec) -> InvariantReport:
        key = label(spec)
        if key not in self._rep:
            im = self.surface(spec)
            self._rep[key] = invariant_report(im, self.grid_for(im))
        return self._rep[key]

    def points(self, spec: FamilySpec, tag: str) -> list:
        # one independent, reproducible stream per (surface, check family)
        key = f"{label(spec)}/{tag}"
        rng = np.random.default_rng([self.seed, sum(key.encode())])
        return sample_points(self.surface(spec).domain, self.samples, rng)


def _meta(ctx: Context, spec: FamilySpec, key: str):
    return expected_value(ctx.surface(spec).metadata, key)


# --------------------------------------------------------------------------
# bounds


def _equality(slack: float, ref: float) -> bool:
    return abs(slack) <= EQUALITY_REL * max(1.0, abs(ref))


def bounds_suite(ctx: Context) -> list:
    out = []
    for spec in ctx.zoo:
        s, r = label(spec), ctx.report(spec)
        meta = ctx.surface(spec).metadata
        mu = expected_value(meta, "mu")
        is_line = spec.family == "complex_line"
        slack = r.Wminus - 2 * PI * mu
        out.append(at_least("multiplicity-bound:Wminus>=2pi*mu", s, slack, 1e-6))
        out.append(agree("multiplicity-bound:Wminus-equality-iff-line", s, _equality(slack, r.Wminus), is_line))
        slack = r.theta_bound - 4 * PI * mu
        out.append(at_least("multiplicity-bound:int(|H|^2+3+C^2)>=4pi*mu", s, slack, 1e-6))
        out.append(agree("multiplicity-bound:theta-equality-iff-line", s, _equality(slack, r.theta_bound), is_line))
        if meta.get("lagrangian"):
            slack = r.Wminus - 4 * PI * mu
            out.append(at_least("lagrangian-bound:Wminus>=4pi*mu", s, slack, 1e-6))
            whitney = spec.family in ("whitney", "totally_geodesic_rp2")
            out.append(agree("lagrangian-bound:equality-iff-whitney", s, _equality(slack, r.Wminus), whitney))
        elif spec.family == "nodal_sphere":
            out.append(
                Check(
                    "lagrangian-bound:fails-off-lagrangian(Wminus<4pi*mu)",
                    s,
                    r.Wminus,
                    4 * PI * mu,
                    0.0,
                    bool(r.Wminus < 4 * PI * mu),
                    "6 pi < 8 pi",
                )
            )
        # spin bounds: equality exactly for twistor holomorphic surfaces
        for sign, W, top, sig in (
            ("+", r.Wplus, r.chi - r.chi_perp, r.max_sigma_plus_sq),
            ("-", r.Wminus, r.chi + r.chi_perp, r.max_sigma_minus_sq),
        ):
            slack = W - 2 * PI * top
            name = "Wplus>=2pi(chi-chi_perp)" if sign == "+" else "Wminus>=2pi(chi+chi_perp)"
            out.append(at_least(f"spin-bound:{name}", s, slack, 1e-6))
            out.append(agree(f"spin-bound:{sign}equality-iff-sigma{sign}=0", s, _equality(slack, W), sig <= SPIN_ZERO))
    return out


# --------------------------------------------------------------------------
# twistor


def twistor_suite(ctx: Context, degree_grid=(48, 96)) -> list:
    out = []
    for spec in ctx.zoo:
        im = ctx.surface(spec)
        if im.domain != SPHERE:
            continue
        s, r = label(spec), ctx.report(spec)
        if r.max_sigma_minus_sq > SPIN_ZERO:
            continue
        out.append(at_most("twistor:max|sigma-|^2<=1e-9", s, r.max_sigma_minus_sq, 1e-9))
        grid = build_grid(SPHERE, *degree_grid)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            d1 = twistor.component_degree(im, 1, grid)
            d2 = twistor.component_degree(im, 2, grid)
        out.append(close("twistor:d=d2-d1", s, r.degree_d, d2 - d1, 1e-4))
        out.append(close("twistor:Wminus=2pi(d1+d2)", s, r.Wminus, 2 * PI * (d1 + d2), 1e-4, rel=True))
        exp = _meta(ctx, spec, "twistor_degrees")
        if exp is not None:
            out.append(close("twistor:d1", s, d1, exp[0], 1e-4))
            out.append(close("twistor:d2", s, d2, exp[1], 1e-4))
        worst = 0.0
        for p in ctx.points(spec, "lift"):
            try:
                worst = max(worst, *twistor.lifted_metric_residual(im, p))
            except DomainError:
                continue  # a constant component has no metric to compare
        out.append(at_most("twistor:lift-metric-residual", s, worst, 1e-6))
        if im.lift is not None:
            dev = 0.0
            for p in ctx.points(spec, "lift"):
                a, n = twistor.analytic_lift(im, p), twistor.numeric_lift(im, p)
                dev = max(dev, float(twistor.proj_distance(a.z.rep, n.z.rep)), float(twistor.proj_distance(a.w.rep, n.w.rep)))
            out.append(at_most("twistor:numeric-lift=analytic-lift", s, dev, 1e-8))
        if spec.family in ("whitney", "totally_geodesic_rp2") and spec.params.get("t", 0.0) == 0.0:
            out.append(at_most("twistor:second-component-is-dual-curve", s, twistor.dual_curve_residual(im, grid), 1e-6))
    # projective deformations preserve W-
    rng = np.random.default_rng(ctx.seed)
    A = np.eye(3) + 0.1 * (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    for spec in ctx.zoo:
        if spec.family != "phi_ab":
            continue
        im = twistor.deform_surface(A, ctx.surface(spec))
        rep = invariant_report(im, ctx.grid_for(im), error_estimate=False)
        out.append(close("twistor:deformation-preserves-Wminus", label(spec), rep.Wminus, 4 * PI, 1e-5, rel=True))
    return out


# --------------------------------------------------------------------------
# variational


def variational_suite(ctx: Context) -> list:
    out = []
    for spec in ctx.zoo:
        im, s, r = ctx.surface(spec), label(spec), ctx.report(spec)
        minimal = r.max_abs_H <= 1e-8
        negative = r.max_sigma_minus_sq <= SPIN_ZERO
        if minimal or negative:
            worst = max(float(np.linalg.norm(el_residual(im, p, richardson=True))) for p in ctx.points(spec, "el"))
            why = "minimal surfaces are critical" if minimal else "twistor holomorphic surfaces minimise W-"
            out.append(at_most("variational:Euler-Lagrange(Wminus)", s, worst, 1e-3, why))
        if minimal and r.max_sigma_plus_sq <= SPIN_ZERO:
            worst = max(float(np.linalg.norm(el_residual(im, p, which="Wplus", richardson=True))) for p in ctx.points(spec, "el"))
            out.append(at_most("variational:Euler-Lagrange(Wplus)", s, worst, 1e-3, "superminimal with positive spin"))
        lagrangian = bool(im.metadata.get("lagrangian"))
        for tag, a in (("pole", POLE_FOCUS), ("generic", GENERIC_FOCUS)):
            slack, grad, lag = np.inf, 0.0, 0.0
            for p in ctx.points(spec, "dist-" + tag):
                try:
                    dc = distance_checks(im, a, p)
                except DomainError:
                    continue
                slack = min(slack, dc.lap_slack)
                grad = max(grad, abs(dc.grad_res))
                lag = max(lag, abs(dc.lagrangian_res))
            out.append(at_least(f"distance:Lap-log(1-h)>=-|H|^2-3-C^2[{tag}]", s, slack, 1e-5))
            out.append(at_most(f"distance:|grad h|^2=4h(1-h)-|xi|^2[{tag}]", s, grad, 1e-8))
            if lagrangian:
                out.append(at_most(f"distance:sum|(e_i,a)|^2=1-h[{tag}]", s, lag, 1e-8))
        if spec.family == "whitney" and spec.params["t"] > 0:
            worst = max(float(np.linalg.norm(whitney_identity_residual(im, POLE_FOCUS, p))) for p in ctx.points(spec, "whitney"))
            out.append(at_most("distance:H=xi/(1-h)", s, worst, 1e-7, "equality case of the Lagrangian bound"))
    # excision integral tends to -4 pi mu
    for spec, a in ((FamilySpec("complex_line"), [1.0, 0.0, 0.0]), (FamilySpec("whitney", {"t": 1.0}), POLE_FOCUS)):
        im = ctx.surface(spec)
        mu = _meta(ctx, spec, "mu")
        lim, _ = excision_limit(im, a, ctx.grid_for(im))
        out.append(close("distance:excision-integral=-4pi*mu", label(spec), lim, -4 * PI * mu, 0.01 * 4 * PI * mu))
    # first variation of W-: finite difference against the EL integral
    torus = FamilySpec("flat_torus", {"r1": 0.8, "r2": 0.44, "r3": 0.41})
    im = ctx.surface(torus)
    fv = first_variation_check(im, bump_field(im.domain, (1.0, 2.0), 0.7), build_grid(im.domain, 64, 64))
    out.append(close("variational:first-variation(fd=integral)", label(torus), fv.integral, fv.fd, 1e-3 * max(1.0, abs(fv.fd))))
    spec = FamilySpec("whitney", {"t": 1.0})
    im = ctx.surface(spec)
    fv = first_variation_check(im, bump_field(im.domain, (0.3, -0.2), 0.6, chart=0), build_grid(im.domain, 48, 96))
    out.append(at_most("variational:first-variation-vanishes(fd)", label(spec), abs(fv.fd), 1e-4, "critical point"))
    out.append(at_most("variational:first-variation-vanishes(integral)", label(spec), abs(fv.integral), 1e-4, "critical point"))
    return out


# --------------------------------------------------------------------------
# identities


def identities_suite(ctx: Context) -> list:
    out = []
    for spec in ctx.zoo:
        im, s, r = ctx.surface(spec), label(spec), ctx.report(spec)
        meta = im.metadata
        out.append(close("identities:W=(Wplus+Wminus)/2", s, r.W, 0.5 * (r.Wplus + r.Wminus), 1e-10, rel=True))
        if meta.get("lagrangian"):
            out.append(close("identities:chi=chi_perp(lagrangian)", s, r.chi_perp, r.chi, 10 * max(r.errors.get("chi_perp", 0), 1e-8)))
        for key, attr in (("Wminus", "Wminus"), ("area", "area"), ("degree", "degree_d"), ("chi", "chi"), ("chi_perp", "chi_perp")):
            val = expected_value(meta, key)
            if val is not None:
                out.append(close(f"expected:{attr}", s, getattr(r, attr), val, 1e-6, rel=True, basis=meta[key][1]))
        rng = np.random.default_rng([ctx.seed, 11])
        kb = sig = eq1 = 0.0
        for p in ctx.points(spec, "pointwise"):
            rec = geometry_at(im, p)
            H2, C = float(rec.H_sq), float(rec.C)
            kb = max(kb, abs(float(rec.Kbar) - (1 + 3 * C * C)))
            lhs_p = H2 + float(rec.Kbar) - float(rec.Kbarperp)
            rhs_p = float(rec.K) - float(rec.Kperp) + float(rec.sigma_plus_sq) / 16
            lhs_m = H2 + float(rec.Kbar) + float(rec.Kbarperp)
            rhs_m = float(rec.K) + float(rec.Kperp) + float(rec.sigma_minus_sq) / 16
            sig = max(sig, abs(lhs_p - rhs_p), abs(lhs_m - rhs_m))
            eq1 = max(eq1, kahler_projection_residual(rec, rng.standard_normal(2), rng.standard_normal(2)))
        out.append(at_most("identities:Kbar=1+3C^2", s, kb, 1e-9))
        out.append(at_most("identities:|sigma+-|^2-decomposition", s, sig, 1e-8))
        out.append(at_most("identities:Kahler-form-projections", s, eq1, 1e-10))
        if r.max_abs_H <= 1e-8 and r.max_sigma_plus_sq <= SPIN_ZERO:
            worst = 0.0
            for p in ctx.points(spec, "spin"):
                res = spin_identity_residuals(im, p)
                worst = max(worst, abs(res.grad_res), abs(res.lap_res))
            out.append(at_most("identities:Kahler-function-equations(superminimal)", s, worst, 1e-6))
        if spec.family == "clifford":
            vals = np.array([theta_cubic(im, p) for p in ctx.points(spec, "theta")])
            spread = float(np.std(vals) / abs(np.mean(vals)))
            out.append(at_most("identities:cubic-form-constant(flat-coordinates)", s, spread, 1e-8))
    return out


SUITE_FUNCS: dict[str, Callable] = {
    "bounds": bounds_suite,
    "twistor": twistor_suite,
    "variational": variational_suite,
    "identities": identities_suite,
}


def run_suite(name: str, ctx: Context) -> list:
    if name == "all":
        return [c for n in SUITES for c in SUITE_FUNCS[n](ctx)]
    return SUITE_FUNCS[name](ctx)
