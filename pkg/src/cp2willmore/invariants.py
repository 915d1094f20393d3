"""Global invariants by quadrature over sphere and torus parameter domains.

Sphere surfaces are integrated in the global polar chart with Gauss-Legendre
nodes in theta and the trapezoid rule in phi; the induced area element
vanishes at the coordinate poles, so no node sits on a chart singularity.
Tori use the tensor trapezoid rule, which is spectrally accurate for smooth
periodic integrands.

Integrals are reduced with a single ``np.sum`` over the full node array in
grid order, so results do not depend on how node evaluation is split into
chunks or threads.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from . import cp2
from .cp2 import ProjPoint
from .errors import ConfigError, DomainError, ImmersionError
from .geometry import GeometryRecord, geometry_batch
from .jets import NORTH, POLAR, SOUTH, SPHERE, TORUS, TORUS_CHART, ChartPoint, Immersion, domain_point, sphere_point, sphere_to_chart

CHUNK = 4096
DEFAULT_SPHERE_GRID = (96, 192)
DEFAULT_TORUS_GRID = (128, 128)


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor grid with flattened node coordinates ``x``, ``y`` in ``chart``.

    ``weights`` are parameter-space weights; integrands must be multiplied by
    the area density sqrt(det g) in the same chart.
    """

    domain: str
    chart: int
    x: np.ndarray
    y: np.ndarray
    weights: np.ndarray
    resolution: tuple

    @property
    def nodes(self) -> list:
        return [ChartPoint(self.domain, float(a), float(b), self.chart) for a, b in zip(self.x, self.y)]

    @property
    def shape(self) -> tuple:
        return self.resolution

    def __len__(self) -> int:
        return self.x.size

    def coarsened(self) -> "QuadratureGrid":
        nu, nv = self.resolution
        return build_grid(self.domain, max(8, nu // 2), max(8, nv // 2))


def build_grid(domain: str, n_u: int, n_v: int) -> QuadratureGrid:
    if n_u < 8 or n_v < 8:
        raise ConfigError("quadrature resolution must be at least 8 in each direction")
    if domain == TORUS:
        u = 2 * np.pi * np.arange(n_u) / n_u
        v = 2 * np.pi * np.arange(n_v) / n_v
        X, Y = np.meshgrid(u, v, indexing="ij")
        w = np.full(X.shape, (2 * np.pi / n_u) * (2 * np.pi / n_v))
        return QuadratureGrid(TORUS, TORUS_CHART, X.ravel(), Y.ravel(), w.ravel(), (n_u, n_v))
    if domain == SPHERE:
        t, wt = np.polynomial.legendre.leggauss(n_u)
        theta = 0.5 * np.pi * (t + 1)
        wt = 0.5 * np.pi * wt
        phi = 2 * np.pi * np.arange(n_v) / n_v
        X, Y = np.meshgrid(theta, phi, indexing="ij")
        w = np.outer(wt, np.full(n_v, 2 * np.pi / n_v))
        return QuadratureGrid(SPHERE, POLAR, X.ravel(), Y.ravel(), w.ravel(), (n_u, n_v))
    raise ConfigError(f"unknown domain {domain!r}")


def default_grid(im: Immersion) -> QuadratureGrid:
    return build_grid(im.domain, *(DEFAULT_SPHERE_GRID if im.domain == SPHERE else DEFAULT_TORUS_GRID))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CP2W_THREADS", "1")))
    except ValueError:
        return 1


def map_nodes(fn, x, y):
    """Apply ``fn(x_chunk, y_chunk) -> dict of arrays`` over node chunks, in order."""
    bounds = [(i, min(i + CHUNK, x.size)) for i in range(0, x.size, CHUNK)]

    def run(b):
        return fn(x[b[0] : b[1]], y[b[0] : b[1]])

    n = _threads()
    if n > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(n) as ex:
            parts = list(ex.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


# --------------------------------------------------------------------------
# invariant report


INTEGRALS = ("area", "W", "Wplus", "Wminus", "theta_bound", "degree_d", "chi", "chi_perp")
INTEGER_VALUED = ("degree_d", "chi", "chi_perp", "adjunction")


def _integrands(rec: GeometryRecord) -> dict:
    H2, C = rec.H_sq, rec.C
    return {
        "area": np.ones_like(C),
        "W": H2 + 1 + 3 * C**2,
        "Wplus": H2 + 6 * C**2,
        "Wminus": H2 + 2,
        "theta_bound": H2 + 3 + C**2,
        "degree_d": C / np.pi,
        "chi": rec.K / (2 * np.pi),
        "chi_perp": rec.Kperp / (2 * np.pi),
    }


def _grid_integrals(im: Immersion, grid: QuadratureGrid) -> dict:
    def fn(x, y):
        rec = geometry_batch(im, grid.chart, x, y)
        dens = rec.sqrt_det_g
        out = {k: v * dens for k, v in _integrands(rec).items()}
        out["absH"] = np.sqrt(rec.H_sq)
        out["C"] = rec.C
        out["sp"] = rec.sigma_plus_sq
        out["sm"] = rec.sigma_minus_sq
        return out

    vals = map_nodes(fn, grid.x, grid.y)
    res = {k: float(np.sum(vals[k] * grid.weights)) for k in INTEGRALS}
    res["adjunction"] = res["chi"] - res["chi_perp"]
    res["min_abs_H"] = float(np.min(vals["absH"]))
    res["max_abs_H"] = float(np.max(vals["absH"]))
    res["max_abs_C"] = float(np.max(np.abs(vals["C"])))
    res["min_C"] = float(np.min(vals["C"]))
    res["max_C"] = float(np.max(vals["C"]))
    res["max_sigma_plus_sq"] = float(np.max(vals["sp"]))
    res["max_sigma_minus_sq"] = float(np.max(vals["sm"]))
    return res


@dataclass(frozen=True)
class InvariantReport:
    """Integrated invariants with grid-doubling error estimates.

    ``theta_bound`` is the integral of |H|^2 + 3 + C^2 used by the
    multiplicity bound.  ``errors[name]`` is |I(n) - I(n/2)|.
    """

    area: float
    W: float
    Wplus: float
    Wminus: float
    theta_bound: float
    degree_d: float
    chi: float
    chi_perp: float
    adjunction: float
    min_abs_H: float
    max_abs_H: float
    max_abs_C: float
    min_C: float
    max_C: float
    max_sigma_plus_sq: float
    max_sigma_minus_sq: float
    errors: dict = field(default_factory=dict)
    resolution: tuple = ()

    def snapped(self, name: str) -> Optional[int]:
        """Nearest integer if within 10x the error estimate, else None."""
        raw = getattr(self, name)
        k = int(round(raw))
        tol = 10 * max(self.errors.get(name, 0.0), 1e-10)
        return k if abs(raw - k) < tol else None

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__ if k not in ("errors", "resolution")}
        return out


def invariant_report(im: Immersion, grid: Optional[QuadratureGrid] = None, error_estimate: bool = True) -> InvariantReport:
    grid = grid or default_grid(im)
    if grid.domain != im.domain:
        raise ConfigError(f"grid on {grid.domain} but immersion lives on {im.domain}")
    fine = _grid_integrals(im, grid)
    errors = {}
    if error_estimate:
        coarse = _grid_integrals(im, grid.coarsened())
        errors = {k: abs(fine[k] - coarse[k]) for k in (*INTEGRALS, "adjunction")}
    return InvariantReport(**fine, errors=errors, resolution=grid.resolution)


# --------------------------------------------------------------------------
# point search helpers shared by the H-zero locator and the preimage probe


def _grid_extrema(values, grid: QuadratureGrid, kind: str):
    """Indices of discrete local minima (``kind='min'``) or maxima of node values."""
    nu, nv = grid.resolution
    f = values.reshape(nu, nv)
    if kind == "max":
        f = -f
    better = np.ones(f.shape, dtype=bool)
    periodic_u = grid.domain == TORUS
    for du in (-1, 0, 1):
        for dv in (-1, 0, 1):
            if du == dv == 0:
                continue
            g = np.roll(np.roll(f, du, axis=0), dv, axis=1)
            if not periodic_u:
                # no wrap-around in theta
                if du == 1:
                    g[0, :] = np.inf
                elif du == -1:
                    g[-1, :] = np.inf
            better &= f <= g
    return np.flatnonzero(better.ravel())


MAX_SEEDS = 32


def _seeds(grid: QuadratureGrid, idx, values) -> list:
    """Refinement starts: best node per neighbourhood, plus the sphere poles.

    Tied minima (rings of equal values on symmetric surfaces) are merged so
    each basin is refined once.
    """
    nu, nv = grid.resolution
    radius = 4 * 2 * np.pi / min(nu, nv)
    order = sorted(idx, key=lambda i: values[i])
    pts, emb = [], []
    if grid.domain == SPHERE:
        # the coordinate poles are not grid nodes: always try them
        for start in ((0.0, 0.0), (np.pi, 0.0)):
            pts.append(start)
            emb.append(domain_point(SPHERE, POLAR, *start))
    for i in order:
        e = domain_point(grid.domain, grid.chart, grid.x[i], grid.y[i])
        if all(np.linalg.norm(e - f) > radius for f in emb):
            pts.append((float(grid.x[i]), float(grid.y[i])))
            emb.append(e)
        if len(pts) >= MAX_SEEDS:
            break
    return pts


def _refine(objective, domain, start, xatol=1e-10):
    """Nelder-Mead on a stereographic (sphere) or flat (torus) chart.

    ``objective(chart, x, y)`` takes float arrays.  Returns the refined
    ChartPoint, objective value and convergence flag.
    """
    if domain == SPHERE:
        s = sphere_point(POLAR, *start)
        chart = NORTH if s[2] >= 0 else SOUTH
        x0 = np.array(sphere_to_chart(s, chart), dtype=float)
    else:
        chart = TORUS_CHART
        x0 = np.array(start, dtype=float)

    def f(v):
        if domain == SPHERE and np.hypot(*v) > 1.5:
            return np.inf
        return float(objective(chart, np.float64(v[0]), np.float64(v[1])))

    if not np.isfinite(f(x0)):
        # started on a singular point (e.g. a branch point): step off it
        x0 = x0 + 1e-2
    res = minimize(f, x0, method="Nelder-Mead", options={"xatol": xatol, "fatol": 1e-30, "maxiter": 2000, "maxfev": 3000})
    x, y = res.x
    if domain == SPHERE:
        s = sphere_point(chart, x, y)
        chart2 = NORTH if s[2] >= 0 else SOUTH
        x, y = sphere_to_chart(s, chart2)
        return ChartPoint(SPHERE, float(x), float(y), chart2), float(res.fun), bool(res.success)
    return ChartPoint(TORUS, float(x), float(y), TORUS_CHART), float(res.fun), bool(res.success)


def _embed(p: ChartPoint):
    if p.domain == SPHERE:
        return sphere_point(p.chart, p.x, p.y)
    return np.array([np.cos(p.x), np.sin(p.x), np.cos(p.y), np.sin(p.y)])


def _cluster(points, radius):
    reps = []
    for p in points:
        e = _embed(p)
        if all(np.linalg.norm(e - _embed(q)) > radius for q in reps):
            reps.append(p)
    return reps


class ZeroSearch(list):
    """Located points; ``unresolved`` holds candidates whose refinement failed.

    ``identically_zero`` is set (and the list left empty) when |H| < tol at
    every grid node, i.e. the surface looks minimal and zeros are not isolated.
    """

    def __init__(self, points=(), unresolved=(), identically_zero=False):
        super().__init__(points)
        self.unresolved = list(unresolved)
        self.identically_zero = identically_zero


def locate_H_zeros(im: Immersion, grid: Optional[QuadratureGrid] = None, tol: float = 1e-4) -> ZeroSearch:
    """Geometric zeros of the mean curvature vector (no multiplicities)."""
    if not tol > 0:
        raise ConfigError("tolerance must be positive")
    grid = grid or default_grid(im)
    absH = map_nodes(lambda x, y: {"h": np.sqrt(geometry_batch(im, grid.chart, x, y).H_sq)}, grid.x, grid.y)["h"]
    if np.max(absH) < tol:
        return ZeroSearch(identically_zero=True)
    idx = _grid_extrema(absH, grid, "min")
    # only minima that look like they might reach zero
    scale = max(float(np.max(absH)), 1e-300)
    idx = [i for i in idx if absH[i] < 0.25 * scale]

    def objective(chart, x, y):
        try:
            return geometry_batch(im, chart, x, y).H_sq
        except ImmersionError:
            # branch points have unbounded |H|
            return np.inf

    found, unresolved = [], []
    for start in _seeds(grid, idx, absH):
        p, val, ok = _refine(objective, im.domain, start)
        if np.sqrt(max(val, 0.0)) < tol:
            found.append(p)
        elif not ok:
            unresolved.append(p)
    return ZeroSearch(_cluster(found, 1e-4), _cluster(unresolved, 1e-4))


# --------------------------------------------------------------------------
# distance-function quantities


def _focus(a) -> np.ndarray:
    rep = a.rep if isinstance(a, ProjPoint) else np.asarray(a, dtype=complex)
    n = np.linalg.norm(rep)
    if not n > 0:
        raise DomainError("focus point must be nonzero")
    return rep / n


@dataclass(frozen=True)
class DistanceTerms:
    """h = f o phi and the pieces of Delta log(1 - h) at each point."""

    h: np.ndarray
    xi4: np.ndarray  # normal part of grad f, real 4-coordinates
    tangent_sum: np.ndarray  # sum_i |(e_i, a)|^2
    grad_h_sq: np.ndarray  # |grad h|^2 from the tangential part
    H_xi: np.ndarray

    @property
    def xi_sq(self):
        return np.sum(self.xi4**2, axis=-1)

    @property
    def log_laplacian(self):
        u = 1 - self.h
        return -2 * self.tangent_sum / u - 2 * self.H_xi / u + self.xi_sq / u**2


def distance_terms(rec: GeometryRecord, a) -> DistanceTerms:
    arep = _focus(a)
    Z = rec.point
    za = cp2.herm(Z, arep)
    h = np.abs(za) ** 2
    grad = 2 * cp2.hproject(za[..., None] * arep, Z)
    g4 = rec.to_r4(grad)
    xi4 = rec.normal_part4(g4)
    tan4 = g4 - xi4
    e1, e2 = rec.tangent_frame
    tsum = np.abs(cp2.herm(e1, arep)) ** 2 + np.abs(cp2.herm(e2, arep)) ** 2
    H_xi = np.sum(rec.H4 * xi4, axis=-1)
    return DistanceTerms(h, xi4, tsum, np.sum(tan4**2, axis=-1), H_xi)


def excised_log_integral(im: Immersion, a, eps: float, grid: Optional[QuadratureGrid] = None) -> float:
    """Integral of Delta log(1 - h) over nodes with 1 - h > eps^2.

    The Laplacian is evaluated in closed form from the Hessian of the
    distance function; tends to -4 pi mu as eps -> 0.
    """
    if not eps > 0:
        raise ConfigError("excision radius must be positive")
    grid = grid or default_grid(im)

    def fn(x, y):
        rec = geometry_batch(im, grid.chart, x, y)
        t = distance_terms(rec, a)
        keep = (1 - t.h) > eps**2
        val = np.where(keep, t.log_laplacian, 0.0)
        return {"v": val * rec.sqrt_det_g, "u": 1 - t.h}

    vals = map_nodes(fn, grid.x, grid.y)
    if np.min(vals["u"]) > eps**2:
        warnings.warn("focus point not attained on the grid: nothing excised", RuntimeWarning, stacklevel=2)
    return float(np.sum(vals["v"] * grid.weights))


def excision_limit(im: Immersion, a, grid=None, eps_seq=(0.1, 0.05, 0.025)) -> tuple[float, list]:
    """Polynomial extrapolation in eps^2 of the excised integrals to eps = 0."""
    grid = grid or default_grid(im)
    vals = [excised_log_integral(im, a, e, grid) for e in eps_seq]
    e2 = np.array(eps_seq) ** 2
    coef = np.polyfit(e2, vals, len(eps_seq) - 1)
    return float(coef[-1]), vals


def preimage_count(im: Immersion, a, grid: Optional[QuadratureGrid] = None, tol: float = 1e-3) -> int:
    """Number of distinct points p with phi(p) = [a] (numerical probe)."""
    if not 0 < tol < 0.1:
        raise ConfigError("tolerance must lie in (0, 0.1)")
    grid = grid or default_grid(im)
    arep = _focus(a)

    def hvals(chart, x, y):
        Z = cp2.unit(im(chart, x, y))
        return np.abs(cp2.herm(Z, arep)) ** 2

    h = map_nodes(lambda x, y: {"h": hvals(grid.chart, x, y)}, grid.x, grid.y)["h"]
    idx = [i for i in _grid_extrema(h, grid, "max") if h[i] > 0.5]
    found = []
    for start in _seeds(grid, idx, -h):
        p, val, _ = _refine(lambda c, x, y: 1 - hvals(c, x, y), im.domain, start, xatol=1e-12)
        if val < tol**2:
            found.append(p)
    reps = _cluster(found, 1e-6)
    # ambiguous: distinct refined points closer than a loose radius
    loose = _cluster(found, 1e-3)
    if len(loose) != len(reps):
        warnings.warn("ambiguous preimage clusters", RuntimeWarning, stacklevel=2)
    return len(reps)
