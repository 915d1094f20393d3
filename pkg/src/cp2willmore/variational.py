"""Euler-Lagrange residuals, first-variation checks and distance identities.

Normal covariant derivatives are taken on horizontal lifts: for a field V
along the surface with lift V~ at the smooth unit representative Z,

    lift(nabla_i V) = P(d_i V~) - (Z_i, Z) V~,

whose normal part is nabla-perp_i V.  The normal Laplacian
g^ij (nabla_i nabla_j - Gamma^k_ij nabla_k) is then assembled from nested
central differences on a 5x5 stencil.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import cp2
from .errors import ConfigError, DomainError
from .geometry import GeometryRecord, geometry_batch, geometry_from_jet, laplace_beltrami, chart_derivatives
from .invariants import QuadratureGrid, distance_terms, map_nodes
from .jets import SPHERE, ChartPoint, Immersion, chart_zeta, jet2_batch

OFFSETS = np.arange(-2, 3)


def _stencil(x, y, h):
    """5x5 stencil coordinates, shape (5, 5, ...)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    pad = (1,) * max(x.ndim, y.ndim)
    X = x + h * OFFSETS.reshape((5, 1) + pad)
    Y = y + h * OFFSETS.reshape((1, 5) + pad)
    return np.broadcast_arrays(X, Y)


@dataclass(frozen=True)
class _StencilData:
    rec: GeometryRecord  # (5, 5, ...)
    a: np.ndarray  # (5, 5, ..., 2) vertical coefficients (Z_i, Z)
    h: float

    @property
    def centre(self) -> GeometryRecord:
        return self.rec[2, 2]


def _stencil_data(im: Immersion, chart, x, y, h) -> _StencilData:
    X, Y = _stencil(x, y, h)
    jet = jet2_batch(im, chart, X, Y, normalize=True)
    rec = geometry_from_jet(jet)
    a = np.stack([cp2.herm(jet.d1[..., 0, :], jet.value), cp2.herm(jet.d1[..., 1, :], jet.value)], axis=-1)
    return _StencilData(rec, a, h)


def _normal_c3(rec: GeometryRecord, v):
    """Normal part of horizontal C^3 vectors at the record points."""
    return rec.to_c3(rec.normal_part4(rec.to_r4(v)))


def _covariant(sd: _StencilData, field, i0, j0):
    """Lifts of nabla-perp_x V and nabla-perp_y V at stencil index (i0, j0)."""
    h = sd.h
    rec = sd.rec[i0, j0]
    Z = rec.point
    V = field[i0, j0]
    dx = (field[i0 + 1, j0] - field[i0 - 1, j0]) / (2 * h)
    dy = (field[i0, j0 + 1] - field[i0, j0 - 1]) / (2 * h)
    out = []
    for k, d in enumerate((dx, dy)):
        amb = cp2.hproject(d, Z) - sd.a[i0, j0][..., k][..., None] * V
        out.append(_normal_c3(rec, amb))
    return out


def _normal_laplacian(sd: _StencilData, field):
    """Normal Laplacian of a normal field given by lifts on the 5x5 stencil."""
    centre = sd.centre
    # first derivatives at the inner 3x3 points
    inner = {}
    for i0 in (1, 2, 3):
        for j0 in (1, 2, 3):
            inner[(i0, j0)] = _covariant(sd, field, i0, j0)
    grad = np.stack(inner[(2, 2)], axis=-2)  # (..., 2, 3): nabla_k V at centre
    second = np.empty(grad.shape[:-2] + (2, 2, 3), dtype=complex)
    for j in range(2):
        Wj = np.empty((5, 5) + grad.shape[:-2] + (3,), dtype=complex)
        for (i0, j0), v in inner.items():
            Wj[i0, j0] = v[j]
        # nabla_i of W_j at the centre uses the inner ring only
        di = _covariant(sd, Wj, 2, 2)
        for i in range(2):
            second[..., i, j, :] = di[i]
    ginv = np.linalg.inv(centre.g)
    gam = centre.christoffel  # [k, i, j]
    corr = second - np.einsum("...kij,...kc->...ijc", gam, grad)
    return np.einsum("...ij,...ijc->...c", ginv, corr)


def _H_field(sd: _StencilData):
    return sd.rec.H


def _A_tilde(rec: GeometryRecord):
    """sum_ij <sigma_ij, H> sigma_ij in (e3, e4) components."""
    coef = np.einsum("...abk,...k->...ab", rec.sigma, rec.H_normal)
    return np.einsum("...ab,...abk->...k", coef, rec.sigma)


def _components(rec: GeometryRecord, v):
    return rec.normal_components(rec.to_r4(v))


def _check_point(im: Immersion, p: ChartPoint):
    if p.domain != im.domain:
        raise ConfigError(f"point on {p.domain} but immersion lives on {im.domain}")


def normal_laplacian_H_batch(im: Immersion, chart, x, y, h: float = 1e-3):
    sd = _stencil_data(im, chart, x, y, h)
    return _components(sd.centre, _normal_laplacian(sd, _H_field(sd)))


def normal_laplacian_H(im: Immersion, p: ChartPoint, h: float = 1e-3) -> np.ndarray:
    """Normal Laplacian of H at p as (e3, e4) components."""
    _check_point(im, p)
    return normal_laplacian_H_batch(im, p.chart, np.float64(p.x), np.float64(p.y), h)


def el_residual_batch(im: Immersion, chart, x, y, which: str = "Wminus", h: float = 1e-3):
    sd = _stencil_data(im, chart, x, y, h)
    rec = sd.centre
    lap = _components(rec, _normal_laplacian(sd, _H_field(sd)))
    H = rec.H_normal
    H2, C = rec.H_sq, rec.C
    if which == "Wminus":
        return lap + ((1 - 3 * C**2 - 2 * H2)[..., None]) * H + _A_tilde(rec)
    if which == "Wplus":
        # gradient of C from the stencil, as a tangent lift sum_i (g^ij C_j) X_i
        Cs = sd.rec.C
        Cx = (Cs[3, 2] - Cs[1, 2]) / (2 * h)
        Cy = (Cs[2, 3] - Cs[2, 1]) / (2 * h)
        grad_coord = np.einsum("...ij,...j->...i", np.linalg.inv(rec.g), np.stack([Cx, Cy], axis=-1))
        # tangent vector in the orthonormal frame: d/dx^i = sum_a (coframe^-1)[i, a] e_a
        basis = np.linalg.inv(rec.coframe)  # d/dx^i = basis[a, i] e_a
        grad_frame = np.einsum("...ai,...i->...a", basis, grad_coord)
        e1, e2 = rec.frame4[..., 0, :], rec.frame4[..., 1, :]
        # J+ e1 = e2, J+ e2 = -e1
        jplus = grad_frame[..., 0, None] * e2 - grad_frame[..., 1, None] * e1
        term = rec.normal_components(cp2.j4(jplus))
        return lap + ((5 + 9 * C**2 - 2 * H2)[..., None]) * H + _A_tilde(rec) + 12 * term
    raise ConfigError("which must be 'Wminus' or 'Wplus'")


def el_residual(im: Immersion, p: ChartPoint, which: str = "Wminus", h: float = 1e-3, richardson: bool = False) -> np.ndarray:
    """Euler-Lagrange expression of W- (or W+) at p, as (e3, e4) components.

    The stencil error is O(h^2); ``richardson=True`` combines steps h and h/2
    to cancel the leading term.
    """
    _check_point(im, p)
    x, y = np.float64(p.x), np.float64(p.y)
    r = el_residual_batch(im, p.chart, x, y, which, h)
    if richardson:
        r = (4 * el_residual_batch(im, p.chart, x, y, which, h / 2) - r) / 3
    return r


# --------------------------------------------------------------------------
# variations


def _real(u):
    return 0.5 * (u + np.conj(u))


@dataclass(frozen=True)
class NormalField:
    """Variation field: a smooth scalar profile times the horizontal projection
    of a fixed ambient direction ``b``.

    ``profile(chart, x, y)`` must be written with numpy ufuncs (hyper-dual
    safe).  Only the normal part of the field enters the first variation;
    :meth:`normal_components` returns it in a record's (e3, e4) frame.
    """

    profile: Callable
    direction: np.ndarray
    name: str = "field"

    def ambient(self, chart, x, y, Z):
        """Hyper-dual-safe field values P_Z(b) * profile at unit representatives Z."""
        b = [complex(c) for c in np.asarray(self.direction, dtype=complex)]
        ip = Z[0] * np.conj(b[0]) + Z[1] * np.conj(b[1]) + Z[2] * np.conj(b[2])
        ip = np.conj(ip)  # (b, Z)
        f = self.profile(chart, x, y)
        return [f * (b[k] - ip * Z[k]) for k in range(3)]

    def normal_components(self, rec: GeometryRecord, chart, x, y):
        V = np.stack(
            [np.asarray(c, dtype=complex) for c in self.ambient(chart, x, y, [rec.point[..., k] for k in range(3)])], axis=-1
        )
        return rec.normal_components(rec.to_r4(V))


def bump_field(domain: str, centre=(0.0, 0.0), width: float = 0.6, direction=(1.0, 0.5j, 0.2), chart: Optional[int] = None) -> NormalField:
    """Smooth bump centred at a chart point.

    Torus: exp((cos(x - x0) + cos(y - y0) - 2) / width^2), periodic.
    Sphere: exp((s . s0 - 1) / width^2) with s the point of the round sphere.
    """
    x0, y0 = centre
    k = 1.0 / width**2
    if domain == SPHERE:
        from .jets import sphere_point

        s0 = sphere_point(chart if chart is not None else 0, x0, y0)

        def profile(ch, x, y):
            z0, z1 = chart_zeta(ch, x, y)
            p = z1 * np.conj(z0)
            n = z0 * np.conj(z0) + z1 * np.conj(z1)
            sx = 2 * _real(p) / n
            sy = 2 * _real(-1j * p) / n
            sz = (z0 * np.conj(z0) - z1 * np.conj(z1)) / n
            dot = s0[0] * sx + s0[1] * sy + s0[2] * sz
            return np.exp(k * (dot - 1))

    else:

        def profile(ch, x, y):
            return np.exp(k * (np.cos(x - x0) + np.cos(y - y0) - 2))

    return NormalField(profile, np.asarray(direction, dtype=complex), name="bump")


def zero_field() -> NormalField:
    return NormalField(lambda ch, x, y: 0.0 * x, np.array([1.0, 0.0, 0.0], dtype=complex), name="zero")


def _cos_series(s2):
    # cos(s) and sin(s)/s as series in s^2 (|s| <= 0.1 in practice)
    c, sc, term_c, term_s = 1.0, 1.0, 1.0, 1.0
    for n in range(1, 7):
        term_c = term_c * (-s2) / ((2 * n - 1) * (2 * n))
        term_s = term_s * (-s2) / ((2 * n) * (2 * n + 1))
        c = c + term_c
        sc = sc + term_s
    return c, sc


def displaced(im: Immersion, field: NormalField, t: float) -> Immersion:
    """The immersion moved along geodesics: exp_phi(t V)."""
    if im.smooth_ad is False:
        raise ConfigError("displacement needs a hyper-dual differentiable immersion")
    base = im.func

    def func(chart, x, y):
        F = base(chart, x, y)
        n = np.sqrt(_real(F[0] * np.conj(F[0]) + F[1] * np.conj(F[1]) + F[2] * np.conj(F[2])))
        Z = [c / n for c in F]
        V = field.ambient(chart, x, y, Z)
        s2 = t * t * _real(V[0] * np.conj(V[0]) + V[1] * np.conj(V[1]) + V[2] * np.conj(V[2]))
        c, sc = _cos_series(s2)
        return tuple(c * Z[k] + (t * sc) * V[k] for k in range(3))

    return Immersion(im.domain, func, name=f"{im.name}+{t:g}V", params=im.params, metadata=im.metadata)


def _wminus(im: Immersion, grid: QuadratureGrid) -> float:
    def fn(x, y):
        rec = geometry_batch(im, grid.chart, x, y)
        return {"v": (rec.H_sq + 2) * rec.sqrt_det_g}

    return float(np.sum(map_nodes(fn, grid.x, grid.y)["v"] * grid.weights))


@dataclass(frozen=True)
class FirstVariation:
    fd: float
    integral: float

    @property
    def discrepancy(self) -> float:
        return abs(self.fd - self.integral)


def first_variation_check(im: Immersion, field: NormalField, grid: QuadratureGrid, eps: float = 1e-3, h: float = 1e-3) -> FirstVariation:
    """Central difference of W- along the field versus the EL integral.

    Tangential components of the field do not change W- to first order, so
    the integral pairs the EL expression with the normal part only.
    """
    if not 1e-4 <= eps <= 1e-2:
        raise ConfigError("eps must lie in [1e-4, 1e-2]")
    fd = (_wminus(displaced(im, field, eps), grid) - _wminus(displaced(im, field, -eps), grid)) / (2 * eps)

    def fn(x, y):
        sd = _stencil_data(im, grid.chart, x, y, h)
        rec = sd.centre
        lap = _components(rec, _normal_laplacian(sd, _H_field(sd)))
        el = lap + ((1 - 3 * rec.C**2 - 2 * rec.H_sq)[..., None]) * rec.H_normal + _A_tilde(rec)
        v = field.normal_components(rec, grid.chart, x, y)
        return {"v": np.sum(el * v, axis=-1) * rec.sqrt_det_g}

    integral = float(np.sum(map_nodes(fn, grid.x, grid.y)["v"] * grid.weights))
    return FirstVariation(float(fd), integral)


# --------------------------------------------------------------------------
# distance-function identities


def whitney_identity_residual(im: Immersion, a, p: ChartPoint) -> np.ndarray:
    """H - xi/(1 - h) at p as (e3, e4) components."""
    _check_point(im, p)
    rec = geometry_batch(im, p.chart, np.float64(p.x), np.float64(p.y))
    t = distance_terms(rec, a)
    if not 1 - float(t.h) > 1e-6:
        raise DomainError("point is too close to a preimage of the focus")
    xi = rec.normal_components(t.xi4)
    return rec.H_normal - xi / (1 - t.h)


@dataclass(frozen=True)
class DistanceChecks:
    """Pointwise distance-function identities at one surface point.

    ``grad_res``: |grad h|^2 (extrapolated finite differences) - (4h(1-h) - |xi|^2).
    ``lap_slack``: Delta log(1-h) (finite differences) + |H|^2 + 3 + C^2 (>= 0).
    ``lap_analytic``: closed-form Delta log(1-h) for comparison.
    ``lagrangian_res``: sum_i |(e_i, a)|^2 - (1 - h) (zero on Lagrangian surfaces).
    """

    h: float
    grad_res: float
    lap_slack: float
    lap_fd: float
    lap_analytic: float
    lagrangian_res: float


def distance_checks(im: Immersion, a, p: ChartPoint, h: float = 1e-4) -> DistanceChecks:
    _check_point(im, p)

    def stencil(step):
        xs = np.array([p.x + di * step for di in (-1, 0, 1) for _ in (-1, 0, 1)])
        ys = np.array([p.y + dj * step for _ in (-1, 0, 1) for dj in (-1, 0, 1)])
        recs = geometry_batch(im, p.chart, xs, ys)
        return recs, distance_terms(recs, a)

    recs, terms = stencil(h)
    centre = recs[4]
    t0 = distance_terms(centre, a)
    hv = float(t0.h)
    if not 1 - hv > 1e-6:
        raise DomainError("point is too close to a preimage of the focus")
    ginv = np.linalg.inv(centre.g)

    def grad_sq(values, step):
        grad, _ = chart_derivatives(values, step)
        return float(grad @ ginv @ grad)

    # Richardson over (h, h/2) removes the O(h^2) stencil error
    grad_sq_h = (4 * grad_sq(stencil(h / 2)[1].h, h / 2) - grad_sq(terms.h, h)) / 3
    lap_fd = laplace_beltrami(np.log(1 - terms.h), centre, h)
    return DistanceChecks(
        h=hv,
        grad_res=grad_sq_h - (4 * hv * (1 - hv) - float(t0.xi_sq)),
        lap_slack=lap_fd + float(centre.H_sq) + 3 + float(centre.C) ** 2,
        lap_fd=lap_fd,
        lap_analytic=float(t0.log_laplacian),
        lagrangian_res=float(t0.tangent_sum) - (1 - hv),
    )
