"""Pointwise extrinsic geometry of a surface immersed in CP^2.

Everything is computed from the 2-jet of the unit representative Z of the
immersion.  With a_i = (Z_i, Z), the tangent vectors lift to
X_i = Z_i - a_i Z and the ambient covariant derivative of the coordinate
fields lifts to

    S_ij = P(Z_ij) - a_j X_i - a_i X_j

(P is the horizontal projector at Z); the extra terms undo the vertical drift
of a non-horizontal lift.  Its normal part is the second fundamental form and
its tangential part gives the Christoffel symbols of the induced metric.

Vectors at a point are then written in real coordinates with respect to the
oriented horizontal basis (b1, i b1, b2, i b2), so the rest is 4-dimensional
real linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cp2
from .errors import ImmersionError
from .jets import ChartPoint, Immersion, Jet2, jet2_batch

RANK_TOL = 1e-14
COMPLEX_POINT_TOL = 1e-6


def _ip(a, b):
    return np.sum(a * b, axis=-1)


def _cross4(a, b, c):
    """Vector d with det[a, b, c, d] = |d|^2 and d orthogonal to a, b, c."""
    m = np.stack([a, b, c], axis=-2)
    out = []
    for k in range(4):
        cols = [j for j in range(4) if j != k]
        minor = m[..., :, cols]
        out.append((-1) ** (k + 3) * np.linalg.det(minor))
    return np.stack(out, axis=-1)


@dataclass(frozen=True)
class GeometryRecord:
    """Geometric quantities at one or many surface points.

    Vectors carry both real 4-coordinates (suffix ``4``, in the horizontal
    basis ``b1, b2``) and complex 3-vector horizontal lifts at ``point``.
    ``sigma[..., a, b, k]`` is the component along e_{3+k} of
    sigma(e_a, e_b) in the orthonormal frame.
    """

    point: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    frame4: np.ndarray  # (..., 4, 4): rows e1, e2, e3, e4
    g: np.ndarray
    christoffel: np.ndarray  # (..., 2, 2, 2): Gamma^k_ij as [k, i, j]
    coframe: np.ndarray  # (..., 2, 2): e_a = coframe[a, i] d/dx^i
    sigma: np.ndarray
    C: np.ndarray
    K: np.ndarray
    Kperp: np.ndarray
    Kbar: np.ndarray
    Kbarperp: np.ndarray
    sigma_plus_sq: np.ndarray
    sigma_minus_sq: np.ndarray

    # ---- derived accessors ------------------------------------------------
    @property
    def sqrt_det_g(self):
        return np.sqrt(self.g[..., 0, 0] * self.g[..., 1, 1] - self.g[..., 0, 1] ** 2)

    @property
    def H_normal(self):
        """Mean curvature as (e3, e4) components."""
        return 0.5 * (self.sigma[..., 0, 0, :] + self.sigma[..., 1, 1, :])

    @property
    def H4(self):
        return np.einsum("...k,...kj->...j", self.H_normal, self.frame4[..., 2:, :])

    @property
    def H(self):
        return self.to_c3(self.H4)

    @property
    def H_sq(self):
        return np.sum(self.H_normal**2, axis=-1)

    def to_c3(self, v4):
        return cp2.from_real4(v4, self.b1, self.b2)

    def to_r4(self, v):
        return cp2.to_real4(v, self.b1, self.b2)

    @property
    def tangent_frame(self):
        return self.to_c3(self.frame4[..., 0, :]), self.to_c3(self.frame4[..., 1, :])

    @property
    def normal_frame(self):
        return self.to_c3(self.frame4[..., 2, :]), self.to_c3(self.frame4[..., 3, :])

    def sigma4(self, a, b):
        return np.einsum("...k,...kj->...j", self.sigma[..., a, b, :], self.frame4[..., 2:, :])

    def shape_operator(self, normal):
        """Matrix of A_xi in the frame (e1, e2); ``normal`` as (e3, e4) components."""
        return np.einsum("...abk,...k->...ab", self.sigma, normal)

    def tangent_part4(self, v4):
        e = self.frame4[..., :2, :]
        return np.einsum("...a,...aj->...j", np.einsum("...aj,...j->...a", e, v4), e)

    def normal_part4(self, v4):
        return v4 - self.tangent_part4(v4)

    def normal_components(self, v4):
        return np.einsum("...aj,...j->...a", self.frame4[..., 2:, :], v4)

    def __getitem__(self, idx) -> "GeometryRecord":
        return GeometryRecord(**{k: getattr(self, k)[idx] for k in self.__dataclass_fields__})


def geometry_from_jet(jet: Jet2) -> GeometryRecord:
    """Geometry from the 2-jet of the *unit* representative."""
    Z = jet.value
    Z1, Z2 = jet.d1[..., 0, :], jet.d1[..., 1, :]
    Z11, Z12, Z22 = jet.d2[..., 0, :], jet.d2[..., 1, :], jet.d2[..., 2, :]

    a1 = cp2.herm(Z1, Z)[..., None]
    a2 = cp2.herm(Z2, Z)[..., None]
    X1 = Z1 - a1 * Z
    X2 = Z2 - a2 * Z
    S11 = cp2.hproject(Z11, Z) - 2 * a1 * X1
    S12 = cp2.hproject(Z12, Z) - a2 * X1 - a1 * X2
    S22 = cp2.hproject(Z22, Z) - 2 * a2 * X2

    b1, b2 = cp2.horizontal_basis(Z)
    x = np.stack([cp2.to_real4(X1, b1, b2), cp2.to_real4(X2, b1, b2)], axis=-2)
    s = np.stack(
        [
            np.stack([cp2.to_real4(S11, b1, b2), cp2.to_real4(S12, b1, b2)], axis=-2),
            np.stack([cp2.to_real4(S12, b1, b2), cp2.to_real4(S22, b1, b2)], axis=-2),
        ],
        axis=-3,
    )

    g = np.einsum("...ik,...jk->...ij", x, x)
    detg = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    scale = g[..., 0, 0] * g[..., 1, 1]
    if np.any(~(detg > RANK_TOL * np.maximum(scale, 1e-300))):
        bad = np.argwhere(~np.atleast_1d(detg > RANK_TOL * np.maximum(scale, 1e-300)))
        raise ImmersionError("differential has rank < 2", location=bad[:3].tolist())
    ginv = np.linalg.inv(g)

    # oriented tangent frame by Gram-Schmidt of (X1, X2)
    n1 = np.sqrt(g[..., 0, 0])
    e1 = x[..., 0, :] / n1[..., None]
    proj = g[..., 0, 1] / g[..., 0, 0]
    v2 = x[..., 1, :] - proj[..., None] * x[..., 0, :]
    n2 = np.sqrt(_ip(v2, v2))
    e2 = v2 / n2[..., None]
    coframe = np.zeros(g.shape)
    coframe[..., 0, 0] = 1 / n1
    coframe[..., 1, 0] = -proj / n2
    coframe[..., 1, 1] = 1 / n2

    C = _ip(cp2.j4(e1), e2)

    # e3 from the normal part of J e1 away from complex points, else Gram-Schmidt
    def normal_part(v):
        return v - _ip(v, e1)[..., None] * e1 - _ip(v, e2)[..., None] * e2

    je1n = normal_part(cp2.j4(e1))
    cands = np.stack([normal_part(np.broadcast_to(np.eye(4)[k], e1.shape)) for k in range(4)])
    cn = np.sqrt(_ip(cands, cands))
    k = np.argmax(cn, axis=0)
    fallback = np.take_along_axis(cands, k[None, ..., None], axis=0)[0]
    fallback = fallback / np.take_along_axis(cn, k[None, ...], axis=0)[0][..., None]
    use_j = (np.abs(C) < 1 - COMPLEX_POINT_TOL)[..., None]
    je1n_norm = np.sqrt(np.maximum(_ip(je1n, je1n), 1e-300))[..., None]
    e3 = np.where(use_j, je1n / je1n_norm, fallback)
    e4 = _cross4(e1, e2, e3)
    e4 = e4 / np.sqrt(_ip(e4, e4))[..., None]
    frame4 = np.stack([e1, e2, e3, e4], axis=-2)

    # Christoffel symbols from the tangential part of S_ij
    sx = np.einsum("...ijm,...km->...ijk", s, x)
    christoffel = np.einsum("...lk,...ijk->...lij", ginv, sx)

    # second fundamental form, orthonormal frame, normal components
    s_ab = np.einsum("...ai,...bj,...ijm->...abm", coframe, coframe, s)
    sigma = np.einsum("...abm,...km->...abk", s_ab, frame4[..., 2:, :])

    s11, s12, s22 = sigma[..., 0, 0, :], sigma[..., 0, 1, :], sigma[..., 1, 1, :]
    Kbar = cp2.curvature4(e1, e2, e2, e1)
    Kbarperp = cp2.curvature4(e1, e2, e3, e4)
    K = Kbar + _ip(s11, s22) - _ip(s12, s12)
    D = s11 - s22
    B = s12
    # <[A3, A4] e1, e2> = B3 D4 - B4 D3
    Kperp = Kbarperp + B[..., 0] * D[..., 1] - B[..., 1] * D[..., 0]

    def jplus(v):
        return np.stack([-v[..., 1], v[..., 0]], axis=-1)

    sp = D + 2 * jplus(B)
    sm = D - 2 * jplus(B)
    sigma_plus_sq = 4 * _ip(sp, sp)
    sigma_minus_sq = 4 * _ip(sm, sm)

    return GeometryRecord(
        point=Z,
        b1=b1,
        b2=b2,
        frame4=frame4,
        g=g,
        christoffel=christoffel,
        coframe=coframe,
        sigma=sigma,
        C=C,
        K=K,
        Kperp=Kperp,
        Kbar=Kbar,
        Kbarperp=Kbarperp,
        sigma_plus_sq=sigma_plus_sq,
        sigma_minus_sq=sigma_minus_sq,
    )


def geometry_batch(im: Immersion, chart, x, y) -> GeometryRecord:
    return geometry_from_jet(jet2_batch(im, chart, x, y, normalize=True))


def geometry_at(im: Immersion, p: ChartPoint) -> GeometryRecord:
    try:
        return geometry_batch(im, p.chart, np.float64(p.x), np.float64(p.y))
    except ImmersionError as exc:
        raise ImmersionError("not an immersion", location=p) from exc


def sigma_pm(record: GeometryRecord):
    return record.sigma_plus_sq, record.sigma_minus_sq


# --------------------------------------------------------------------------
# complex-notation quantities


def _bilinear(a, b):
    """C-bilinear extension of the metric to pairs (real part, imaginary part)."""
    return (_ip(a[0], b[0]) - _ip(a[1], b[1])) + 1j * (_ip(a[0], b[1]) + _ip(a[1], b[0]))


def _dz_data(rec: GeometryRecord):
    # d/dz normalised to the conformal scale lambda = det(g)^(1/4); equals the
    # chart d/dz whenever the chart is isothermal
    lam = np.sqrt(rec.sqrt_det_g)[..., None]
    e1, e2 = rec.frame4[..., 0, :], rec.frame4[..., 1, :]
    s11, s12, s22 = rec.sigma4(0, 0), rec.sigma4(0, 1), rec.sigma4(1, 1)
    sig_zz = (lam**2 / 4 * (s11 - s22), lam**2 / 4 * (-2 * s12))
    j_dz = (lam / 2 * cp2.j4(e1), -lam / 2 * cp2.j4(e2))
    return sig_zz, j_dz


def theta_cubic_record(rec: GeometryRecord):
    sig_zz, j_dz = _dz_data(rec)
    return _bilinear(sig_zz, j_dz)


def theta_cubic(im: Immersion, p: ChartPoint) -> complex:
    """Coefficient <sigma(dz, dz), J dz> of the cubic differential."""
    return complex(theta_cubic_record(geometry_at(im, p)))


@dataclass(frozen=True)
class TwistorConditions:
    pos: complex
    neg: complex


def twistor_conditions_record(rec: GeometryRecord):
    sig_zz, _ = _dz_data(rec)
    e3, e4 = rec.frame4[..., 2, :], rec.frame4[..., 3, :]
    r2 = np.sqrt(2.0)
    xi = (e3 / r2, -e4 / r2)
    xibar = (e3 / r2, e4 / r2)
    return _bilinear(sig_zz, xi), _bilinear(sig_zz, xibar)


def twistor_complex_conditions(im: Immersion, p: ChartPoint) -> TwistorConditions:
    """<sigma(dz,dz), xi> (positive spin) and <sigma(dz,dz), conj xi> (negative spin)."""
    pos, neg = twistor_conditions_record(geometry_at(im, p))
    return TwistorConditions(complex(pos), complex(neg))


# --------------------------------------------------------------------------
# finite-difference derivatives of scalar fields on the chart


STENCIL = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)]


def stencil_records(im: Immersion, p: ChartPoint, h: float) -> GeometryRecord:
    xs = np.array([p.x + di * h for di, _ in STENCIL])
    ys = np.array([p.y + dj * h for _, dj in STENCIL])
    return geometry_batch(im, p.chart, xs, ys)


def chart_derivatives(values, h):
    """Central first and second differences of 3x3 stencil values (STENCIL order)."""
    f = np.asarray(values).reshape(3, 3, *np.shape(values)[1:])
    fx = (f[2, 1] - f[0, 1]) / (2 * h)
    fy = (f[1, 2] - f[1, 0]) / (2 * h)
    fxx = (f[2, 1] - 2 * f[1, 1] + f[0, 1]) / h**2
    fyy = (f[1, 2] - 2 * f[1, 1] + f[1, 0]) / h**2
    fxy = (f[2, 2] - f[2, 0] - f[0, 2] + f[0, 0]) / (4 * h * h)
    return np.array([fx, fy]), np.array([[fxx, fxy], [fxy, fyy]])


def laplace_beltrami(values, rec: GeometryRecord, h):
    """Metric-corrected Laplacian g^ij (u_ij - Gamma^k_ij u_k) at the stencil centre."""
    grad, hess = chart_derivatives(values, h)
    ginv = np.linalg.inv(rec.g)
    corr = hess - np.einsum("kij,k->ij", rec.christoffel, grad)
    return float(np.einsum("ij,ij->", ginv, corr))


def gradient_sq(values, rec: GeometryRecord, h):
    grad, _ = chart_derivatives(values, h)
    return float(grad @ np.linalg.inv(rec.g) @ grad)


@dataclass(frozen=True)
class SpinResiduals:
    grad_res: float
    lap_res: float


def spin_identity_residuals(im: Immersion, p: ChartPoint, h: float = 1e-4) -> SpinResiduals:
    """Residuals of |grad C|^2 = (1 - C^2)|H|^2 and Lap C = 2C(-|H|^2 + 3(1 - C^2))."""
    recs = stencil_records(im, p, h)
    centre = recs[4]
    C, H2 = float(centre.C), float(centre.H_sq)
    grad_res = gradient_sq(recs.C, centre, h) - (1 - C * C) * H2
    lap_res = laplace_beltrami(recs.C, centre, h) - 2 * C * (-H2 + 3 * (1 - C * C))
    return SpinResiduals(float(grad_res), float(lap_res))


def kahler_projection_residual(rec: GeometryRecord, v, xi) -> float:
    """Max deviation in (Jv)^T = C J+ v = C J- v and (J xi)^perp = C J+ xi = -C J- xi.

    ``v`` and ``xi`` are coefficient pairs over (e1, e2) and (e3, e4).
    """
    e = rec.frame4
    C = float(rec.C)
    v = np.asarray(v, float)
    xi = np.asarray(xi, float)
    v4 = v[0] * e[0] + v[1] * e[1]
    x4 = xi[0] * e[2] + xi[1] * e[3]
    jv_t = rec.tangent_part4(cp2.j4(v4))
    jx_n = rec.normal_part4(cp2.j4(x4))
    jpm_v = v[0] * e[1] - v[1] * e[0]  # J+ and J- agree on the tangent plane
    jp_x = xi[0] * e[3] - xi[1] * e[2]  # J+ e3 = e4
    jm_x = -jp_x  # J- e3 = -e4
    res = [jv_t - C * jpm_v, jx_n - C * jp_x, jx_n + C * jm_x]
    return float(max(np.max(np.abs(r)) for r in res))
