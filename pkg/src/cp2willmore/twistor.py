"""The flag-manifold twistor space of negative spin.

Pairs ([z], [w]) with (z, w) = 0 project to [conj(z) x conj(w)].  At a
surface point the structure J- (J- e1 = e2, J- e3 = -e4) commutes with the
ambient J, so it is determined by the complex line on which J- = J; the
twistor pair is that line together with its Hermitian complement in the
horizontal space.

Convention (calibrated against the analytic lifts of the sphere families):
the first component is the complement line spanned by e1 + i e2, where
J- = -J; the second is the line spanned by e1 - i e2.  For a complex line
this makes the first component constant (degree 0) and the second the
tangent line itself.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import cp2
from .cp2 import ProjPoint
from .errors import DomainError, NumericalDegeneracyError
from .geometry import GeometryRecord, geometry_batch
from .jets import ChartPoint, Immersion

INCIDENCE_TOL = 1e-10
LIFT_METRIC_MIN = 1e-10


@dataclass(frozen=True)
class TwistorPair:
    z: ProjPoint
    w: ProjPoint

    def __post_init__(self):
        if abs(cp2.herm(self.z.rep, self.w.rep)) > INCIDENCE_TOL:
            raise DomainError("twistor pair violates the incidence relation (z, w) = 0")

    def same_pair(self, other: "TwistorPair", eps: float = 1e-10) -> bool:
        return self.z.same_point(other.z, eps) and self.w.same_point(other.w, eps)


def project_pairs(z, w):
    """Vectorised projection; rows need not be unit vectors."""
    v = cp2.cross(np.conj(z), np.conj(w))
    n = np.linalg.norm(v, axis=-1)
    if np.any(n < 1e-12 * np.linalg.norm(z, axis=-1) * np.linalg.norm(w, axis=-1)):
        raise DomainError("degenerate twistor pair (parallel components)")
    return v / n[..., None]


def project_pair(p: TwistorPair) -> ProjPoint:
    return cp2.normalize(project_pairs(p.z.rep, p.w.rep))


def lift_from_record(rec: GeometryRecord):
    """Unit representatives (z, w) of the twistor lift at every record point."""
    e1, e2 = rec.tangent_frame
    Z = rec.point
    plus = e1 + 1j * e2  # norm^2 = 2 - 2C
    minus = e1 - 1j * e2  # norm^2 = 2 + 2C
    np_, nm = np.linalg.norm(plus, axis=-1), np.linalg.norm(minus, axis=-1)
    if np.any(np.maximum(np_, nm) < 1.0):
        raise NumericalDegeneracyError("tangent frame does not span a real 2-plane")
    # build the better-conditioned line directly, the other as its complement
    use_plus = (np_ >= nm)[..., None]
    with np.errstate(invalid="ignore", divide="ignore"):
        p_unit = plus / np_[..., None]
        m_unit = minus / nm[..., None]
        z = np.where(use_plus, p_unit, cp2.unit(np.conj(cp2.cross(Z, m_unit))))
        w = np.where(use_plus, cp2.unit(np.conj(cp2.cross(Z, p_unit))), m_unit)
    return z, w


def lift_batch(im: Immersion, chart, x, y):
    return lift_from_record(geometry_batch(im, chart, x, y))


def numeric_lift(im: Immersion, p: ChartPoint) -> TwistorPair:
    z, w = lift_batch(im, p.chart, np.float64(p.x), np.float64(p.y))
    return TwistorPair(cp2.normalize(z), cp2.normalize(w))


def analytic_lift(im: Immersion, p: ChartPoint) -> TwistorPair:
    if im.lift is None:
        raise DomainError(f"{im.name} has no analytic twistor lift")
    z, w = im.lift(p.chart, np.float64(p.x), np.float64(p.y))
    z = np.array([complex(c) for c in z])
    w = np.array([complex(c) for c in w])
    return TwistorPair(cp2.normalize(z), cp2.normalize(w))


# --------------------------------------------------------------------------
# induced metrics of the lift components


def _align(v, ref):
    ip = cp2.herm(v, ref)[..., None]
    return v * np.conj(ip) / np.abs(ip)


def _component_metric(im: Immersion, chart, x, y, h: float):
    """Induced metrics (..., 2, 2) of both lift components by central differences.

    Samples are phase-aligned with the centre so only the (gauge-free)
    horizontal part of the difference quotient is used.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    shifts = [(0, 0), (h, 0), (-h, 0), (0, h), (0, -h)]
    xs = np.stack([x + dx for dx, _ in shifts])
    ys = np.stack([y + dy for _, dy in shifts])
    z, w = lift_batch(im, chart, xs, ys)
    out = []
    for comp in (z, w):
        c0 = comp[0]
        dx = (_align(comp[1], c0) - _align(comp[2], c0)) / (2 * h)
        dy = (_align(comp[3], c0) - _align(comp[4], c0)) / (2 * h)
        d = np.stack([cp2.hproject(dx, c0), cp2.hproject(dy, c0)], axis=-2)
        out.append(np.real(np.einsum("...ik,...jk->...ij", d, np.conj(d))))
    return out[0], out[1]


def lifted_metric_residual(im: Immersion, p: ChartPoint, h: float = 1e-4):
    """Relative deviation of the lift metrics from ((|H|^2 + 2(1 -/+ C))/4) g."""
    x, y = np.float64(p.x), np.float64(p.y)
    rec = geometry_batch(im, p.chart, x, y)
    g1, g2 = _component_metric(im, p.chart, x, y, h)
    H2, C = float(rec.H_sq), float(rec.C)
    res = []
    for gi, factor in ((g1, (H2 + 2 * (1 - C)) / 4), (g2, (H2 + 2 * (1 + C)) / 4)):
        target = factor * rec.g
        scale = np.linalg.norm(target)
        if factor < LIFT_METRIC_MIN:
            raise DomainError("twistor component is constant here (degenerate lift)")
        res.append(float(np.linalg.norm(gi - target) / scale))
    return tuple(res)


def component_degree(im: Immersion, which: int, grid, h: float = 1e-5) -> float:
    """(1/pi) times the area of one lift component: its degree if holomorphic."""
    if which not in (1, 2):
        raise DomainError("component index must be 1 or 2")
    rec = geometry_batch(im, grid.chart, grid.x, grid.y)
    gi = _component_metric(im, grid.chart, grid.x, grid.y, h)[which - 1]
    det = gi[..., 0, 0] * gi[..., 1, 1] - gi[..., 0, 1] ** 2
    dens = np.sqrt(np.maximum(det, 0.0))
    # conformality: the lift metric of a holomorphic curve is a multiple of g
    lam = 0.5 * np.einsum("...ij,...ij->...", np.linalg.inv(rec.g), gi)
    resid = np.linalg.norm(gi - lam[..., None, None] * rec.g, axis=(-2, -1))
    scale = np.max(np.linalg.norm(gi, axis=(-2, -1)))
    # a constant component (scale at roundoff level) is trivially holomorphic
    if scale > 1e-12 * np.max(np.linalg.norm(rec.g, axis=(-2, -1))) and np.max(resid) > 1e-4 * scale:
        warnings.warn(
            f"lift component {which} of {im.name} is not conformal (residual {np.max(resid):.2e}); "
            "the area is not a degree",
            RuntimeWarning,
            stacklevel=2,
        )
    return float(np.sum(grid.weights * dens) / np.pi)


# --------------------------------------------------------------------------
# projective group action


def _check_matrix(A):
    A = np.asarray(A, dtype=complex)
    if A.shape != (3, 3):
        raise DomainError("expected a 3x3 complex matrix")
    if not abs(np.linalg.det(A)) > 1e-10:
        raise DomainError("matrix is singular (|det A| <= 1e-10)")
    return A


def pgl_act(A, pair: TwistorPair) -> TwistorPair:
    A = _check_matrix(A)
    Ainv_star = np.linalg.inv(A.conj().T)
    return TwistorPair(cp2.normalize(A @ pair.z.rep), cp2.normalize(Ainv_star @ pair.w.rep))


def _matvec(A, comps):
    return tuple(sum(A[i, j] * comps[j] for j in range(3)) for i in range(3))


def _cross_conj(z, w):
    zc = [np.conj(c) for c in z]
    wc = [np.conj(c) for c in w]
    return (
        zc[1] * wc[2] - zc[2] * wc[1],
        zc[2] * wc[0] - zc[0] * wc[2],
        zc[0] * wc[1] - zc[1] * wc[0],
    )


def deform_surface(A, im: Immersion) -> Immersion:
    """Twistor deformation: lift, act by [A], project back.

    Uses the analytic lift when the family has one (the result stays
    hyper-dual differentiable); otherwise lifts numerically and the result is
    differentiated by phase-aligned finite differences.
    """
    A = _check_matrix(A)
    B = np.linalg.inv(A.conj().T)
    meta = dict(im.metadata)
    meta["deformed_from"] = im.name
    if im.lift is not None:
        lift = im.lift

        def func(chart, x, y):
            z, w = lift(chart, x, y)
            return _cross_conj(_matvec(A, z), _matvec(B, w))

        def new_lift(chart, x, y):
            z, w = lift(chart, x, y)
            return _matvec(A, z), _matvec(B, w)

        return Immersion(im.domain, func, name=f"{im.name}~A", params=im.params, metadata=meta, lift=new_lift)

    def func_numeric(chart, x, y):
        z, w = lift_batch(im, chart, x, y)
        v = project_pairs(z @ A.T, w @ B.T)
        return v[..., 0], v[..., 1], v[..., 2]

    return Immersion(im.domain, func_numeric, name=f"{im.name}~A", params=im.params, metadata=meta, smooth_ad=False)


# --------------------------------------------------------------------------
# dual curve


def proj_distance(a, b):
    """sin of the Fubini-Study distance between unit representatives."""
    # norm of the part of b orthogonal to a; avoids sqrt(1 - c^2) cancellation
    return np.linalg.norm(b - cp2.herm(b, a)[..., None] * a, axis=-1)


def dual_curve_residual(im: Immersion, grid, h: float = 1e-5) -> float:
    """Max distance between the second lift component and the dual of the first.

    The dual curve of u is the line through u and its derivative, represented
    by conj(u x u').  Nodes where u' is parallel to u are skipped.
    """
    x, y = grid.x, grid.y
    shifts = [(0, 0), (h, 0), (-h, 0), (0, h), (0, -h)]
    xs = np.stack([x + dx for dx, _ in shifts])
    ys = np.stack([y + dy for _, dy in shifts])
    z, w = lift_batch(im, grid.chart, xs, ys)
    u0 = z[0]
    du = np.stack(
        [
            cp2.hproject((_align(z[1], u0) - _align(z[2], u0)) / (2 * h), u0),
            cp2.hproject((_align(z[3], u0) - _align(z[4], u0)) / (2 * h), u0),
        ]
    )
    norms = np.linalg.norm(du, axis=-1)
    k = np.argmax(norms, axis=0)
    d = np.take_along_axis(du, k[None, ..., None], axis=0)[0]
    dn = np.take_along_axis(norms, k[None, ...], axis=0)[0]
    ok = dn > 1e-6
    if not np.any(ok):
        raise DomainError("first twistor component is constant; no dual curve")
    if not np.all(ok):
        warnings.warn(f"skipped {int(np.sum(~ok))} ramification nodes", RuntimeWarning, stacklevel=2)
    dual = cp2.unit(np.conj(cp2.cross(u0[ok], d[ok] / dn[ok][..., None])))
    return float(np.max(proj_distance(dual, w[0][ok])))
