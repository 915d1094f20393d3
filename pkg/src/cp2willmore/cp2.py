"""Fubini-Study geometry of CP^2 through unit representatives in C^3.

The Hopf projection S^5 -> CP^2 is a Riemannian submersion for Re(,), so a
tangent vector at [z] is stored as its horizontal lift: a complex 3-vector
Hermitian-orthogonal to the unit representative z.  The complex structure is
multiplication by i and the metric has holomorphic sectional curvature 4.

Scalar-point types (``ProjPoint``, ``HorizontalVector``) validate their
invariants; the ``herm``/``hproject``-style helpers are vectorised over a
leading batch shape with components on the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

PROJ_EPS = 1e-10
HORIZONTAL_TOL = 1e-12


def herm(u, v):
    """Hermitian product (u, v) = sum u_k conj(v_k) over the last axis."""
    return np.sum(u * np.conj(v), axis=-1)


def real_inner(u, v):
    return np.real(herm(u, v))


def hproject(v, z):
    """Horizontal part of v at the unit representative z."""
    return v - herm(v, z)[..., None] * z


def unit(v):
    return v / np.sqrt(real_inner(v, v))[..., None]


def cross(u, v):
    return np.stack(
        [
            u[..., 1] * v[..., 2] - u[..., 2] * v[..., 1],
            u[..., 2] * v[..., 0] - u[..., 0] * v[..., 2],
            u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0],
        ],
        axis=-1,
    )


def horizontal_basis(z):
    """Complex orthonormal pair (b1, b2) spanning the horizontal space at z.

    b1 is the normalised horizontal projection of the first standard basis
    vector, falling back to the next index when that projection is short;
    b2 = conj(z x b1).  The real basis (b1, i b1, b2, i b2) is positively
    oriented for the complex orientation.
    """
    z = np.asarray(z, dtype=complex)
    eye = np.eye(3, dtype=complex)
    cands = np.stack([hproject(np.broadcast_to(eye[k], z.shape), z) for k in range(3)])
    norms = np.sqrt(real_inner(cands, cands))
    # first index whose projection is not degenerate
    ok = norms > 0.5
    k = np.argmax(ok, axis=0)
    b1 = np.take_along_axis(cands, k[None, ..., None], axis=0)[0]
    b1 = b1 / np.take_along_axis(norms, k[None, ...], axis=0)[0][..., None]
    b2 = np.conj(cross(z, b1))
    return b1, b2


def to_real4(v, b1, b2):
    """Real coordinates of horizontal vectors in the basis (b1, i b1, b2, i b2)."""
    a = herm(v, b1)
    b = herm(v, b2)
    return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


def from_real4(x, b1, b2):
    return (x[..., 0] + 1j * x[..., 1])[..., None] * b1 + (x[..., 2] + 1j * x[..., 3])[..., None] * b2


J4 = np.array([[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0]])


def j4(x):
    """Complex structure on real 4-coordinates (multiplication by i)."""
    return np.stack([-x[..., 1], x[..., 0], -x[..., 3], x[..., 2]], axis=-1)


def curvature4(x, y, z, w):
    """Fubini-Study curvature R(x, y, z, w) on real 4-coordinates.

    Convention: R(x, y, y, x) is the sectional curvature of an orthonormal
    pair; holomorphic sectional curvature is 4.
    """
    def ip(a, b):
        return np.sum(a * b, axis=-1)

    jx, jy, jz = j4(x), j4(y), j4(z)
    return (
        ip(x, w) * ip(y, z)
        - ip(x, z) * ip(y, w)
        + ip(jx, w) * ip(jy, z)
        - ip(jx, z) * ip(jy, w)
        - 2.0 * ip(jx, y) * ip(jz, w)
    )


# --------------------------------------------------------------------------
# point-level API


@dataclass(frozen=True)
class ProjPoint:
    rep: np.ndarray

    def __post_init__(self):
        rep = np.asarray(self.rep, dtype=complex).reshape(3)
        if abs(np.linalg.norm(rep) - 1.0) > 1e-14:
            raise DomainError("ProjPoint representative must be a unit vector; use normalize()")
        object.__setattr__(self, "rep", rep)

    def same_point(self, other: "ProjPoint", eps: float = PROJ_EPS) -> bool:
        return abs(herm(self.rep, other.rep)) >= 1.0 - eps


@dataclass(frozen=True)
class HorizontalVector:
    base: ProjPoint
    vec: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vec, dtype=complex).reshape(3)
        if abs(herm(vec, self.base.rep)) > HORIZONTAL_TOL * max(1.0, np.linalg.norm(vec)):
            raise DomainError("vector is not horizontal at its base point")
        object.__setattr__(self, "vec", vec)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))


def normalize(raw) -> ProjPoint:
    raw = np.asarray(raw, dtype=complex).reshape(3)
    n = np.linalg.norm(raw)
    if not n > 1e-300:
        raise DomainError("cannot normalize the zero vector")
    return ProjPoint(raw / n)


def horizontal(base: ProjPoint, v) -> HorizontalVector:
    """Project an arbitrary complex 3-vector to the horizontal space at base."""
    return HorizontalVector(base, hproject(np.asarray(v, dtype=complex), base.rep))


def _common_base(*vs: HorizontalVector) -> ProjPoint:
    base = vs[0].base
    for v in vs[1:]:
        if v.base is base:
            continue
        if not base.same_point(v.base):
            raise DomainError("horizontal vectors live at different points")
        # same projective point but possibly a different phase
        if not np.allclose(v.base.rep, base.rep, atol=1e-12):
            raise DomainError("horizontal vectors use different representatives of the base point")
    return base


def fs_inner(u: HorizontalVector, v: HorizontalVector) -> float:
    _common_base(u, v)
    return float(real_inner(u.vec, v.vec))


def j_apply(u: HorizontalVector) -> HorizontalVector:
    return HorizontalVector(u.base, 1j * u.vec)


def kahler_form(u: HorizontalVector, v: HorizontalVector) -> float:
    return fs_inner(j_apply(u), v)


def fs_curvature(x: HorizontalVector, y: HorizontalVector, z: HorizontalVector, w: HorizontalVector) -> float:
    base = _common_base(x, y, z, w)
    b1, b2 = horizontal_basis(base.rep)
    xs = [to_real4(v.vec, b1, b2) for v in (x, y, z, w)]
    return float(curvature4(*xs))


def geodesic_exp(z: ProjPoint, v: HorizontalVector, t: float) -> ProjPoint:
    if not (v.base is z or np.allclose(v.base.rep, z.rep, atol=1e-12)):
        raise DomainError("direction is not based at z")
    n = v.norm
    if not n > 0:
        raise DomainError("geodesic direction must be nonzero")
    return normalize(np.cos(n * t) * z.rep + np.sin(n * t) * v.vec / n)


@dataclass(frozen=True)
class DistanceFieldData:
    """f = |(z, a)|^2 with its gradient and Hessian at [z].

    ``hessian`` is the real 4x4 matrix of the bilinear form in the basis
    (b1, i b1, b2, i b2) returned by :func:`horizontal_basis`.
    """

    value: float
    gradient: HorizontalVector
    hessian: np.ndarray
    focus: ProjPoint

    def hessian_form(self, u: HorizontalVector, v: HorizontalVector) -> float:
        _common_base(self.gradient, u, v)
        a = self.focus.rep
        return float(-2.0 * self.value * fs_inner(u, v) + 2.0 * np.real(herm(u.vec, a) * herm(a, v.vec)))

    def cross_term(self, u: HorizontalVector, v: HorizontalVector) -> tuple[float, float]:
        """Both sides of 4 f Re((u,a)(a,v)) = <grad,u><grad,v> + <grad,Ju><grad,Jv>.

        The factor 4 comes from grad f = 2 P((z,a) a), the same normalisation
        that gives |grad f|^2 = 4 f (1 - f).
        """
        a = self.focus.rep
        lhs = 4.0 * self.value * float(np.real(herm(u.vec, a) * herm(a, v.vec)))
        g = self.gradient
        rhs = fs_inner(g, u) * fs_inner(g, v) + fs_inner(g, j_apply(u)) * fs_inner(g, j_apply(v))
        return lhs, rhs


def dist_field(a: ProjPoint, z: ProjPoint) -> DistanceFieldData:
    """Distance-type function f([z]) = |(z, a)|^2 to a focus point [a]."""
    arep = a.rep / np.linalg.norm(a.rep)
    zr = z.rep
    za = herm(zr, arep)
    value = float(abs(za) ** 2)
    grad = HorizontalVector(z, 2.0 * hproject(za * arep, zr))
    b1, b2 = horizontal_basis(zr)
    basis = [b1, 1j * b1, b2, 1j * b2]
    hess = np.empty((4, 4))
    for i, u in enumerate(basis):
        for j, v in enumerate(basis):
            hess[i, j] = -2.0 * value * real_inner(u, v) + 2.0 * np.real(herm(u, arep) * herm(arep, v))
    return DistanceFieldData(min(max(value, 0.0), 1.0), grad, hess, ProjPoint(arep))
