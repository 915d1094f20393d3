"""Closed-form surface families in CP^2 with their known invariants.

Sphere families are written as homogeneous forms in (zeta0, zeta1) with the
stereographic coordinate z = zeta1/zeta0; each polynomial in (z, conj z) is
multiplied through by powers of zeta0 and conj(zeta0) so that it is smooth on
all of C^2 and hence across the point at infinity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .jets import TORUS, Immersion

PI = np.pi

FAMILIES = (
    "complex_line",
    "whitney",
    "phi_ab",
    "psi",
    "nodal_sphere",
    "clifford",
    "flat_torus",
    "totally_geodesic_rp2",
)


@dataclass(frozen=True)
class FamilySpec:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        p = dict(self.params)
        if self.family == "whitney":
            t = float(p.get("t", 1.0))
            if not (np.isfinite(t) and t >= 0):
                raise ConfigError("Whitney parameter t must be >= 0")
            p = {"t": t}
        elif self.family in ("phi_ab", "psi"):
            a = complex(p.get("a", 1.0))
            b = complex(p.get("b", 0.0))
            if a == 0 and b == 0:
                raise ConfigError("(a, b) must not both vanish")
            if self.family == "psi":
                # [a:b] is a point of CP^1; store a unit representative
                n = np.hypot(abs(a), abs(b))
                a, b = a / n, b / n
            p = {"a": a, "b": b}
        elif self.family == "flat_torus":
            r = np.array([float(p.get(k, 1 / np.sqrt(3))) for k in ("r1", "r2", "r3")])
            if np.any(r <= 0) or not np.all(np.isfinite(r)):
                raise ConfigError("flat torus radii must be positive")
            r = r / np.linalg.norm(r)
            p = {"r1": float(r[0]), "r2": float(r[1]), "r3": float(r[2])}
        else:
            p = {}
        object.__setattr__(self, "params", p)


# --------------------------------------------------------------------------
# homogeneous forms


def _abs2(u):
    return u * np.conj(u)


def _line(z0, z1):
    return z0, z1, 0.0 * z0


def _line_lift(z0, z1):
    # constant polar point paired with the moving point of the line
    zero = 0.0 * z0
    return (zero, zero, 1.0 + zero), (np.conj(z1), -np.conj(z0), zero)


def _whitney(t):
    ch, sh = np.cosh(t), np.sinh(t)

    def form(z0, z1):
        p = z1 * np.conj(z0)
        n0, n1 = _abs2(z0), _abs2(z1)
        return p + np.conj(p), (p - np.conj(p)) / 1j, (n0 - n1) * ch + 1j * (n0 + n1) * sh

    return form


def _phi_ab(a, b):
    def form(z0, z1):
        z0b, z1b = np.conj(z0), np.conj(z1)
        return -a * z0 * z1b - b * z1 * z1b, a * z0 * z0b + b * z1 * z0b, z0 * z0b + z1 * z1b

    def lift(z0, z1):
        # phi1 = (1, z, 0), phi2 = (conj z, -1, conj(a + b z)), homogenised
        z0b, z1b = np.conj(z0), np.conj(z1)
        return (z0, z1, 0.0 * z0), (z1b, -z0b, np.conj(a) * z0b + np.conj(b) * z1b)

    return form, lift


def _psi(a, b):
    ab, bb = np.conj(a), np.conj(b)

    def form(z0, z1):
        z0b, z1b = np.conj(z0), np.conj(z1)
        n = z0 * z0b + z1 * z1b
        return (
            bb * z1 * n - ab * z1 * z1 * z0b,
            -(bb * z0 * z0 * z0b + ab * z1 * z1 * z1b),
            ab * n * z0 - bb * z1b * z0 * z0,
        )

    def lift(z0, z1):
        # phi1 = (a z, -a + b z, -b), phi2 = (1, conj z, conj z^2), homogenised
        z0b, z1b = np.conj(z0), np.conj(z1)
        return (a * z1, -a * z0 + b * z1, -b * z0), (z0b * z0b, z1b * z0b, z1b * z1b)

    return form, lift


def _nodal_sphere(z0, z1):
    z0b, z1b = np.conj(z0), np.conj(z1)
    n = z0 * z0b + z1 * z1b
    return -z1 * z1b * z0, z1 * z0 * z0b, (z0 + z1) * n


def _nodal_sphere_lift(z0, z1):
    z0b, z1b = np.conj(z0), np.conj(z1)
    return (z0, z1, 0.0 * z0), (z1b * (z0b + z1b), -(z0b + z1b) * z0b, z1b * z0b)


def _flat_torus(r1, r2, r3):
    def func(chart, x, y):
        return r1 * np.exp(1j * x), r2 * np.exp(1j * y), r3 + 0.0 * x

    return func


# --------------------------------------------------------------------------


def make_surface(spec: FamilySpec) -> Immersion:
    fam, p = spec.family, spec.params
    meta = list_expected(spec)
    if fam == "complex_line":
        return Immersion.from_homogeneous(_line, name=fam, params=p, metadata=meta, lift_form=_line_lift)
    if fam in ("whitney", "totally_geodesic_rp2"):
        t = p.get("t", 0.0)
        return Immersion.from_homogeneous(_whitney(t), name=fam, params=p, metadata=meta)
    if fam == "phi_ab":
        form, lift = _phi_ab(p["a"], p["b"])
        return Immersion.from_homogeneous(form, name=fam, params=p, metadata=meta, lift_form=lift)
    if fam == "psi":
        form, lift = _psi(p["a"], p["b"])
        return Immersion.from_homogeneous(form, name=fam, params=p, metadata=meta, lift_form=lift)
    if fam == "nodal_sphere":
        return Immersion.from_homogeneous(_nodal_sphere, name=fam, params=p, metadata=meta, lift_form=_nodal_sphere_lift)
    if fam == "clifford":
        r = 1 / np.sqrt(3)
        return Immersion(TORUS, _flat_torus(r, r, r), name=fam, params=p, metadata=meta)
    r1, r2, r3 = p["r1"], p["r2"], p["r3"]
    return Immersion(TORUS, _flat_torus(r1, r2, r3), name=fam, params=p, metadata=meta)


def surface(family: str, **params) -> Immersion:
    return make_surface(FamilySpec(family, params))


CLIFFORD_AREA = 4 * PI**2 / (3 * np.sqrt(3))


def list_expected(spec: FamilySpec) -> dict:
    """Known invariants of a family, each as ``{name: (value, basis)}``.

    ``mu`` is the maximum multiplicity used by the multiplicity bounds.  The
    ``basis`` string says where the value comes from.
    """
    fam = spec.family
    sphere = fam not in ("clifford", "flat_torus")
    out: dict = {"domain": "sphere" if sphere else "torus", "chi": (2 if sphere else 0, "topology")}
    if fam == "complex_line":
        out.update(
            mu=(1, "embedded projective line"),
            lagrangian=False,
            Wminus=(2 * PI, "minimum of W- attained by projective lines"),
            Wplus=(6 * PI, "constant integrand |H|^2 + 6C^2 = 6 on area pi"),
            W=(4 * PI, "constant integrand 1 + 3C^2 = 4 on area pi"),
            area=(PI, "degree-one holomorphic curve"),
            degree=(1, "holomorphic curve of degree one"),
            chi_perp=(-1, "6C^2 Area = 2 pi (chi - chi_perp) with C = 1, Area = pi"),
            twistor_degrees=((0, 1), "one twistor component is a point"),
        )
    elif fam in ("whitney", "totally_geodesic_rp2"):
        out.update(
            mu=(2, "double point at the poles"),
            lagrangian=True,
            Wminus=(8 * PI, "Whitney spheres"),
            degree=(0, "Lagrangian"),
            chi_perp=(2, "Lagrangian: normal bundle isomorphic to tangent bundle"),
            n_H_zeros=(2, "W- = 2 pi (chi + N(H))"),
            twistor_degrees=((2, 2), "twistor components are conics"),
        )
        t = spec.params.get("t", 0.0)
        if t == 0.0:
            out.update(minimal=True, n_H_zeros=None, area=(4 * PI, "double cover of the totally geodesic RP^2"))
    elif fam == "phi_ab":
        out.update(
            mu=(1, "embedding"),
            lagrangian=False,
            Wminus=(4 * PI, "negative-spin twistor holomorphic spheres with (d1, d2) = (1, 1)"),
            degree=(0, "d = d2 - d1"),
            chi_perp=(0, "(d1, d2) = (1, 1) block"),
            n_H_zeros=(0, "H has no zeros"),
            twistor_degrees=((1, 1), "(d1, d2) = (1, 1) block"),
        )
    elif fam == "psi":
        out.update(
            mu=(1, "lower bound; multiplicity not stated"),
            lagrangian=False,
            Wminus=(6 * PI, "negative-spin twistor holomorphic spheres with (d1, d2) = (1, 2)"),
            degree=(1, "d = d2 - d1"),
            chi_perp=(1, "(d1, d2) = (1, 2) block"),
            n_H_zeros=(1, "H has exactly one zero"),
            twistor_degrees=((1, 2), "(d1, d2) = (1, 2) block"),
        )
        if spec.params["a"] == 0 or spec.params["b"] == 0:
            # the formula has a vanishing differential at one point for these
            # parameters; chi and chi_perp of the branched map differ from the table
            out["branched"] = True
    elif fam == "nodal_sphere":
        out.update(
            mu=(2, "double point at z = 0 and z = infinity"),
            lagrangian=False,
            Wminus=(6 * PI, "twistor degrees 1 and 2"),
            degree=(1, "d = d2 - d1"),
            chi_perp=(1, "W- = 2 pi (chi + chi_perp)"),
            n_H_zeros=(1, "W- = 2 pi (chi + N(H))"),
            twistor_degrees=((1, 2), "twistor degrees 1 and 2"),
        )
    elif fam == "clifford":
        out.update(
            mu=(1, "embedded torus"),
            lagrangian=True,
            minimal=True,
            area=(CLIFFORD_AREA, "minimal Lagrangian torus |z_i|^2 = 1/3"),
            Wminus=(2 * CLIFFORD_AREA, "W- = 2 Area for a minimal surface"),
            degree=(0, "Lagrangian"),
            chi_perp=(0, "Lagrangian torus"),
        )
    elif fam == "flat_torus":
        out.update(
            mu=(1, "embedded torus"),
            lagrangian=True,
            degree=(0, "Lagrangian"),
            chi_perp=(0, "Lagrangian torus"),
        )
    return out


def expected_value(meta: dict, key: str):
    entry = meta.get(key)
    if entry is None or not isinstance(entry, tuple):
        return None
    return entry[0]
