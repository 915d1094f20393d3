"""Chart-parametrised immersions and their second-order jets.

An :class:`Immersion` maps chart coordinates to a nonzero homogeneous vector
in C^3.  Sphere surfaces are stored as a homogeneous form F(zeta0, zeta1) on
C^2 (so z = zeta1/zeta0 is the stereographic coordinate) and can be read in
three charts:

* ``NORTH`` -- z = x + iy, zeta = (1, z);
* ``SOUTH`` -- w = x + iy = 1/z, zeta = (w, 1);
* ``POLAR`` -- (x, y) = (theta, phi), zeta = (cos theta/2, e^{i phi} sin theta/2),
  the global coordinates used by quadrature.

All three charts induce the same orientation.  Torus surfaces use periodic
coordinates in [0, 2pi)^2 and a single chart ``TORUS``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, ImmersionError
from .hyperdual import HyperDual, seed

SPHERE = "sphere"
TORUS = "torus"

NORTH, SOUTH, POLAR = 0, 1, 2
TORUS_CHART = 0

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ChartPoint:
    domain: str
    x: float
    y: float
    chart: int = 0

    def __post_init__(self):
        if self.domain == TORUS:
            object.__setattr__(self, "x", float(self.x) % TWO_PI)
            object.__setattr__(self, "y", float(self.y) % TWO_PI)
            if self.chart != TORUS_CHART:
                raise ConfigError("torus points use chart 0")
        elif self.domain == SPHERE:
            if self.chart not in (NORTH, SOUTH, POLAR):
                raise ConfigError(f"unknown sphere chart {self.chart}")
            if self.chart != POLAR and np.hypot(self.x, self.y) > 1.5:
                raise ConfigError("stereographic coordinates must satisfy |z| <= 1.5; switch charts")
        else:
            raise ConfigError(f"unknown domain {self.domain!r}")

    @property
    def coords(self) -> tuple[float, float]:
        return (self.x, self.y)


def chart_zeta(chart, x, y):
    """Homogeneous C^2 coordinates of a sphere chart point (works on hyper-duals)."""
    if chart == NORTH:
        return 1.0 + 0.0 * x, x + 1j * y
    if chart == SOUTH:
        return x + 1j * y, 1.0 + 0.0 * x
    if chart == POLAR:
        return np.cos(0.5 * x) + 0.0 * y, np.exp(1j * y) * np.sin(0.5 * x)
    raise ConfigError(f"unknown sphere chart {chart}")


def sphere_point(chart, x, y):
    """Unit vector in R^3 for sphere chart coordinates (north pole is z = 0)."""
    z0, z1 = chart_zeta(chart, np.asarray(x, float), np.asarray(y, float))
    p = z1 * np.conj(z0)
    n = np.abs(z0) ** 2 + np.abs(z1) ** 2
    return np.stack([2 * p.real / n, 2 * p.imag / n, (np.abs(z0) ** 2 - np.abs(z1) ** 2) / n], axis=-1)


def sphere_to_chart(s, chart):
    """Chart coordinates of a unit vector s in R^3 (inverse of :func:`sphere_point`)."""
    s = np.asarray(s, dtype=float)
    sx, sy, sz = s[..., 0], s[..., 1], s[..., 2]
    if chart == NORTH:
        z = (sx + 1j * sy) / (1.0 + sz)
        return z.real, z.imag
    if chart == SOUTH:
        w = (sx - 1j * sy) / (1.0 - sz)
        return w.real, w.imag
    if chart == POLAR:
        return np.arccos(np.clip(sz, -1.0, 1.0)), np.arctan2(sy, sx) % TWO_PI
    raise ConfigError(f"unknown sphere chart {chart}")


def best_chart(s):
    """Stereographic chart in which the sphere point has |coords| <= 1."""
    return NORTH if s[..., 2] >= 0 else SOUTH


def domain_point(domain, chart, x, y):
    """Embed chart coordinates into a common space for distance comparisons."""
    if domain == SPHERE:
        return sphere_point(chart, x, y)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return np.stack([np.cos(x), np.sin(x), np.cos(y), np.sin(y)], axis=-1)


@dataclass(frozen=True)
class Immersion:
    """A smooth map from a chart domain to C^3 - {0}.

    ``func(chart, x, y)`` returns the three homogeneous components; it must be
    written with numpy ufuncs so that it accepts floats, arrays and
    :class:`HyperDual` inputs.  ``lift`` optionally returns the analytic
    twistor pair ``((z0, z1, z2), (w0, w1, w2))`` in the same way.
    """

    domain: str
    func: Callable
    name: str = "surface"
    params: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    lift: Optional[Callable] = None
    # surfaces without hyper-dual support are differentiated by finite differences
    smooth_ad: bool = True

    @classmethod
    def from_homogeneous(cls, form, **kw) -> "Immersion":
        def func(chart, x, y):
            return form(*chart_zeta(chart, x, y))

        lift = kw.pop("lift_form", None)
        if lift is not None:
            kw["lift"] = lambda chart, x, y: lift(*chart_zeta(chart, x, y))
        return cls(SPHERE, func, **kw)

    def charts(self) -> tuple[int, ...]:
        return (NORTH, SOUTH, POLAR) if self.domain == SPHERE else (TORUS_CHART,)

    def default_chart(self) -> int:
        return POLAR if self.domain == SPHERE else TORUS_CHART

    def __call__(self, chart, x, y):
        """Evaluate to a complex array with components on the last axis."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        comps = self.func(chart, x, y)
        return np.stack([np.broadcast_to(np.asarray(c, dtype=complex), np.broadcast(x, y).shape) for c in comps], axis=-1)


@dataclass(frozen=True)
class Jet2:
    """Value, first and second partials of a homogeneous map.

    Shapes: ``value`` (..., 3); ``d1`` (..., 2, 3) for (d/dx, d/dy);
    ``d2`` (..., 3, 3) for (d2/dxx, d2/dxy, d2/dyy).
    """

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    def second(self, i: int, j: int) -> np.ndarray:
        return self.d2[..., i + j, :]

    def __getitem__(self, idx) -> "Jet2":
        return Jet2(self.value[idx], self.d1[idx], self.d2[idx])


def _stack(comps, shape):
    return np.stack([np.broadcast_to(np.asarray(c, dtype=complex), shape) for c in comps], axis=-1)


def _normalized(comps):
    """Divide homogeneous hyper-dual components by their Euclidean norm."""
    n2 = comps[0] * np.conj(comps[0]) + comps[1] * np.conj(comps[1]) + comps[2] * np.conj(comps[2])
    n = np.sqrt(HyperDual.lift(n2).real)
    return [c / n for c in comps]


def _hd_components(func, chart, x, y, direction, normalize):
    hx, hy = seed(x, y, direction)
    comps = [HyperDual.lift(c) for c in func(chart, hx, hy)]
    if normalize:
        comps = _normalized(comps)
    return comps


def jet2_batch(im: Immersion, chart, x, y, normalize: bool = False) -> Jet2:
    """Vectorised second-order jet at arrays of chart coordinates.

    With ``normalize=True`` the jet is that of the unit representative
    F/|F|.  Uses hyper-dual numbers: one pass per second-derivative direction.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    x = np.broadcast_to(x, shape)
    y = np.broadcast_to(y, shape)
    if not im.smooth_ad:
        return fd_jet(im, chart, x, y, h=1e-3, normalize=normalize, order=4)

    cxy = _hd_components(im.func, chart, x, y, "xy", normalize)
    cxx = _hd_components(im.func, chart, x, y, "xx", normalize)
    cyy = _hd_components(im.func, chart, x, y, "yy", normalize)
    value = _stack([c.f0 for c in cxy], shape)
    if np.any(np.sum(np.abs(value) ** 2, axis=-1) == 0):
        raise ImmersionError("homogeneous representative vanishes", location=(chart, x, y))
    d1 = np.stack([_stack([c.f1 for c in cxy], shape), _stack([c.f2 for c in cxy], shape)], axis=-2)
    d2 = np.stack(
        [_stack([c.f12 for c in cxx], shape), _stack([c.f12 for c in cxy], shape), _stack([c.f12 for c in cyy], shape)],
        axis=-2,
    )
    return Jet2(value, d1, d2)


def jet2_eval(im: Immersion, p: ChartPoint, normalize: bool = False) -> Jet2:
    if p.domain != im.domain:
        raise ConfigError(f"point on {p.domain} but immersion lives on {im.domain}")
    return jet2_batch(im, p.chart, np.float64(p.x), np.float64(p.y), normalize=normalize)


def _unit_rep(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _align_phase(v, ref):
    """Multiply v by the unit phase that makes (v, ref) real and positive."""
    ip = np.sum(v * np.conj(ref), axis=-1, keepdims=True)
    return v * np.conj(ip) / np.abs(ip)


def fd_jet(im: Immersion, chart, x, y, h: float = 1e-4, normalize: bool = False, order: int = 2) -> Jet2:
    """Finite-difference jet of ``im``.

    ``order=2`` uses the 5-point star (plus the four diagonal corners for the
    mixed derivative); ``order=4`` uses fourth-order central stencils.  When
    the map is only defined up to phase (``smooth_ad=False``) each sample is
    phase-aligned with the centre value before differencing.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def F(dx, dy):
        v = im(chart, x + dx, y + dy)
        if normalize or not im.smooth_ad:
            v = _unit_rep(v)
        return v

    f0 = F(0.0, 0.0)
    if not im.smooth_ad:
        base = f0

        def G(dx, dy):
            return _align_phase(F(dx, dy), base)
    else:
        G = F
    if order == 2:
        fxp, fxm, fyp, fym = G(h, 0), G(-h, 0), G(0, h), G(0, -h)
        fx = (fxp - fxm) / (2 * h)
        fy = (fyp - fym) / (2 * h)
        fxx = (fxp - 2 * f0 + fxm) / h**2
        fyy = (fyp - 2 * f0 + fym) / h**2
        fxy = (G(h, h) - G(h, -h) - G(-h, h) + G(-h, -h)) / (4 * h * h)
    elif order == 4:
        def d1(axis):
            e = (h, 0) if axis == 0 else (0, h)
            return (-G(2 * e[0], 2 * e[1]) + 8 * G(e[0], e[1]) - 8 * G(-e[0], -e[1]) + G(-2 * e[0], -2 * e[1])) / (12 * h)

        def d2(axis):
            e = (h, 0) if axis == 0 else (0, h)
            return (
                -G(2 * e[0], 2 * e[1]) + 16 * G(e[0], e[1]) - 30 * f0 + 16 * G(-e[0], -e[1]) - G(-2 * e[0], -2 * e[1])
            ) / (12 * h * h)

        fx, fy = d1(0), d1(1)
        fxx, fyy = d2(0), d2(1)
        w = {1: 8.0, 2: -1.0}
        fxy = 0.0
        for a, wa in w.items():
            for b, wb in w.items():
                fxy = fxy + wa * wb * (G(a * h, b * h) - G(a * h, -b * h) - G(-a * h, b * h) + G(-a * h, -b * h))
        fxy = fxy / (144 * h * h)
    else:
        raise ConfigError("finite-difference order must be 2 or 4")
    return Jet2(f0, np.stack([fx, fy], axis=-2), np.stack([fxx, fxy, fyy], axis=-2))


@dataclass(frozen=True)
class Discrepancy:
    value: float
    d1: float
    d2: float

    @property
    def max_abs(self) -> float:
        return max(self.value, self.d1, self.d2)


def fd_crosscheck(im: Immersion, p: ChartPoint, h: float = 1e-4) -> Discrepancy:
    """Max deviation between the hyper-dual jet and the 5-point FD jet."""
    if not 1e-6 <= h <= 1e-2:
        raise ConfigError("finite-difference step must lie in [1e-6, 1e-2]")
    a = jet2_eval(im, p)
    b = fd_jet(im, p.chart, np.float64(p.x), np.float64(p.y), h=h)
    return Discrepancy(
        float(np.max(np.abs(a.value - b.value))),
        float(np.max(np.abs(a.d1 - b.d1))),
        float(np.max(np.abs(a.d2 - b.d2))),
    )
