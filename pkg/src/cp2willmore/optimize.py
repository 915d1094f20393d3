"""Minimisation of W- over the flat Lagrangian tori |z_i|^2 = r_i^2.

The open simplex {(r1^2, r2^2, r3^2)} is parametrised by two unconstrained
variables through r_i^2 = softmax(u1, u2, 0), so Nelder-Mead never leaves
the interior.  The objective is the full quadrature pipeline; the integrand
is constant on these tori, so a coarse trapezoid grid is already exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigError
from .invariants import build_grid, invariant_report
from .zoo import FamilySpec, make_surface

DEFAULT_STARTS = ((0.5, 0.3, 0.2), (0.1, 0.1, 0.8), (0.6, 0.35, 0.05))
OBJECTIVE_GRID = (16, 16)


def weights_from_u(u) -> np.ndarray:
    z = np.array([u[0], u[1], 0.0])
    z = np.exp(z - z.max())
    return z / z.sum()


def u_from_weights(w) -> np.ndarray:
    w = np.asarray(w, float)
    if w.shape != (3,) or np.any(w <= 0):
        raise ConfigError("start weights must be three positive numbers")
    w = w / w.sum()
    return np.log(w[:2] / w[2])


def torus_wminus(w) -> float:
    r = np.sqrt(np.asarray(w, float))
    im = make_surface(FamilySpec("flat_torus", {"r1": r[0], "r2": r[1], "r3": r[2]}))
    return invariant_report(im, build_grid(im.domain, *OBJECTIVE_GRID), error_estimate=False).Wminus


@dataclass
class OptimumReport:
    start: tuple
    weights: np.ndarray
    value: float
    start_value: float
    iterations: int
    converged: bool
    message: str
    trace: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "start": list(self.start),
            "argmin_r_sq": [float(v) for v in self.weights],
            "min_Wminus": self.value,
            "start_Wminus": self.start_value,
            "improvement": self.start_value - self.value,
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
            "trace": self.trace,
        }


def minimise_flat_torus(start=DEFAULT_STARTS[0], maxiter: int = 400, simplex_size: float = 0.5, xatol: float = 1e-10, fatol: float = 1e-13) -> OptimumReport:
    if maxiter < 1 or not simplex_size > 0:
        raise ConfigError("maxiter must be >= 1 and simplex_size > 0")
    u0 = u_from_weights(start)
    trace = []

    def f(u):
        return torus_wminus(weights_from_u(u))

    def record(u):
        trace.append({"iteration": len(trace) + 1, "r_sq": [float(v) for v in weights_from_u(u)], "Wminus": f(u)})

    simplex = np.array([u0, u0 + [simplex_size, 0.0], u0 + [0.0, simplex_size]])
    res = minimize(
        f,
        u0,
        method="Nelder-Mead",
        callback=record,
        options={"initial_simplex": simplex, "maxiter": maxiter, "xatol": xatol, "fatol": fatol},
    )
    w0 = np.asarray(start, float) / np.sum(start)
    return OptimumReport(
        start=tuple(float(v) for v in w0),
        weights=weights_from_u(res.x),
        value=float(res.fun),
        start_value=f(u0),
        iterations=int(res.nit),
        converged=bool(res.success),
        message=str(res.message),
        trace=trace,
    )
