import numpy as np
import pytest

from cp2willmore.errors import ConfigError, DomainError
from cp2willmore.invariants import build_grid
from cp2willmore.jets import POLAR, SPHERE, TORUS, ChartPoint
from cp2willmore.variational import (
    bump_field,
    distance_checks,
    el_residual,
    first_variation_check,
    normal_laplacian_H,
    whitney_identity_residual,
    zero_field,
)
from cp2willmore.zoo import surface

SPHERE_POINTS = [ChartPoint(SPHERE, th, ph, POLAR) for th, ph in [(0.5, 0.2), (1.2, 2.5), (2.0, -0.9), (2.7, 3.7)]]
TORUS_POINTS = [ChartPoint(TORUS, x, y) for x, y in [(0.1, 0.2), (2.0, 4.5), (5.0, 1.0)]]
GENERIC_FOCUS = np.array([1, 2j, 0.5]) / np.linalg.norm([1, 2j, 0.5])
POLE = np.array([0, 0, 1.0])


@pytest.mark.parametrize("family,params", [("complex_line", {}), ("whitney", {"t": 0.0})])
def test_minimal_sphere_is_critical(family, params):
    im = surface(family, **params)
    for p in SPHERE_POINTS:
        assert np.linalg.norm(el_residual(im, p)) <= 1e-8


def test_clifford_is_critical():
    im = surface("clifford")
    for p in TORUS_POINTS:
        assert np.linalg.norm(el_residual(im, p)) <= 1e-8
        assert np.linalg.norm(normal_laplacian_H(im, p)) <= 1e-8


@pytest.mark.parametrize("t", [0.3, 1.0, 2.0])
def test_whitney_is_critical(t):
    im = surface("whitney", t=t)
    for p in SPHERE_POINTS:
        raw = np.linalg.norm(el_residual(im, p))
        extrap = np.linalg.norm(el_residual(im, p, richardson=True))
        assert extrap <= 1e-6
        assert extrap <= raw + 1e-12


@pytest.mark.parametrize("family,params", [("phi_ab", {"a": 1, "b": 2j}), ("psi", {"a": 1, "b": 1}), ("nodal_sphere", {})])
def test_negative_spin_spheres_are_critical(family, params):
    im = surface(family, **params)
    for p in SPHERE_POINTS:
        assert np.linalg.norm(el_residual(im, p, richardson=True)) <= 1e-6


def test_complex_line_is_critical_for_wplus():
    im = surface("complex_line")
    for p in SPHERE_POINTS:
        assert np.linalg.norm(el_residual(im, p, which="Wplus")) <= 1e-8


def test_non_critical_flat_torus():
    # away from r_i^2 = 1/3 the flat tori are not critical
    im = surface("flat_torus", r1=0.8, r2=0.44, r3=0.41)
    assert np.linalg.norm(el_residual(im, TORUS_POINTS[0])) > 1e-2


def test_flat_torus_normal_laplacian_vanishes():
    # |H| is constant and H is parallel on a flat torus
    im = surface("flat_torus", r1=0.8, r2=0.44, r3=0.41)
    for p in TORUS_POINTS:
        assert np.linalg.norm(normal_laplacian_H(im, p)) <= 1e-6


def test_el_rejects_bad_input():
    with pytest.raises(ConfigError):
        el_residual(surface("clifford"), SPHERE_POINTS[0])
    with pytest.raises(ConfigError):
        el_residual(surface("complex_line"), SPHERE_POINTS[0], which="W")


def test_first_variation_flat_torus():
    im = surface("flat_torus", r1=0.8, r2=0.44, r3=0.41)
    fv = first_variation_check(im, bump_field(TORUS, centre=(1.0, 2.0), width=0.7), build_grid(TORUS, 64, 64))
    assert abs(fv.fd) > 1e-2
    assert fv.discrepancy <= 1e-3 * max(1.0, abs(fv.fd))


def test_first_variation_at_critical_whitney():
    im = surface("whitney", t=1.0)
    field = bump_field(SPHERE, centre=(0.3, -0.2), width=0.6, chart=0)
    fv = first_variation_check(im, field, build_grid(SPHERE, 48, 96))
    assert abs(fv.fd) <= 1e-4 and abs(fv.integral) <= 1e-4


def test_zero_field_has_zero_variation():
    fv = first_variation_check(surface("flat_torus", r1=0.8, r2=0.44, r3=0.41), zero_field(), build_grid(TORUS, 16, 16))
    assert fv.fd == 0.0 and fv.integral == 0.0


@pytest.mark.parametrize("eps", [0.0, 1e-5, 0.05])
def test_first_variation_eps_validated(eps):
    with pytest.raises(ConfigError):
        first_variation_check(surface("clifford"), zero_field(), build_grid(TORUS, 16, 16), eps=eps)


@pytest.mark.parametrize("t", [0.3, 1.0, 2.0])
def test_whitney_identity(t):
    im = surface("whitney", t=t)
    for p in SPHERE_POINTS:
        assert np.linalg.norm(whitney_identity_residual(im, POLE, p)) <= 1e-7


def test_whitney_identity_needs_the_right_focus():
    im = surface("whitney", t=1.0)
    worst = max(np.linalg.norm(whitney_identity_residual(im, GENERIC_FOCUS, p)) for p in SPHERE_POINTS)
    assert worst > 0.1


def test_whitney_identity_at_preimage():
    im = surface("whitney", t=1.0)
    with pytest.raises(DomainError):
        whitney_identity_residual(im, POLE, ChartPoint(SPHERE, 0.0, 0.0, 0))


@pytest.mark.parametrize(
    "family,params,points",
    [
        ("whitney", {"t": 1.0}, SPHERE_POINTS),
        ("nodal_sphere", {}, SPHERE_POINTS),
        ("psi", {"a": 1, "b": 1}, SPHERE_POINTS),
        ("flat_torus", {"r1": 0.8, "r2": 0.44, "r3": 0.41}, TORUS_POINTS),
    ],
)
@pytest.mark.parametrize("focus", [POLE, GENERIC_FOCUS])
def test_distance_identities(family, params, points, focus):
    im = surface(family, **params)
    for p in points:
        d = distance_checks(im, focus, p)
        assert abs(d.grad_res) <= 1e-8
        assert d.lap_slack >= -1e-5
        assert d.lap_fd == pytest.approx(d.lap_analytic, rel=1e-5, abs=1e-5)
        if im.metadata.get("lagrangian"):
            assert abs(d.lagrangian_res) <= 1e-8


def test_lagrangian_sum_fails_off_lagrangian():
    im = surface("nodal_sphere")
    assert max(abs(distance_checks(im, GENERIC_FOCUS, p).lagrangian_res) for p in SPHERE_POINTS) > 1e-3


def test_laplacian_equality_for_complex_line():
    # the log-distance bound is sharp on projective lines
    im = surface("complex_line")
    for p in SPHERE_POINTS:
        assert abs(distance_checks(im, [1, 0, 0], p).lap_slack) <= 1e-5
