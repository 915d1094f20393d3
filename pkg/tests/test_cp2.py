import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cp2willmore import cp2
from cp2willmore.cp2 import ProjPoint, dist_field, fs_curvature, fs_inner, geodesic_exp, horizontal, j_apply, kahler_form, normalize
from cp2willmore.errors import DomainError

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rand_c3(rng):
    return rng.standard_normal(3) + 1j * rng.standard_normal(3)


def rand_point(rng):
    return normalize(rand_c3(rng))


def rand_tangent(rng, base):
    return horizontal(base, rand_c3(rng))


def test_normalize_examples():
    assert np.allclose(normalize([0, 0, 2]).rep, [0, 0, 1])
    assert np.allclose(np.abs(normalize([1, 1j, 0]).rep), [2**-0.5, 2**-0.5, 0])
    assert np.allclose(normalize([3, 4, 0]).rep, [0.6, 0.8, 0])


def test_normalize_rejects_zero():
    with pytest.raises(DomainError):
        normalize([0, 0, 0])


def test_projpoint_requires_unit_rep():
    with pytest.raises(DomainError):
        ProjPoint(np.array([1.0, 1.0, 0.0]))


@given(seeds, st.floats(0, 2 * np.pi))
def test_projective_equality_ignores_phase(seed, phase):
    p = rand_point(np.random.default_rng(seed))
    q = ProjPoint(np.exp(1j * phase) * p.rep)
    assert p.same_point(q)


def test_fs_inner_examples():
    base = normalize([1, 0, 0])
    u = horizontal(base, [0, 1, 0])
    assert fs_inner(u, u) == pytest.approx(1.0)
    v = horizontal(base, [0, 1j, 0])
    assert fs_inner(u, v) == pytest.approx(0.0, abs=1e-15)


def test_non_horizontal_vector_rejected():
    base = normalize([1, 0, 0])
    with pytest.raises(DomainError):
        cp2.HorizontalVector(base, np.array([1.0, 0, 0]))


def test_mismatched_bases_rejected():
    u = horizontal(normalize([1, 0, 0]), [0, 1, 0])
    v = horizontal(normalize([0, 0, 1]), [0, 1, 0])
    with pytest.raises(DomainError):
        fs_inner(u, v)


@settings(max_examples=50)
@given(seeds)
def test_complex_structure_properties(seed):
    rng = np.random.default_rng(seed)
    z = rand_point(rng)
    u, v = rand_tangent(rng, z), rand_tangent(rng, z)
    assert fs_inner(j_apply(u), j_apply(v)) == pytest.approx(fs_inner(u, v), abs=1e-12)
    assert np.allclose(j_apply(j_apply(u)).vec, -u.vec)
    assert kahler_form(u, u) == pytest.approx(0.0, abs=1e-12)
    assert kahler_form(u, j_apply(u)) == pytest.approx(u.norm**2, rel=1e-12)
    assert kahler_form(u, v) == pytest.approx(-kahler_form(v, u), abs=1e-12)


@settings(max_examples=50)
@given(seeds)
def test_curvature_tensor(seed):
    rng = np.random.default_rng(seed)
    z = rand_point(rng)
    x = rand_tangent(rng, z)
    x = horizontal(z, x.vec / x.norm)
    jx = j_apply(x)
    assert fs_curvature(x, jx, jx, x) == pytest.approx(4.0, abs=1e-12)
    # y orthogonal to x and Jx
    y = rand_tangent(rng, z).vec
    y = y - np.vdot(x.vec, y) * x.vec
    y = horizontal(z, y / np.linalg.norm(y))
    assert fs_curvature(x, y, y, x) == pytest.approx(1.0, abs=1e-12)
    a, b, c, d = (rand_tangent(rng, z) for _ in range(4))
    assert fs_curvature(a, b, c, d) == pytest.approx(-fs_curvature(b, a, c, d), abs=1e-12)


@settings(max_examples=50)
@given(seeds, st.floats(0, np.pi))
def test_sectional_curvature_is_one_plus_three_kahler_cosine_squared(seed, angle):
    rng = np.random.default_rng(seed)
    z = rand_point(rng)
    e1 = rand_tangent(rng, z)
    e1 = horizontal(z, e1.vec / e1.norm)
    w = rand_tangent(rng, z).vec
    w = w - np.vdot(e1.vec, w) * e1.vec
    w = w / np.linalg.norm(w)
    # unit e2 orthogonal to e1 with Kahler cosine C = cos(angle)
    e2 = horizontal(z, np.cos(angle) * 1j * e1.vec + np.sin(angle) * w)
    C = kahler_form(e1, e2)
    assert C == pytest.approx(np.cos(angle), abs=1e-12)
    assert fs_curvature(e1, e2, e2, e1) == pytest.approx(1 + 3 * C**2, abs=1e-12)


def test_geodesic_examples():
    z = normalize([1, 0, 0])
    v = horizontal(z, [0, 1, 0])
    assert geodesic_exp(z, v, 0.0).same_point(z)
    assert geodesic_exp(z, v, np.pi / 2).same_point(normalize([0, 1, 0]))


@settings(max_examples=30)
@given(seeds, st.floats(-3, 3))
def test_geodesic_distance_function(seed, t):
    rng = np.random.default_rng(seed)
    z = rand_point(rng)
    v = rand_tangent(rng, z)
    v = horizontal(z, v.vec / v.norm)
    f = dist_field(z, geodesic_exp(z, v, t)).value
    assert f == pytest.approx(np.cos(t) ** 2, abs=1e-12)


def test_dist_field_examples():
    a = normalize([1, 0, 0])
    d = dist_field(a, a)
    assert d.value == pytest.approx(1.0)
    assert d.gradient.norm == pytest.approx(0.0, abs=1e-15)
    assert dist_field(a, normalize([0, 1, 0])).value == pytest.approx(0.0)
    d = dist_field(a, normalize([1, 1, 0]))
    assert d.value == pytest.approx(0.5)
    assert d.gradient.norm**2 == pytest.approx(1.0)


@settings(max_examples=50)
@given(seeds)
def test_dist_field_gradient_and_hessian(seed):
    rng = np.random.default_rng(seed)
    a, z = rand_point(rng), rand_point(rng)
    d = dist_field(a, z)
    assert d.gradient.norm**2 == pytest.approx(4 * d.value * (1 - d.value), abs=1e-10)
    assert np.allclose(d.hessian, d.hessian.T, atol=1e-12)
    u, v = rand_tangent(rng, z), rand_tangent(rng, z)
    lhs, rhs = d.cross_term(u, v)
    assert lhs == pytest.approx(rhs, abs=1e-10)


@settings(max_examples=20)
@given(seeds)
def test_dist_field_hessian_matches_second_difference(seed):
    rng = np.random.default_rng(seed)
    a, z = rand_point(rng), rand_point(rng)
    v = rand_tangent(rng, z)
    v = horizontal(z, v.vec / v.norm)
    h = 1e-4
    f = [dist_field(a, geodesic_exp(z, v, s)).value for s in (-h, 0.0, h)]
    fd = (f[0] - 2 * f[1] + f[2]) / h**2
    assert fd == pytest.approx(dist_field(a, z).hessian_form(v, v), abs=1e-6)
