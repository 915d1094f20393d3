import numpy as np
import pytest

from cp2willmore.errors import ConfigError
from cp2willmore.optimize import DEFAULT_STARTS, minimise_flat_torus, torus_wminus, u_from_weights, weights_from_u

W_MIN = 8 * np.pi**2 / (3 * np.sqrt(3))


def test_parametrisation_round_trip():
    for w in DEFAULT_STARTS:
        assert weights_from_u(u_from_weights(w)) == pytest.approx(np.array(w) / sum(w))


@pytest.mark.parametrize("w", [(1, 0, 0), (0.5, 0.5), (-1, 1, 1)])
def test_bad_start(w):
    with pytest.raises(ConfigError):
        u_from_weights(w)


def test_objective_closed_form():
    # W- = 4 pi^2 r1 r2 r3 (2 + |H|^2), |H|^2 = (sum 1/r_i^2 - 9) / 4
    w = np.array([0.5, 0.3, 0.2])
    r = np.sqrt(w)
    assert torus_wminus(w) == pytest.approx(4 * np.pi**2 * np.prod(r) * (2 + (np.sum(1 / w) - 9) / 4), rel=1e-12)


@pytest.mark.parametrize("start", DEFAULT_STARTS)
def test_converges_to_clifford(start):
    res = minimise_flat_torus(start)
    assert res.converged
    assert res.weights == pytest.approx([1 / 3] * 3, abs=1e-6)
    assert res.value == pytest.approx(W_MIN, rel=1e-10)
    assert res.start_value > res.value
    assert res.trace and res.trace[-1]["Wminus"] <= res.trace[0]["Wminus"]


def test_iteration_cap_reported():
    res = minimise_flat_torus(DEFAULT_STARTS[1], maxiter=5)
    assert not res.converged
    assert res.as_dict()["iterations"] <= 5


def test_bad_options():
    with pytest.raises(ConfigError):
        minimise_flat_torus(maxiter=0)
    with pytest.raises(ConfigError):
        minimise_flat_torus(simplex_size=0.0)
