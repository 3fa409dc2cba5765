import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from ergoham.grid import SpaceTimeField, SpaceVectorField, TimeGrid, TorusGrid
from ergoham.hamiltonians import power_law, quadratic
from ergoham.measure import hj_measure
from ergoham.params import OperatorParams
from ergoham.potentials import random_smooth
from ergoham.solve import solve
from ergoham.variational import (control_value, dv_gap, dv_value, optimal_control,
                                 running_cost)

TWO_PI = 2 * np.pi
SPACE, TIME = TorusGrid(1, 32), TimeGrid(1.0, 32)
PARAMS = OperatorParams(1.0, 1.0, 1.0)


def _setup(H):
    m = random_smooth(SPACE, TIME, seed=21, amplitude=1.5)
    eig = solve(m, H, PARAMS, tol=1e-12)
    return m, eig, hj_measure(eig, H, PARAMS, tol=1e-13)


_QUAD = _setup(quadratic())
_QUART = _setup(power_law(4))


def _perturbation(a, k, w):
    return SpaceTimeField.from_function(
        lambda t, x: a * np.sin(TWO_PI * (k * x + w * t) + 0.3), SPACE, TIME)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(a=st.floats(-0.5, 0.5), k=st.integers(1, 4), w=st.integers(-2, 2))
def test_quadratic_gap_equals_remainder(a, k, w):
    m, eig, eta = _QUAD
    phi = eig.field + _perturbation(a, k, w)
    rep = dv_gap(phi, eig, eta, m, quadratic(), PARAMS)
    assert rep.gap >= -1e-8
    # the linear term vanishes up to the time-discretization error of eta (4th order)
    assert rep.gap == pytest.approx(rep.quadratic_form, rel=1e-7, abs=5e-8)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(a=st.floats(-0.5, 0.5), k=st.integers(1, 4), w=st.integers(-2, 2))
def test_quartic_gap_nonnegative(a, k, w):
    m, eig, eta = _QUART
    phi = eig.field + _perturbation(a, k, w)
    rep = dv_gap(phi, eig, eta, m, power_law(4), PARAMS)
    assert rep.gap >= -1e-7
    assert rep.quadratic_form is None


def test_gap_scales_quadratically():
    m, eig, eta = _QUAD
    w = _perturbation(1.0, 2, 1)
    ratios = [dv_gap(eig.field + w * d, eig, eta, m, quadratic(), PARAMS).gap / d**2
              for d in (1e-2, 5e-3, 2.5e-3)]
    assert np.ptp(ratios) <= 0.05 * abs(ratios[0])


def test_value_at_corrector_is_minus_lambda():
    for m, eig, eta in (_QUAD, _QUART):
        H = quadratic() if eig is _QUAD[1] else power_law(4)
        assert dv_value(eig.field, eta, m, H, PARAMS) == pytest.approx(-eig.lam, abs=1e-7)


def test_running_cost_quadratic():
    alpha = np.array([[0.0, 1.0, -2.0]])
    # H = |p|^2 has L(a) = |a|^2 / 4
    assert np.allclose(running_cost(alpha, quadratic(), 0.5), alpha[0] ** 2 / 2.0)
    assert np.all(np.isinf(running_cost(alpha, quadratic(), 0.0)))
    assert np.all(running_cost(np.zeros((1, 3)), quadratic(), 0.0) == 0.0)


def test_control_value_maximized_at_optimal_control():
    m, eig, _ = _QUART
    H = power_law(4)
    best = optimal_control(eig, H, PARAMS)
    J = control_value(best, m, H, PARAMS)
    assert J == pytest.approx(-eig.lam, abs=1e-6)
    rng = np.random.default_rng(7)
    for _ in range(4):
        bump = 0.3 * rng.standard_normal() * np.cos(TWO_PI * SPACE.coords()[0] + rng.uniform(0, 6))
        alpha = SpaceVectorField(best.values + bump[None, None], SPACE, TIME)
        assert control_value(alpha, m, H, PARAMS) <= -eig.lam + 1e-8


def test_zero_control_value_is_mean_potential():
    m, eig, _ = _QUAD
    zero = SpaceVectorField(np.zeros((1,) + m.values.shape), SPACE, TIME)
    J, eta = control_value(zero, m, quadratic(), PARAMS, return_measure=True)
    assert J == pytest.approx(float(np.mean(m.values)), abs=1e-12)
    assert J <= -eig.lam


def test_shape_mismatch_rejected():
    m, eig, eta = _QUAD
    other = SpaceTimeField(np.zeros((32, 16)), TorusGrid(1, 16), TIME)
    with pytest.raises(ValueError):
        dv_value(other, eta, m, quadratic(), PARAMS)
