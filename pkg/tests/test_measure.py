import numpy as np
import pytest

from ergoham.grid import SpaceTimeField, SpaceVectorField, TimeGrid, TorusGrid, grad_array
from ergoham.hamiltonians import power_law, quadratic
from ergoham.linear import parabolic_principal_eig
from ergoham.measure import (hj_drift, hj_measure, invariant_for_drift, product_measure,
                             weak_residual)
from ergoham.params import OperatorParams
from ergoham.potentials import random_smooth
from ergoham.solve import solve

TWO_PI = 2 * np.pi


def _test_function(space, time, k=1, w=1):
    return SpaceTimeField.from_function(
        lambda t, x: np.cos(TWO_PI * (k * x - w * t / time.period)) + np.sin(TWO_PI * x) ** 2,
        space, time)


@pytest.mark.parametrize("mu", [0.5, 1.0])
def test_gradient_drift_gives_gibbs_density(mu):
    # drift b = mu V' balances diffusion: eta is proportional to exp(-V)
    space, time = TorusGrid(1, 64), TimeGrid(2.0, 8)
    x = space.coords()[0]
    V = 0.7 * np.cos(TWO_PI * x) + 0.2 * np.sin(2 * TWO_PI * x)
    dV = -0.7 * TWO_PI * np.sin(TWO_PI * x) + 0.4 * TWO_PI * np.cos(2 * TWO_PI * x)
    b = np.broadcast_to(mu * dV, (1, 8, 64)).copy()
    eta = invariant_for_drift(b, OperatorParams(mu=mu), space, time, tol=1e-13)
    gibbs = np.exp(-V) / (np.mean(np.exp(-V)) * time.period)
    assert np.max(np.abs(eta.values - gibbs[None])) < 1e-9
    assert np.allclose(eta.per_slice_mass, 1.0 / time.period, atol=1e-12)
    assert eta.total_mass() == pytest.approx(1.0, abs=1e-12)


def test_constant_drift_gives_uniform_density():
    space, time = TorusGrid(2, 16), TimeGrid(1.0, 8)
    eta = invariant_for_drift(np.array([0.3, -1.1]), OperatorParams(), space, time)
    assert np.allclose(eta.values, 1.0, atol=1e-12)


def test_hj_measure_matches_eigenfunction_product():
    space, time = TorusGrid(1, 32), TimeGrid(1.0, 32)
    m = random_smooth(space, time, seed=3, amplitude=1.5)
    p = OperatorParams(1.0, 1.0, 1.0)
    eig = solve(m, quadratic(), p)
    eta = hj_measure(eig, quadratic(), p)
    uf = parabolic_principal_eig(m, p, tol=1e-12)
    ub = parabolic_principal_eig(m, p.with_(direction="backward"), tol=1e-12)
    oracle = product_measure(uf.field, ub.field)
    assert np.max(np.abs(eta.values - oracle.values)) < 1e-6


@pytest.mark.parametrize("direction", ["forward", "backward"])
def test_measure_invariants(direction):
    space, time = TorusGrid(1, 32), TimeGrid(1.0, 16)
    m = random_smooth(space, time, seed=9, amplitude=2.0)
    H = power_law(3)
    p = OperatorParams(tau=0.8, mu=1.0, eps=1.0, direction=direction)
    eig = solve(m, H, p, tol=1e-11)
    eta = hj_measure(eig, H, p)
    b = hj_drift(eig, H, p)
    assert eta.values.min() >= 0.0
    assert np.allclose(eta.per_slice_mass, 1.0, atol=1e-10)
    for k, w in [(1, 1), (2, -1), (3, 2)]:
        f = _test_function(space, time, k, w)
        assert abs(weak_residual(eta, f, b, p)) < 1e-6


def test_duality_identity():
    # int m d eta + lam + eps int (H - <grad_p H, p>) d eta = 0 at the corrector
    space, time = TorusGrid(1, 32), TimeGrid(1.0, 16)
    m = random_smooth(space, time, seed=12, amplitude=1.0)
    H = power_law(4)
    p = OperatorParams(1.0, 1.0, 0.5)
    eig = solve(m, H, p, tol=1e-11)
    eta = hj_measure(eig, H, p)
    g = grad_array(eig.field.values, space)
    extra = H.eval(g) - np.sum(H.grad(g) * g, axis=0)
    assert abs(eta.integrate(m) + eig.lam + p.eps * eta.integrate(extra)) < 1e-6


def test_product_measure_rejects_negative():
    space, time = TorusGrid(1, 8), TimeGrid(1.0, 8)
    u = SpaceTimeField(np.ones((8, 8)), space, time)
    v = SpaceTimeField(-np.ones((8, 8)), space, time)
    with pytest.raises(ValueError):
        product_measure(u, v)


def test_drift_needs_grids():
    with pytest.raises(ValueError):
        invariant_for_drift(np.array([1.0]), OperatorParams())


def test_vector_field_drift_accepted():
    space, time = TorusGrid(1, 16), TimeGrid(1.0, 8)
    b = SpaceVectorField(np.zeros((1, 8, 16)), space, time)
    eta = invariant_for_drift(b, OperatorParams())
    assert np.allclose(eta.values, 1.0)
