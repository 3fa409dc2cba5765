import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from hypothesis import given, settings, strategies as st
from scipy import special
from scipy.integrate import solve_ivp

from ergoham.grid import SpaceTimeField, TimeGrid, TorusGrid, time_average
from ergoham.hamiltonians import quadratic
from ergoham.linear import (elliptic_xi, hopf_cole, inverse_hopf_cole, linear_residual,
                            parabolic_principal_eig)
from ergoham.params import DomainError, OperatorParams
from ergoham.potentials import random_smooth

TWO_PI = 2 * np.pi


def _m_func(t, x, a=1.5):
    return a * (np.cos(TWO_PI * x) * np.cos(TWO_PI * t) + 0.5 * np.sin(TWO_PI * (2 * x - t)))


def _monodromy_lambda(n, tau, mu, direction="forward"):
    """Oracle: period map of tau u' = mu u'' + m u assembled column by column with DOP853."""
    x = np.arange(n) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    D2 = np.real(np.fft.ifft(-(TWO_PI * k[:, None]) ** 2 * np.fft.fft(np.eye(n), axis=0), axis=0))
    s = 1.0 if direction == "forward" else -1.0

    def rhs(t, u):
        # backward: -tau u_t = mu u'' + m u, run in reversed time t' = T - t
        tt = t if s > 0 else 1.0 - t
        return (mu * D2 @ u + _m_func(tt, x) * u) / tau

    M = np.empty((n, n))
    for j in range(n):
        sol = solve_ivp(rhs, (0.0, 1.0), np.eye(n)[j], method="DOP853", rtol=1e-12, atol=1e-14)
        M[:, j] = sol.y[:, -1]
    rho = np.max(np.abs(np.linalg.eigvals(M)))
    return -tau * np.log(rho)


@pytest.mark.parametrize("tau,mu", [(1.0, 1.0), (0.3, 0.5), (4.0, 0.2)])
def test_parabolic_matches_dense_monodromy(tau, mu):
    n, nt = 16, 16
    space, time = TorusGrid(1, n), TimeGrid(1.0, nt)
    m = SpaceTimeField.from_function(_m_func, space, time)
    ref = _monodromy_lambda(n, tau, mu)
    res = parabolic_principal_eig(m, OperatorParams(tau=tau, mu=mu, eps=mu), tol=1e-12)
    # default step bound: time-stepping error only
    assert res.lam == pytest.approx(ref, abs=1e-7)
    assert res.form == "u" and res.field.values.min() > 0
    # residual uses a spectral time derivative on only 16 time points
    assert res.residual < 1e-5
    fine = parabolic_principal_eig(m, OperatorParams(tau=tau, mu=mu, eps=mu), tol=1e-13,
                                   min_substeps=64)
    assert fine.lam == pytest.approx(ref, abs=1e-9)


def test_backward_matches_dense_monodromy():
    n, nt = 16, 16
    space, time = TorusGrid(1, n), TimeGrid(1.0, nt)
    m = SpaceTimeField.from_function(_m_func, space, time)
    p = OperatorParams(tau=0.7, mu=1.0, eps=1.0, direction="backward")
    res = parabolic_principal_eig(m, p, tol=1e-12)
    assert res.lam == pytest.approx(_monodromy_lambda(n, 0.7, 1.0, "backward"), abs=1e-8)
    assert linear_residual(res.field, res.lam, m, p) < 1e-6


@pytest.mark.parametrize("a", [0.5, 2.0, 8.0])
def test_elliptic_matches_mathieu(a):
    # -u'' - a cos(2 pi x) u = lam u  <=>  Mathieu with q = a / (2 pi^2), lam = pi^2 a_0(q)
    space = TorusGrid(1, 64)
    (x,) = space.coords()
    res = elliptic_xi(-a * np.cos(TWO_PI * x), space)
    # quadratic H, eps = mu = 1: lam_H = xi of the linear operator -Lap + m
    expect = np.pi**2 * special.mathieu_a(0, a / (2 * np.pi**2))
    assert res.lam == pytest.approx(expect, rel=1e-10, abs=1e-10)


def test_elliptic_matches_fine_finite_differences():
    space = TorusGrid(1, 32)
    (x,) = space.coords()
    m0 = np.cos(TWO_PI * x) + 0.3 * np.sin(3 * TWO_PI * x)
    lam = elliptic_xi(m0, space).lam
    n = 2048
    xf = np.arange(n) / n
    h = 1.0 / n
    lap = sp.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1]).tolil()
    lap[0, -1] = lap[-1, 0] = 1.0
    A = -lap.tocsr() / h**2 + sp.diags(np.cos(TWO_PI * xf) + 0.3 * np.sin(3 * TWO_PI * xf))
    w = spla.eigsh(A, k=1, sigma=-5.0, which="LM")[0][0]
    assert lam == pytest.approx(w, abs=1e-5)


def test_elliptic_2d_separable():
    space = TorusGrid(2, 16)
    x, y = space.coords()
    res = elliptic_xi(np.cos(TWO_PI * x) + np.cos(TWO_PI * y), space)
    one = elliptic_xi(np.cos(TWO_PI * space.coords()[0][:, 0]), TorusGrid(1, 16)).lam
    assert res.lam == pytest.approx(2 * one, abs=1e-10)


def test_constant_potential_exact():
    space, time = TorusGrid(1, 32), TimeGrid(1.0, 16)
    res = parabolic_principal_eig(SpaceTimeField.constant(2.0, space, time), OperatorParams())
    assert res.lam == pytest.approx(-2.0, abs=1e-12)


def test_static_potential_on_time_grid_equals_elliptic():
    space, time = TorusGrid(1, 32), TimeGrid(1.0, 16)
    (x,) = space.coords()
    m0 = np.cos(TWO_PI * x)
    res = parabolic_principal_eig(SpaceTimeField.static(m0, space, time), OperatorParams())
    assert res.lam == pytest.approx(elliptic_xi(m0, space).lam, abs=1e-9)


def test_hopf_cole_roundtrip(grid1, rng):
    space, time = grid1
    phi = SpaceTimeField(rng.standard_normal((time.n_steps,) + space.shape), space, time)
    phi = phi.with_values(phi.values - phi.values.mean())
    back = hopf_cole(inverse_hopf_cole(phi, 0.7), 0.7)
    np.testing.assert_allclose(back.values, phi.values, atol=1e-12)
    with pytest.raises(DomainError):
        hopf_cole(phi)


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 10_000), tau=st.floats(0.1, 10.0))
def test_basic_bounds_property(seed, tau):
    space, time = TorusGrid(1, 16), TimeGrid(1.0, 16)
    m = random_smooth(space, time, seed=seed, amplitude=2.0)
    lam = parabolic_principal_eig(m, OperatorParams(tau=tau)).lam
    upper = elliptic_xi(time_average(m), space, H=quadratic()).lam
    assert -m.sup_norm() - 1e-10 <= lam <= upper + 1e-9
