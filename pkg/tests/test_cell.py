import numpy as np
import pytest
from ergoham.cell import effective_hamiltonian, residual, static_problem
from ergoham.grid import SpaceTimeField, TimeGrid, TorusGrid
from ergoham.hamiltonians import power_law, quadratic
from ergoham.linear import elliptic_xi, parabolic_principal_eig
from ergoham.params import NonConvergenceError, OperatorParams
from ergoham.potentials import random_smooth
from ergoham.solve import solve

TWO_PI = 2 * np.pi


def _fd_static_oracle(m_func, n, mu, eps, r):
    """Newton solve of lam - mu phi'' + eps |phi'|^r + m = 0, mean phi = 0, on a fine FD grid."""
    x = np.arange(n) / n
    h = 1.0 / n
    mv = m_func(x)
    eye = np.eye(n)
    D1 = (np.roll(eye, 1, axis=1) - np.roll(eye, -1, axis=1)) / (2 * h)
    D2 = (np.roll(eye, 1, axis=1) - 2 * eye + np.roll(eye, -1, axis=1)) / h**2
    z = np.append(np.zeros(n), -mv.mean())
    for _ in range(50):
        phi, lam = z[:-1], z[-1]
        d1 = D1 @ phi
        F = np.append(lam - mu * D2 @ phi + eps * np.abs(d1) ** r + mv, phi.mean())
        J = np.zeros((n + 1, n + 1))
        J[:n, :n] = -mu * D2 + eps * r * (np.abs(d1) ** (r - 2) * d1)[:, None] * D1
        J[:n, n] = 1.0
        J[n, :n] = 1.0 / n
        z = z - np.linalg.solve(J, F)
        if np.max(np.abs(F)) < 1e-12:
            break
    assert np.max(np.abs(F)) < 1e-10
    return z[-1]


def test_relaxation_matches_linear_route_quadratic():
    space, time = TorusGrid(1, 32), TimeGrid(1.0, 32)
    m = random_smooth(space, time, seed=5, amplitude=1.5)
    params = OperatorParams(tau=0.7, mu=0.8, eps=1.2)
    H = quadratic()
    relax = effective_hamiltonian(m, H, params, tol=1e-11)
    lin = solve(m, H, params, route="linear", tol=1e-12)
    assert relax.lam == pytest.approx(lin.lam, abs=1e-7)
    assert relax.residual < 1e-5
    assert np.max(np.abs(relax.field.values - lin.field.values)) < 1e-5


def test_static_relaxation_matches_elliptic():
    space = TorusGrid(1, 64)
    m0 = np.cos(TWO_PI * space.coords()[0]) + 0.3 * np.sin(2 * TWO_PI * space.coords()[0])
    m = static_problem(m0, space)
    params = OperatorParams(tau=1.0, mu=0.5, eps=1.0)
    relax = effective_hamiltonian(m, quadratic(), params, tol=1e-12)
    ell = elliptic_xi(m0, space, mu=0.5, H=quadratic(), eps=1.0)
    assert relax.lam == pytest.approx(ell.lam, abs=1e-9)


def test_static_quartic_matches_fd_newton():
    def m_func(x):
        return 0.8 * np.cos(TWO_PI * x) + 0.3 * np.sin(2 * TWO_PI * x)

    mu, eps = 0.6, 0.5
    space = TorusGrid(1, 64)
    m = static_problem(m_func(space.coords()[0]), space)
    res = effective_hamiltonian(m, power_law(4), OperatorParams(tau=1.0, mu=mu, eps=eps),
                                tol=1e-12)
    ref = _fd_static_oracle(m_func, 512, mu, eps, 4)
    # second-order FD error at h = 1/512
    assert res.lam == pytest.approx(ref, abs=1e-4)
    assert res.residual < 1e-7


def test_refinement_changes_little():
    H = power_law(4)
    params = OperatorParams(tau=1.0, mu=1.0, eps=0.5)
    fine = random_smooth(TorusGrid(1, 64), TimeGrid(1.0, 64), seed=2, amplitude=1.0)
    # the same trigonometric polynomial sampled on the coarse grid
    coarse = SpaceTimeField(fine.values[::2, ::2], TorusGrid(1, 32), TimeGrid(1.0, 32))
    lams = [effective_hamiltonian(m, H, params, tol=1e-11).lam for m in (coarse, fine)]
    assert abs(lams[0] - lams[1]) < 1e-6


def test_initial_data_do_not_matter(rng):
    space, time = TorusGrid(1, 32), TimeGrid(1.0, 16)
    m = random_smooth(space, time, seed=8, amplitude=1.0)
    H = power_law(3)
    params = OperatorParams(tau=1.0, mu=1.0, eps=1.0)
    a = effective_hamiltonian(m, H, params, tol=1e-11)
    psi0 = 0.5 * np.sin(TWO_PI * space.coords()[0]) + 0.1 * rng.standard_normal(32)
    b = effective_hamiltonian(m, H, params, tol=1e-11, psi0=psi0)
    assert a.lam == pytest.approx(b.lam, abs=1e-7)
    assert np.max(np.abs(a.field.values - b.field.values)) < 1e-6


def test_backward_relaxation_matches_linear():
    space, time = TorusGrid(1, 32), TimeGrid(1.0, 32)
    m = random_smooth(space, time, seed=11, amplitude=1.0)
    params = OperatorParams(tau=1.3, mu=1.0, eps=1.0, direction="backward")
    relax = effective_hamiltonian(m, quadratic(), params, tol=1e-11)
    lin = solve(m, quadratic(), params, route="linear", tol=1e-12)
    assert relax.lam == pytest.approx(lin.lam, abs=1e-7)
    assert residual(relax, m, quadratic(), params) < 1e-5


def test_constant_potential_exact():
    space, time = TorusGrid(2, 16), TimeGrid(1.0, 8)
    m = SpaceTimeField(np.full((8, 16, 16), 0.75), space, time)
    res = effective_hamiltonian(m, power_law(4), OperatorParams(tau=2.0, mu=0.3, eps=1.0))
    assert res.lam == pytest.approx(-0.75, abs=1e-12)


def test_lambda_within_time_average_bounds():
    space, time = TorusGrid(1, 32), TimeGrid(1.0, 16)
    m = random_smooth(space, time, seed=4, amplitude=2.0)
    res = effective_hamiltonian(m, power_law(3), OperatorParams(tau=1.0, mu=1.0, eps=1.0))
    mbar = m.values.mean(axis=0)
    # -max_x <m>_t <= lam <= -<m>
    assert -mbar.max() - 1e-9 <= res.lam <= -m.values.mean() + 1e-9


def test_upwind_small_viscosity():
    space = TorusGrid(1, 128)
    m0 = np.cos(TWO_PI * space.coords()[0])
    m = static_problem(m0, space)
    params = OperatorParams(tau=1.0, mu=0.01, eps=1.0)
    res = effective_hamiltonian(m, quadratic(), params, max_periods=4000)
    assert res.diagnostics["upwind"]
    ell = elliptic_xi(m0, space, mu=0.01, H=quadratic(), eps=1.0)
    # first-order upwinding at mu = 0.01: agreement to a few grid spacings
    assert res.lam == pytest.approx(ell.lam, abs=2e-2)
    assert -1.0 <= res.lam <= 0.0


def test_nonconvergence_raises():
    space, time = TorusGrid(1, 16), TimeGrid(1.0, 8)
    m = random_smooth(space, time, seed=1)
    with pytest.raises(NonConvergenceError):
        effective_hamiltonian(m, power_law(3), OperatorParams(), max_periods=1, tol=1e-14)


def test_linear_eigenvalue_sign_convention():
    # lam_H for quadratic H equals the parabolic eigenvalue when mu = eps
    space, time = TorusGrid(1, 32), TimeGrid(1.0, 16)
    m = random_smooth(space, time, seed=6)
    params = OperatorParams(tau=1.0, mu=1.0, eps=1.0)
    lin = parabolic_principal_eig(m, params, tol=1e-12)
    relax = effective_hamiltonian(m, quadratic(), params, tol=1e-11)
    assert relax.lam == pytest.approx(lin.lam, abs=1e-7)
