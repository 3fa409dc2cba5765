import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from ergoham.hamiltonians import (Hamiltonian, anisotropic, check_hypotheses, parse_hamiltonian,
                                  power_law, quadratic)

SHIPPED = [quadratic(), quadratic(0.5), power_law(4), power_law(3), power_law(1.5),
           anisotropic([1.0, 3.0])]


def _golden_legendre(H, alpha):
    """Independent oracle: 1D golden-section search along the direction of alpha."""
    a = np.asarray(alpha, dtype=float)
    norm = np.linalg.norm(a)
    if norm == 0:
        return 0.0
    e = a / norm
    res = optimize.minimize_scalar(lambda t: H.eval(t * e) - t * norm, bracket=(0.0, 1.0),
                                   method="golden", tol=1e-12)
    return -res.fun


@pytest.mark.parametrize("H", SHIPPED[:5], ids=lambda h: h.describe())
def test_legendre_closed_form_matches_golden_section(H, rng):
    for _ in range(10):
        a = rng.standard_normal(2) * rng.uniform(0.1, 5)
        assert H.legendre(a) == pytest.approx(_golden_legendre(H, a), rel=1e-7, abs=1e-10)


@pytest.mark.parametrize("H", SHIPPED, ids=lambda h: h.describe())
def test_legendre_numeric_matches_closed_form(H, rng):
    for _ in range(5):
        a = rng.standard_normal(2)
        assert H.legendre_numeric(a) == pytest.approx(H.legendre(a), rel=1e-6, abs=1e-10)


@pytest.mark.parametrize("H", SHIPPED, ids=lambda h: h.describe())
def test_gradient_and_hessian_by_differences(H, rng):
    p = rng.standard_normal((2, 6))
    g = H.grad(p)
    step = 1e-6
    for i in range(2):
        e = np.zeros((2, 1))
        e[i] = step
        fd = (H.eval(p + e) - H.eval(p - e)) / (2 * step)
        np.testing.assert_allclose(g[i], fd, rtol=1e-6, atol=1e-8)
    q = p[:, 0]
    hs = H.hess(q)
    for i in range(2):
        e = np.zeros(2)
        e[i] = step
        fd = (H.grad(q + e) - H.grad(q - e)) / (2 * step)
        np.testing.assert_allclose(hs[:, i], fd, rtol=1e-5, atol=1e-7)


@pytest.mark.parametrize("H", SHIPPED, ids=lambda h: h.describe())
def test_shipped_kinds_satisfy_hypotheses(H):
    rep = check_hypotheses(H, samples=10_000)
    assert rep.ok, rep.failures


def test_quadratic_half_passes():
    assert check_hypotheses(Hamiltonian("quadratic", beta=0.5)).ok


def test_power_law_inverse_exponent_passes():
    assert check_hypotheses(power_law(4, beta=0.25)).failures["scaling"] == 0


def test_scaling_clause_fails_when_beta_r_below_one():
    # a H(p) >= H(a^beta p) = a^(beta r) H(p) needs beta r >= 1
    rep = check_hypotheses(power_law(4, beta=0.2))
    assert rep.failures["scaling"] > 0
    assert check_hypotheses(power_law(4, beta=0.9)).failures["scaling"] == 0


def test_parse():
    assert parse_hamiltonian("quadratic").is_isotropic_quadratic()
    H = parse_hamiltonian("power:r=4,scale=2")
    assert H.r == 4 and H.scale == 2
    A = parse_hamiltonian("aniso:w=1,2")
    assert A.weights == (1.0, 2.0)
    for bad in ("cubic", "power", "power:q=3", "aniso:scale=1"):
        with pytest.raises(ValueError):
            parse_hamiltonian(bad)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        Hamiltonian("power", r=1.0)
    with pytest.raises(ValueError):
        Hamiltonian("quadratic", beta=1.5)


@settings(max_examples=50, deadline=None)
@given(r=st.floats(1.2, 6), a=st.floats(-3, 3), b=st.floats(-3, 3), lam=st.floats(0, 1))
def test_power_law_convex_and_fenchel(r, a, b, lam):
    H = power_law(r)
    p, q = np.array([a, 0.5]), np.array([b, -1.0])
    mid = lam * p + (1 - lam) * q
    assert H.eval(mid) <= lam * H.eval(p) + (1 - lam) * H.eval(q) + 1e-9
    # Fenchel-Young: <p, alpha> <= H(p) + L(alpha), equality at alpha = grad H(p)
    alpha = H.grad(p)
    assert p @ alpha == pytest.approx(H.eval(p) + H.legendre(alpha), rel=1e-9, abs=1e-9)
    assert p @ q <= H.eval(p) + H.legendre(q) + 1e-9
