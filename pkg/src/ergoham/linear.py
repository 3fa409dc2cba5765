"""Linear route for the quadratic Hamiltonian.

After the Hopf-Cole substitution ``u = exp(-phi)`` the cell problem with
``H(p) = |p|^2`` and ``eps == mu`` becomes the linear periodic-parabolic
eigenproblem

    tau du/dt - mu Lap u + <A, grad u> = (m + lam) u,   u(T) = u(0), u > 0.

The principal eigenvalue is read off the spectral radius ``rho`` of the
period map of ``tau v' = mu Lap v - <A, grad v> + m v``:
``lam = -(tau / T) log(rho)``.
"""

from __future__ import annotations

import logging

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .grid import (SpaceTimeField, StageSource, TimeGrid, TorusGrid, derivative_symbols,
                   fft_space, grad_array, ifft_space, lap_array, laplacian_symbol)
from .params import DomainError, EigenResult, NonConvergenceError, OperatorParams, SolverError
from .stepping import ETDRK4, substeps_for

log = logging.getLogger(__name__)

# potential step bound: dt * max|m| / tau <= THETA
THETA = 0.02
# floor on substeps per time interval for time-dependent m
MIN_SUBSTEPS = 4
# nodes below this fraction of max(u) are ignored by the ratio test
_RATIO_FLOOR = 1e-6


def _linear_symbol(space: TorusGrid, params: OperatorParams) -> np.ndarray:
    L = params.mu * laplacian_symbol(space, params.method)
    vec = params.advection_vector(space.dim)
    if vec is not None:
        syms = derivative_symbols(space, params.method)
        L = L - sum(vec[i] * syms[i] for i in range(space.dim))
    return L / params.tau


def check_linear_params(params: OperatorParams):
    if not np.isclose(params.eps, params.mu, rtol=1e-13, atol=0.0):
        raise ValueError(
            f"the linear route needs eps == mu (got eps={params.eps}, mu={params.mu}); "
            "use cell.effective_hamiltonian for other weights")


class _PeriodMap:
    """Integrates ``tau v' = mu Lap v - <A, grad v> + m v`` over one period."""

    def __init__(self, m: SpaceTimeField, params: OperatorParams, theta: float = THETA,
                 min_substeps: int = 1):
        self.space = m.space
        self.time = m.time
        self.params = params
        mv = m.values if params.direction == "forward" else m.time_reversed().values
        # the space-time mean of m is integrated exactly in the linear part
        mbar = float(np.mean(mv))
        mv = mv - mbar
        interval = m.time.dt
        limit = theta * params.tau / max(np.max(np.abs(mv)), 1e-300)
        self.n_sub = substeps_for(limit, interval, at_least=min_substeps)
        h = interval / self.n_sub
        self.stepper = ETDRK4(_linear_symbol(m.space, params) + mbar / params.tau, h)
        # potential pre-divided by tau, tabulated at the stage times
        self.m_of_t = StageSource(mv / params.tau, m.time.period, h)
        adv = params.advection_array(m.space.dim)
        self.adv = None if adv is None else adv / params.tau

    def _nonlinear(self, v_hat, t):
        v = ifft_space(v_hat, self.space)
        out = self.m_of_t(t) * v
        if self.adv is not None:
            g = grad_array(v, self.space, self.params.method)
            out = out - np.sum(self.adv * g, axis=0)
        return fft_space(out, self.space)

    def run(self, u: np.ndarray, record: bool = False):
        """Return ``(u_end, log_scale, snapshots)``.

        ``u_end * exp(log_scale)`` is the image of ``u``.
        """
        v_hat = fft_space(u, self.space)
        log_scale = 0.0
        snaps = [] if record else None
        t = 0.0
        h = self.stepper.h
        for k in range(self.time.n_steps):
            if record:
                snaps.append((ifft_space(v_hat, self.space), log_scale))
            for _ in range(self.n_sub):
                v_hat = self.stepper.step(v_hat, t, self._nonlinear)
                t += h
            s = np.max(np.abs(ifft_space(v_hat, self.space)))
            if not np.isfinite(s) or s == 0.0:
                raise SolverError("period map produced a non-finite or vanishing iterate")
            v_hat = v_hat / s
            log_scale += np.log(s)
        return ifft_space(v_hat, self.space), log_scale, snaps


def _ratio_stats(u_new, u_old, log_scale):
    mask = u_old > _RATIO_FLOOR * np.max(u_old)
    ratio = u_new[mask] / u_old[mask]
    if np.any(ratio <= 0):
        return np.inf, np.nan
    spread = float(np.max(ratio) / np.min(ratio))
    # geometric midpoint of the ratio bounds (exact once they coincide)
    log_rho = log_scale + 0.5 * (np.log(np.max(ratio)) + np.log(np.min(ratio)))
    return spread, log_rho


def parabolic_principal_eig(m: SpaceTimeField, params: OperatorParams, *, tol: float = 1e-10,
                            max_iters: int = 2000, theta: float = THETA,
                            min_substeps: int | None = None) -> EigenResult:
    """Principal periodic eigenpair of ``tau d/dt - mu Lap + <A, grad> - m``.

    Power iteration on the period map with a pointwise-ratio stopping rule:
    stop once ``max(u_new/u) / min(u_new/u) <= 1 + tol``.  The eigenfunction is
    positive with unit space-time quadratic mean.  ``direction="backward"``
    solves ``-tau d/dt - mu Lap - m`` by running the time-reversed potential.
    """
    check_linear_params(params)
    original = m
    if min_substeps is None:
        min_substeps = 1 if m.is_static() else MIN_SUBSTEPS
    if m.time.static:
        m = SpaceTimeField.static(m.values[0], m.space, TimeGrid(m.time.period, 8))
    pmap = _PeriodMap(m, params, theta=theta, min_substeps=min_substeps)
    u = np.ones(m.space.shape)
    history = []
    spread = np.inf
    log_rho = np.nan
    for it in range(1, max_iters + 1):
        u_new, log_scale, _ = pmap.run(u)
        spread, log_rho = _ratio_stats(u_new, u, log_scale)
        history.append(spread - 1.0)
        u = u_new / np.max(np.abs(u_new))
        if spread <= 1.0 + tol:
            break
    else:
        raise NonConvergenceError(
            f"power iteration did not converge in {max_iters} periods "
            f"(final Rayleigh-quotient spread {spread - 1.0:.3e})", history)

    T = m.time.period
    lam = -(params.tau / T) * log_rho
    # one more period to record the eigenfunction at the grid times
    _, _, snaps = pmap.run(u, record=True)
    rows = []
    for k, (v, ls) in enumerate(snaps):
        # undo the per-interval normalization and the eigen-growth
        t_k = k * m.time.dt
        rows.append(v * np.exp(ls + lam * t_k / params.tau))
    values = np.array(rows)
    if params.direction == "backward":
        values = np.roll(values[::-1], 1, axis=0)
    values /= np.sqrt(np.mean(values**2))
    field = SpaceTimeField(values, m.space, m.time)
    res = linear_residual(field, lam, m, params)
    if original.time.static:
        field = SpaceTimeField(values[:1], m.space, original.time)
    diag = {"substeps": pmap.n_sub, "spread": spread - 1.0, "history": history,
            "min_u": float(values.min()), "route": "linear"}
    return EigenResult(lam, field, "u", res, it, diag)


def linear_residual(u: SpaceTimeField, lam: float, m: SpaceTimeField,
                    params: OperatorParams) -> float:
    """Sup-norm of ``s tau u_t - mu Lap u + <A, grad u> - (m + lam) u``, relative to ``max|u|``.

    ``s = +1`` forward, ``-1`` backward.  Time derivative is spectral.
    """
    from .grid import dt_array
    space = u.space
    s = 1.0 if params.direction == "forward" else -1.0
    r = (s * params.tau * dt_array(u.values, u.time.period)
         - params.mu * lap_array(u.values, space, params.method)
         - (m.values + lam) * u.values)
    vec = params.advection_vector(space.dim)
    adv = params.advection_array(space.dim)
    if vec is not None or adv is not None:
        g = grad_array(u.values, space, params.method)
        a = vec.reshape((space.dim,) + (1,) * (1 + space.dim)) if vec is not None else adv[:, None]
        r = r + np.sum(a * g, axis=0)
    return float(np.max(np.abs(r)) / np.max(np.abs(u.values)))


# ---------------------------------------------------------------------------
# elliptic problem

def _static_values(m_static, space: TorusGrid | None):
    if isinstance(m_static, SpaceTimeField):
        if not m_static.is_static(1e-14 * max(1.0, m_static.sup_norm())):
            raise ValueError("elliptic_xi needs a time-independent potential")
        return np.array(m_static.values[0]), m_static.space
    if space is None:
        raise ValueError("pass the TorusGrid along with a plain array")
    values = np.asarray(m_static, dtype=float)
    if values.shape != space.shape:
        raise ValueError(f"potential has shape {values.shape}, grid is {space.shape}")
    return values, space


_DENSE_LIMIT = 1024


def _symmetric_smallest(apply, size: int, tol: float):
    if size <= _DENSE_LIMIT:
        mat = np.empty((size, size))
        eye = np.eye(size)
        for j in range(size):
            mat[:, j] = apply(eye[j])
        mat = 0.5 * (mat + mat.T)
        w, v = scipy.linalg.eigh(mat, subset_by_index=[0, 0])
        return float(w[0]), v[:, 0]
    op = spla.LinearOperator((size, size), matvec=apply, dtype=float)
    w, v = spla.eigsh(op, k=1, which="SA", tol=tol * 1e-2, maxiter=20 * size)
    return float(w[0]), v[:, 0]


def elliptic_xi(m_static, space: TorusGrid | None = None, *, mu: float = 1.0, H=None,
                eps: float | None = None, advection=None, tol: float = 1e-10) -> EigenResult:
    """First elliptic eigenvalue of ``-mu Lap + eps H(grad .) + <A, grad .> + m``.

    For the isotropic quadratic Hamiltonian without advection this is the
    smallest eigenvalue of the symmetric operator ``-mu Lap - (eps/mu) m``
    rescaled by ``mu/eps``.  Anything else is delegated to the relaxation
    solver on a degenerate time grid.
    """
    from .hamiltonians import Hamiltonian, quadratic
    values, space = _static_values(m_static, space)
    H = quadratic() if H is None else H
    eps = mu if eps is None else eps
    weight = eps * H.scale if isinstance(H, Hamiltonian) else eps
    if not (isinstance(H, Hamiltonian) and H.is_isotropic_quadratic() and advection is None
            and weight > 0):
        from .cell import effective_hamiltonian
        m_field = SpaceTimeField.static(values, space, TimeGrid.degenerate())
        params = OperatorParams(tau=1.0, mu=mu, eps=eps, advection=advection)
        return effective_hamiltonian(m_field, H, params)

    ratio = weight / mu
    pot = ratio * values
    size = values.size

    def apply(v):
        v = v.reshape(space.shape)
        return (-mu * lap_array(v, space) - pot * v).ravel()

    w, vec = _symmetric_smallest(apply, size, tol)
    vec = vec.reshape(space.shape)
    vec = vec * np.sign(np.sum(vec))
    lam = w / ratio
    time = TimeGrid.degenerate()
    if np.min(vec) > 0:
        phi = -np.log(vec) / ratio
        phi -= phi.mean()
        field = SpaceTimeField(phi[None], space, time)
        form = "phi"
    else:
        field = SpaceTimeField((vec / np.sqrt(np.mean(vec**2)))[None], space, time)
        form = "u"
    resid = float(np.max(np.abs(apply(vec.ravel()) - w * vec.ravel())) / np.max(np.abs(vec)))
    return EigenResult(lam, field, form, resid, 1, {"route": "elliptic-linear"})


# ---------------------------------------------------------------------------
# Hopf-Cole

def hopf_cole(u: SpaceTimeField, weight: float = 1.0) -> SpaceTimeField:
    """``phi = -log(u) / weight`` recentred to zero space-time mean."""
    if np.any(u.values <= 0):
        raise DomainError("Hopf-Cole needs a strictly positive field")
    phi = -np.log(u.values) / weight
    return u.with_values(phi - phi.mean())


def inverse_hopf_cole(phi: SpaceTimeField, weight: float = 1.0) -> SpaceTimeField:
    """``u = exp(-weight * phi)`` with unit space-time quadratic mean."""
    a = -weight * phi.values
    u = np.exp(a - a.max())
    return phi.with_values(u / np.sqrt(np.mean(u**2)))


def hj_form(result: EigenResult, weight: float = 1.0) -> EigenResult:
    """Convert a linear eigenpair to the corrector form ``phi``."""
    if result.form == "phi":
        return result
    phi = hopf_cole(result.field, weight)
    return EigenResult(result.lam, phi, "phi", result.residual, result.iterations,
                       dict(result.diagnostics))
