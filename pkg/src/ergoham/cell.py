"""General route: the additive eigenproblem by long-time relaxation.

The cell problem

    lam + tau d_t phi - mu Lap phi + eps H(grad phi) + <A, grad phi> + m = 0

is solved by evolving ``tau psi_s = mu Lap psi - eps H(grad psi) - <A, grad psi> - m``
from ``psi = 0``.  After transients ``psi(s) ~ phi(s) + (lam / tau) s``, so the
per-period spatial mean increment ``c_k`` gives ``lam = tau c_k / T``.

Static problems (one time node) are relaxed in pseudo-time with the same
machinery; that is how the elliptic eigenvalue is obtained for general ``H``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .grid import (SpaceTimeField, StageSource, TimeGrid, dealias_mask, derivative_symbols,
                   dt_array, fft_space, grad_array, ifft_space, lap_array, laplacian_symbol)
from .hamiltonians import Hamiltonian
from .params import EigenResult, InstabilityError, NonConvergenceError, OperatorParams
from .stepping import ETDRK4, substeps_for

log = logging.getLogger(__name__)

CFL = 0.5
# potential step bound, as on the linear route
THETA = 0.02
UPWIND_BELOW_MU = 0.02
MAX_PERIODS = 2000
# pseudo-time steps per relaxation "period" of a static problem
_STATIC_INTERVALS = 8
# substeps per grid interval for time-dependent potentials; keeps the
# corrector's time-stepping error (not just lam's) near the drift tolerance
MIN_SUBSTEPS = 4
MAX_SUBSTEPS = 2**16


@dataclass
class RelaxationDiagnostics:
    periods_run: int = 0
    drift_history: list = field(default_factory=list)
    oscillation_history: list = field(default_factory=list)
    substeps: int = 1
    upwind: bool = False

    @property
    def oscillation(self) -> float:
        return self.oscillation_history[-1] if self.oscillation_history else np.inf

    def as_dict(self) -> dict:
        return {"periods_run": self.periods_run, "drift_history": list(self.drift_history),
                "oscillation": self.oscillation, "substeps": self.substeps,
                "upwind": self.upwind}


def default_tol(m: SpaceTimeField) -> float:
    return 1e-8 * (1.0 + m.sup_norm())


def _upwind_gradient(psi: np.ndarray, dim: int, h: float) -> np.ndarray:
    """Godunov-type gradient for convex ``H`` minimal at the origin.

    Per axis the one-sided differences are combined as
    ``max(D-, 0)`` or ``min(D+, 0)``, whichever has the larger magnitude.
    """
    out = []
    for ax in range(-dim, 0):
        dm = (psi - np.roll(psi, 1, axis=ax)) / h
        dp = (np.roll(psi, -1, axis=ax) - psi) / h
        a = np.maximum(dm, 0.0)
        b = np.minimum(dp, 0.0)
        out.append(np.where(a >= -b, a, b))
    return np.stack(out)


class _Relaxation:
    """Period map of the viscous Hamilton-Jacobi flow (forward in ``s``)."""

    def __init__(self, m_values: np.ndarray, space, period: float, H: Hamiltonian,
                 params: OperatorParams, n_intervals: int, upwind: bool, theta: float,
                 min_substeps: int):
        self.space = space
        self.H = H
        self.params = params
        self.period = period
        self.n_intervals = n_intervals
        self.upwind = upwind
        self.method = "fd" if upwind else params.method
        self.m_values = m_values
        self.interval = period / n_intervals
        tau = params.tau
        L = params.mu * laplacian_symbol(space, self.method)
        vec = params.advection_vector(space.dim)
        self.syms = derivative_symbols(space, self.method)
        if vec is not None:
            L = L - sum(vec[i] * self.syms[i] for i in range(space.dim))
        self.symbol = L / tau
        adv = params.advection_array(space.dim)
        self.adv = None if adv is None else adv / tau
        self.mask = None if upwind else dealias_mask(space)
        self.coef = params.eps / tau
        mmax = float(np.max(np.abs(m_values)))
        limit = theta * tau / mmax if (mmax > 0 and m_values.shape[0] > 1) else np.inf
        self.n_sub = substeps_for(limit, self.interval, at_least=min_substeps)
        self._build()

    def _build(self):
        h = self.interval / self.n_sub
        self.stepper = ETDRK4(self.symbol, h)
        self.source = StageSource(self.m_values / self.params.tau, self.period, h)

    def refine(self):
        self.n_sub *= 2
        self._build()

    def gradient(self, psi_hat: np.ndarray, psi: np.ndarray | None = None) -> np.ndarray:
        if self.upwind:
            if psi is None:
                psi = ifft_space(psi_hat, self.space)
            return _upwind_gradient(psi, self.space.dim, self.space.h)
        return np.stack([ifft_space(s * psi_hat, self.space) for s in self.syms])

    def cfl_number(self, psi_hat: np.ndarray) -> float:
        """``eps dt max|grad_p H(grad psi)| / (tau h)`` plus the advective part."""
        g = self.gradient(psi_hat)
        speed = self.params.eps * self.H.max_speed(g) if self.params.eps > 0 else 0.0
        if self.adv is not None:
            speed += float(np.max(np.sqrt(np.sum((self.adv * self.params.tau) ** 2, axis=0))))
        return speed * self.stepper.h / (self.params.tau * self.space.h)

    def _nonlinear(self, psi_hat, t):
        psi = ifft_space(psi_hat, self.space) if self.upwind or self.adv is not None else None
        g = self.gradient(psi_hat, psi)
        out = self.source(t)
        if self.coef:
            out = out + self.coef * self.H.eval(g)
        if self.adv is not None:
            out = out + np.sum(self.adv * g, axis=0)
        out_hat = fft_space(out, self.space)
        if self.mask is not None:
            out_hat = out_hat * self.mask
        return -out_hat

    def run(self, psi_hat: np.ndarray, record: bool = False, cfl: float = CFL):
        """One period.  An interval that overflows or ends above ``cfl`` is redone
        with half the step; refinements persist for later periods."""
        snaps = [] if record else None
        t = 0.0
        for k in range(self.n_intervals):
            if record:
                snaps.append(ifft_space(psi_hat, self.space))
            start = psi_hat
            while True:
                h = self.stepper.h
                psi_hat = start
                with np.errstate(over="ignore", invalid="ignore"):
                    for j in range(self.n_sub):
                        psi_hat = self.stepper.step(psi_hat, t + j * h, self._nonlinear)
                ok = np.all(np.isfinite(psi_hat))
                if ok and self.cfl_number(psi_hat) <= cfl:
                    break
                if self.n_sub >= MAX_SUBSTEPS:
                    if ok:
                        break
                    raise InstabilityError(
                        f"relaxation blew up with {self.n_sub} substeps per interval; "
                        "try a smaller time step (larger min_substeps)")
                self.refine()
                log.debug("interval redone with %d substeps", self.n_sub)
            t = (k + 1) * self.interval
        return psi_hat, snaps


def effective_hamiltonian(m: SpaceTimeField, H: Hamiltonian, params: OperatorParams, *,
                          tol: float | None = None, max_periods: int = MAX_PERIODS,
                          psi0: np.ndarray | None = None, upwind: bool | None = None,
                          theta: float = THETA, cfl: float = CFL,
                          min_substeps: int | None = None) -> EigenResult:
    """Ergodic constant ``lam_H`` and corrector ``phi_H`` by long-time relaxation.

    ``direction="backward"`` solves ``lam - tau d_t phi - mu Lap phi + eps H + <A, grad> + m = 0``
    by running the time-reversed potential forward and reversing the result.
    The returned diagnostics include a :class:`RelaxationDiagnostics` under
    ``"relaxation"``.
    """
    space = m.space
    static = m.time.static
    tol = default_tol(m) if tol is None else tol
    if upwind is None:
        upwind = params.mu < UPWIND_BELOW_MU
    mv = m.values if params.direction == "forward" else m.time_reversed().values
    n_intervals = _STATIC_INTERVALS if static else m.time.n_steps
    if min_substeps is None:
        min_substeps = 1 if static or m.is_static() else MIN_SUBSTEPS
    relax = _Relaxation(mv, space, m.time.period, H, params, n_intervals, upwind, theta,
                        min_substeps)
    diag = RelaxationDiagnostics(upwind=upwind)

    psi = np.zeros(space.shape) if psi0 is None else np.array(psi0, dtype=float)
    psi_hat = fft_space(psi, space)
    while relax.cfl_number(psi_hat) > cfl:
        relax.refine()

    prev = ifft_space(psi_hat, space)
    c = 0.0
    converged = False
    for k in range(1, max_periods + 1):
        psi_hat, _ = relax.run(psi_hat, cfl=cfl)
        cur = ifft_space(psi_hat, space)
        inc = cur - prev
        c = float(np.mean(inc))
        osc = float(np.max(np.abs(inc - c)))
        diag.drift_history.append(c)
        diag.oscillation_history.append(osc)
        diag.periods_run = k
        # keep the iterate bounded; the drift is already recorded
        psi_hat = psi_hat - fft_space(np.full(space.shape, np.mean(cur)), space)
        prev = cur - np.mean(cur)
        if osc < tol:
            converged = True
            break
        if relax.cfl_number(psi_hat) > cfl:
            while relax.cfl_number(psi_hat) > cfl:
                relax.refine()
            log.debug("CFL guard: %d substeps per interval", relax.n_sub)
    diag.substeps = relax.n_sub
    if not converged:
        raise NonConvergenceError(
            f"relaxation did not settle in {max_periods} periods "
            f"(last oscillation {diag.oscillation:.3e}, tolerance {tol:.3e})",
            diag.drift_history)

    lam = params.tau * c / m.time.period
    if static:
        values = ifft_space(psi_hat, space)[None]
    else:
        _, snaps = relax.run(psi_hat, record=True, cfl=cfl)
        t = m.time.times().reshape((-1,) + (1,) * space.dim)
        values = np.array(snaps) - (lam / params.tau) * t
        if params.direction == "backward":
            values = np.roll(values[::-1], 1, axis=0)
    values = values - values.mean()
    phi = SpaceTimeField(values, space, m.time)
    result = EigenResult(lam, phi, "phi", np.nan, diag.periods_run,
                         {"route": "relaxation", "relaxation": diag,
                          "tol_drift": tol, "method": relax.method, "upwind": upwind})
    res = residual(result, m, H, params)
    return EigenResult(lam, phi, "phi", res, diag.periods_run, result.diagnostics)


def residual(eig: EigenResult, m: SpaceTimeField, H: Hamiltonian, params: OperatorParams,
             method: str | None = None) -> float:
    """Sup-norm of ``lam + s tau d_t phi - mu Lap phi + eps H(grad phi) + <A, grad phi> + m``.

    ``s = +1`` forward, ``-1`` backward; the time derivative is spectral.  A
    corrector produced with upwinding is checked with the same upwind gradient.
    """
    phi = eig.field
    if eig.form != "phi":
        raise ValueError("residual expects the corrector form; convert with linear.hj_form")
    if phi.values.shape != m.values.shape:
        raise ValueError(f"corrector shape {phi.values.shape} does not match potential "
                         f"{m.values.shape}")
    space = phi.space
    method = method or eig.diagnostics.get("method", params.method)
    s = 1.0 if params.direction == "forward" else -1.0
    if eig.diagnostics.get("upwind"):
        g = np.stack([_upwind_gradient(v, space.dim, space.h) for v in phi.values], axis=1)
    else:
        g = grad_array(phi.values, space, method)
    r = (eig.lam + s * params.tau * dt_array(phi.values, phi.time.period)
         - params.mu * lap_array(phi.values, space, method)
         + params.eps * H.eval(g) + m.values)
    vec = params.advection_vector(space.dim)
    adv = params.advection_array(space.dim)
    if vec is not None:
        r = r + np.tensordot(vec, g, axes=(0, 0))
    elif adv is not None:
        r = r + np.sum(adv[:, None] * g, axis=0)
    return float(np.max(np.abs(r)))


def static_problem(m_static: np.ndarray, space, period: float = 1.0) -> SpaceTimeField:
    """A time-independent potential on the degenerate time grid."""
    return SpaceTimeField.static(m_static, space, TimeGrid.degenerate(period))
