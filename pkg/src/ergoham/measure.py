"""Invariant measures of time-periodic drift-diffusions.

For a drift ``b`` the forward invariant measure solves the adjoint equation

    -tau d_t eta - mu Lap eta - div(eta b) = 0,   int eta(t, .) = 1/T.

Substituting ``s = T - t`` turns it into the forward-parabolic problem
``tau sigma_s = mu Lap sigma + div(sigma b(T - s))``, whose period map has
Floquet multiplier 1 on the mass; plain iteration from the uniform density
converges to the periodic solution.  Backward operators flip the time
direction of the adjoint as well, and then no substitution is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import (SpaceTimeField, SpaceVectorField, StageSource, derivative_symbols,
                   fft_space, grad_array, ifft_space, laplacian_symbol)
from .hamiltonians import Hamiltonian
from .params import ConservationError, EigenResult, NonConvergenceError, OperatorParams, SolverError
from .stepping import ETDRK4, substeps_for

CFL = 0.5
L1_TOL = 1e-9
MAX_PERIODS = 5000
NEG_TOL = 1e-10
MASS_TOL = 1e-6
_STATIC_INTERVALS = 8
# floor on substeps per time interval for time-dependent drifts
MIN_SUBSTEPS = 4


@dataclass(frozen=True)
class InvariantMeasure:
    """Nonnegative periodic density with mass ``1/T`` on every time slice."""

    density: SpaceTimeField
    per_slice_mass: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return self.density.values

    def integrate(self, f) -> float:
        """``int int f d eta`` by nodal quadrature; ``f`` a field or a compatible array."""
        vals = f.values if isinstance(f, SpaceTimeField) else np.asarray(f, dtype=float)
        vals = np.broadcast_to(vals, self.values.shape)
        time = self.density.time
        space = self.density.space
        return float(np.sum(vals * self.values) * time.dt * space.h ** space.dim)

    def total_mass(self) -> float:
        return self.integrate(1.0)


def _slice_mass(values: np.ndarray, dim: int) -> np.ndarray:
    # unit torus: integral over space is the nodal mean
    return values.reshape(values.shape[0], -1).mean(axis=1)


class _FokkerPlanck:
    """Period map of ``tau sigma' = mu Lap sigma + div(sigma b(s))``."""

    def __init__(self, b: np.ndarray, space, period: float, params: OperatorParams,
                 n_intervals: int, min_substeps: int = 1):
        self.space = space
        self.period = period
        self.n_intervals = n_intervals
        tau = params.tau
        # the space-time mean drift is integrated exactly in the linear part
        self.bbar = b.reshape(space.dim, -1).mean(axis=1)
        rest = b - self.bbar.reshape((space.dim,) + (1,) * (b.ndim - 1))
        self.syms = derivative_symbols(space, params.method)
        L = params.mu * laplacian_symbol(space, params.method)
        L = L + sum(self.bbar[i] * self.syms[i] for i in range(space.dim))
        self.symbol = L / tau
        self.explicit = bool(np.any(rest))
        interval = period / n_intervals
        speed = float(np.max(np.sqrt(np.sum(rest**2, axis=0)))) if self.explicit else 0.0
        limit = CFL * tau * space.h / speed if speed > 0 else np.inf
        self.n_sub = substeps_for(limit, interval, at_least=min_substeps)
        h = interval / self.n_sub
        self.stepper = ETDRK4(self.symbol, h)
        self.rest = [StageSource(rest[i] / tau, period, h) for i in range(space.dim)]

    def _nonlinear(self, s_hat, t):
        sigma = ifft_space(s_hat, self.space)
        acc = 0.0
        for i, sym in enumerate(self.syms):
            acc = acc + sym * fft_space(sigma * self.rest[i](t), self.space)
        return acc

    def run(self, s_hat: np.ndarray, record: bool = False):
        snaps = [] if record else None
        h = self.stepper.h
        for k in range(self.n_intervals):
            if record:
                snaps.append(ifft_space(s_hat, self.space))
            if not self.explicit:
                s_hat = self.stepper.E**self.n_sub * s_hat
                continue
            for j in range(self.n_sub):
                s_hat = self.stepper.step(s_hat, (k * self.n_sub + j) * h, self._nonlinear)
            if not np.all(np.isfinite(s_hat)):
                raise SolverError("Fokker-Planck relaxation produced non-finite values")
        return s_hat, snaps


def _drift_array(b, space, time) -> np.ndarray:
    """Drift as an array ``(dim, nt, *space)``."""
    if isinstance(b, SpaceVectorField):
        if b.values.shape[1] != time.n_steps:
            raise ValueError("drift and measure time grids differ")
        return np.array(b.values)
    arr = np.asarray(b, dtype=float)
    if arr.shape == (space.dim,):
        return np.broadcast_to(arr.reshape((space.dim, 1) + (1,) * space.dim),
                               (space.dim, time.n_steps) + space.shape).copy()
    if arr.shape != (space.dim, time.n_steps) + space.shape:
        raise ValueError(f"drift has shape {arr.shape}")
    return arr


def invariant_for_drift(b, params: OperatorParams, space=None, time=None, *,
                        tol: float = L1_TOL, max_periods: int = MAX_PERIODS,
                        sigma0: np.ndarray | None = None) -> InvariantMeasure:
    """Periodic solution of ``-tau d_t eta - mu Lap eta - div(eta b) = 0`` (forward operator).

    ``b`` is a :class:`SpaceVectorField` or, with explicit grids, a constant
    vector or an array ``(dim, nt, *space)``.  The ``advection`` of ``params``
    is not added; pass the total drift.  For ``direction="backward"`` the time
    derivative changes sign.
    """
    if isinstance(b, SpaceVectorField):
        space, time = b.space, b.time
    elif space is None or time is None:
        raise ValueError("grids are required when the drift is not a SpaceVectorField")
    barr = _drift_array(b, space, time)
    static = time.static or bool(np.all(barr == barr[:, :1]))
    forward = params.direction == "forward"
    if forward:
        # s = T - t
        barr = np.roll(barr[:, ::-1], 1, axis=1)
    n_intervals = _STATIC_INTERVALS if time.static else time.n_steps
    fp = _FokkerPlanck(barr, space, time.period, params, n_intervals,
                       min_substeps=1 if static else MIN_SUBSTEPS)

    sigma = np.ones(space.shape) if sigma0 is None else np.array(sigma0, dtype=float)
    sigma = sigma / np.mean(sigma)
    s_hat = fft_space(sigma, space)
    history = []
    diff = np.inf
    for k in range(1, max_periods + 1):
        new_hat, _ = fp.run(s_hat)
        new = ifft_space(new_hat, space)
        mass = float(np.mean(new))
        if abs(mass - 1.0) > MASS_TOL:
            raise ConservationError(f"mass drifted to {mass!r} over one period")
        diff = float(np.mean(np.abs(new - ifft_space(s_hat, space))))
        history.append(diff)
        s_hat = new_hat / mass
        if diff < tol:
            break
    else:
        raise NonConvergenceError(
            f"invariant measure did not settle in {max_periods} periods "
            f"(last L1 change {diff:.3e})", history)

    if time.static:
        values = ifft_space(s_hat, space)[None]
    else:
        _, snaps = fp.run(s_hat, record=True)
        values = np.array(snaps)
        if forward:
            values = np.roll(values[::-1], 1, axis=0)
    low = float(values.min())
    if low < -NEG_TOL:
        raise SolverError(f"invariant density has a negative value {low:.3e}")
    values = np.maximum(values, 0.0)
    mass = _slice_mass(values, space.dim)
    if np.max(np.abs(mass - 1.0)) > MASS_TOL:
        raise ConservationError(f"slice masses drifted by {np.max(np.abs(mass - 1.0)):.3e}")
    values = values / mass.reshape((-1,) + (1,) * space.dim) / time.period
    density = SpaceTimeField(values, space, time)
    diag = {"periods": k, "l1_history": history, "substeps": fp.n_sub, "min_density": low,
            "static": static}
    return InvariantMeasure(density, _slice_mass(values, space.dim), diag)


def hj_drift(eig: EigenResult, H: Hamiltonian, params: OperatorParams) -> SpaceVectorField:
    """Drift ``eps grad_p H(grad phi) + A`` of the corrector's optimal dynamics."""
    phi = eig.field
    g = grad_array(phi.values, phi.space, params.method)
    b = params.eps * H.grad(g)
    vec = params.advection_vector(phi.space.dim)
    adv = params.advection_array(phi.space.dim)
    if vec is not None:
        b = b + vec.reshape((-1,) + (1,) * (b.ndim - 1))
    elif adv is not None:
        b = b + adv[:, None]
    return SpaceVectorField(b, phi.space, phi.time)


def hj_measure(eig: EigenResult, H: Hamiltonian, params: OperatorParams, **kw) -> InvariantMeasure:
    """Invariant measure ``eta_H`` attached to a solved cell problem."""
    if eig.form != "phi":
        raise ValueError("hj_measure expects the corrector form")
    return invariant_for_drift(hj_drift(eig, H, params), params, **kw)


def control_measure(alpha: SpaceVectorField, params: OperatorParams, **kw) -> InvariantMeasure:
    """``eta_alpha`` of the controlled dynamics with drift ``alpha + A``."""
    b = alpha.values
    vec = params.advection_vector(alpha.space.dim)
    adv = params.advection_array(alpha.space.dim)
    if vec is not None:
        b = b + vec.reshape((-1,) + (1,) * (b.ndim - 1))
    elif adv is not None:
        b = b + adv[:, None]
    return invariant_for_drift(SpaceVectorField(b, alpha.space, alpha.time), params, **kw)


def product_measure(u_forward: SpaceTimeField, u_backward: SpaceTimeField) -> InvariantMeasure:
    """``u_forward * u_backward`` normalized per slice; the linear route's invariant measure."""
    values = u_forward.values * u_backward.values
    if np.any(values < 0):
        raise ValueError("eigenfunctions must be nonnegative")
    space, time = u_forward.space, u_forward.time
    mass = _slice_mass(values, space.dim)
    values = values / mass.reshape((-1,) + (1,) * space.dim) / time.period
    return InvariantMeasure(SpaceTimeField(values, space, time), _slice_mass(values, space.dim),
                            {"route": "linear-product"})


def weak_residual(eta: InvariantMeasure, f: SpaceTimeField, b: SpaceVectorField,
                  params: OperatorParams) -> float:
    """``int int (s tau d_t f - mu Lap f + <b, grad f>) d eta`` for a test function ``f``."""
    from .grid import dt_array, lap_array
    s = 1.0 if params.direction == "forward" else -1.0
    g = grad_array(f.values, f.space, params.method)
    expr = (s * params.tau * dt_array(f.values, f.time.period)
            - params.mu * lap_array(f.values, f.space, params.method)
            + np.sum(b.values * g, axis=0))
    return eta.integrate(expr)
