"""Donsker-Varadhan functional, its saddle gap, and the control value.

With ``D phi = s tau d_t phi - mu Lap phi + eps H(grad phi) + <A, grad phi>``
(``s = +1`` forward, ``-1`` backward):

* ``dv_value(phi, eta) = int int (D phi + m) d eta``; at the corrector and its
  invariant measure this equals ``-lam``, and ``phi -> dv_value(phi, eta_H)``
  is minimal there.
* ``control_value(alpha) = int int (m - eps L(alpha / eps)) d eta_alpha`` where
  ``eta_alpha`` is invariant for the drift ``alpha + A``; its supremum over
  controls is ``-lam``, attained at ``alpha = eps grad_p H(grad phi_H)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import SpaceTimeField, SpaceVectorField, dt_array, grad_array, lap_array
from .hamiltonians import Hamiltonian
from .measure import InvariantMeasure, control_measure
from .params import EigenResult, OperatorParams


@dataclass(frozen=True)
class DVReport:
    value: float
    gap: float
    quadratic_form: Optional[float]

    def as_dict(self) -> dict:
        return {"value": self.value, "gap": self.gap, "quadratic_form": self.quadratic_form}


def _operator(phi: SpaceTimeField, H: Hamiltonian, params: OperatorParams) -> np.ndarray:
    space = phi.space
    s = 1.0 if params.direction == "forward" else -1.0
    g = grad_array(phi.values, space, params.method)
    out = (s * params.tau * dt_array(phi.values, phi.time.period)
           - params.mu * lap_array(phi.values, space, params.method)
           + params.eps * H.eval(g))
    vec = params.advection_vector(space.dim)
    adv = params.advection_array(space.dim)
    if vec is not None:
        out = out + np.tensordot(vec, g, axes=(0, 0))
    elif adv is not None:
        out = out + np.sum(adv[:, None] * g, axis=0)
    return out


def _check(phi: SpaceTimeField, eta: InvariantMeasure, m: SpaceTimeField):
    if phi.values.shape != eta.values.shape or m.values.shape != eta.values.shape:
        raise ValueError(f"shapes differ: phi {phi.values.shape}, eta {eta.values.shape}, "
                         f"m {m.values.shape}")


def dv_value(phi: SpaceTimeField, eta: InvariantMeasure, m: SpaceTimeField, H: Hamiltonian,
             params: OperatorParams) -> float:
    """``int int (s tau d_t phi - mu Lap phi + eps H(grad phi) + <A, grad phi> + m) d eta``."""
    _check(phi, eta, m)
    return eta.integrate(_operator(phi, H, params) + m.values)


def dv_gap(phi: SpaceTimeField, eig: EigenResult, eta_H: InvariantMeasure, m: SpaceTimeField,
           H: Hamiltonian, params: OperatorParams) -> DVReport:
    """Gap ``dv_value(phi, eta_H) + lam`` and, for quadratic ``H``, the exact remainder.

    When the Hessian is constant the gap equals
    ``eps int int H(grad(phi - phi_H)) d eta_H`` (half the Hessian form).
    """
    value = dv_value(phi, eta_H, m, H, params)
    gap = value + eig.lam
    quad = None
    if H.is_quadratic():
        diff = phi.values - eig.field.values
        g = grad_array(diff, phi.space, params.method)
        quad = params.eps * eta_H.integrate(H.eval(g))
    return DVReport(value, gap, quad)


def running_cost(alpha: np.ndarray, H: Hamiltonian, eps: float) -> np.ndarray:
    """``eps L(alpha / eps)``, the Legendre transform of ``eps H``.

    With ``eps = 0`` the cost is infinite off ``alpha = 0``.
    """
    if eps == 0:
        if np.any(alpha != 0):
            return np.full(alpha.shape[1:], np.inf)
        return np.zeros(alpha.shape[1:])
    return eps * H.legendre(alpha / eps)


def control_value(alpha: SpaceVectorField, m: SpaceTimeField, H: Hamiltonian,
                  params: OperatorParams, return_measure: bool = False, **kw):
    """``J(alpha) = int int (m - eps L(alpha / eps)) d eta_alpha``.

    ``eta_alpha`` is the invariant measure of the drift ``alpha + A``.  With
    ``return_measure`` the pair ``(J, eta_alpha)`` is returned.
    """
    if alpha.values.shape[1:] != m.values.shape:
        raise ValueError("control and potential live on different grids")
    eta = control_measure(alpha, params, **kw)
    J = eta.integrate(m.values - running_cost(alpha.values, H, params.eps))
    return (J, eta) if return_measure else J


def optimal_control(eig: EigenResult, H: Hamiltonian, params: OperatorParams) -> SpaceVectorField:
    """``alpha = eps grad_p H(grad phi_H)``, the maximizer of ``control_value``."""
    phi = eig.field
    g = grad_array(phi.values, phi.space, params.method)
    return SpaceVectorField(params.eps * H.grad(g), phi.space, phi.time)
