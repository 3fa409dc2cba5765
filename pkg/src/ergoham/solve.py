"""One entry point for ``lam_H`` that picks the cheapest exact route.

For ``H = s |p|^2`` with weight ``w = eps s > 0`` the substitution
``phi = (mu / w) (-log u)`` maps the cell problem onto the linear eigenproblem
with potential ``(w / mu) m``:

    lam_H(m) = (mu / w) * lam_linear((w / mu) m).

Everything else goes through the relaxation solver.
"""

from __future__ import annotations

import numpy as np

from . import cell, linear
from .grid import SpaceTimeField
from .hamiltonians import Hamiltonian
from .params import EigenResult, OperatorParams, SolverError

ROUTES = ("auto", "linear", "relaxation")


def linear_route_ok(H: Hamiltonian, params: OperatorParams) -> bool:
    return H.is_isotropic_quadratic() and params.eps * H.scale > 0


def solve(m: SpaceTimeField, H: Hamiltonian, params: OperatorParams, route: str = "auto",
          **kw) -> EigenResult:
    """Eigenpair ``(lam_H, phi_H)`` in corrector form.

    Extra keywords go to the underlying solver.  Static problems on the
    quadratic route without advection use the symmetric elliptic solve.
    """
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}; expected one of {ROUTES}")
    use_linear = route == "linear" or (route == "auto" and linear_route_ok(H, params))
    if route == "linear" and not linear_route_ok(H, params):
        raise ValueError(f"the linear route needs an isotropic quadratic H, got {H.describe()}")
    if not use_linear:
        return cell.effective_hamiltonian(m, H, params, **kw)

    w = params.eps * H.scale
    ratio = w / params.mu
    if m.is_static() and params.advection is None:
        res = linear.elliptic_xi(m.values[0], m.space, mu=params.mu, H=H, eps=params.eps)
        if res.form != "phi":
            raise SolverError("elliptic eigenvector changed sign")
        phi = SpaceTimeField.static(res.field.values[0], m.space, m.time)
        return EigenResult(res.lam, phi, "phi", res.residual, res.iterations,
                           dict(res.diagnostics))
    lin_params = params.with_(eps=params.mu)
    res = linear.parabolic_principal_eig(m * ratio, lin_params, **kw)
    phi = linear.hopf_cole(res.field, ratio)
    diag = dict(res.diagnostics)
    diag["linear_residual"] = res.residual
    out = EigenResult(res.lam / ratio, phi, "phi", np.nan, res.iterations, diag)
    return EigenResult(out.lam, phi, "phi", cell.residual(out, m, H, params), res.iterations,
                       diag)
