"""Effective Hamiltonians and principal eigenvalues of time-periodic viscous
Hamilton-Jacobi operators on the torus.

The core entry point is :func:`solve`, which returns ``lam_H`` and the
corrector for ``tau d_t - mu Lap + eps H(grad .) + <A, grad .> + m``.
"""

from .grid import SpaceTimeField, SpaceVectorField, TimeGrid, TorusGrid
from .hamiltonians import Hamiltonian, anisotropic, parse_hamiltonian, power_law, quadratic
from .params import (ConservationError, DomainError, EigenResult, InstabilityError,
                     NonConvergenceError, OperatorParams, SolverError)
from .solve import solve

__version__ = "0.1.0"

__all__ = [
    "ConservationError", "DomainError", "EigenResult", "Hamiltonian", "InstabilityError",
    "NonConvergenceError", "OperatorParams", "SolverError", "SpaceTimeField", "SpaceVectorField",
    "TimeGrid", "TorusGrid", "anisotropic", "parse_hamiltonian", "power_law", "quadratic",
    "solve",
]
