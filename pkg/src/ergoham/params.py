"""Operator parameters, solver results and error types shared by the solvers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np

from .grid import Method, SpaceTimeField, SpaceVectorField

Direction = Literal["forward", "backward"]


class SolverError(RuntimeError):
    """Base class for numerical failures."""


class NonConvergenceError(SolverError):
    def __init__(self, message: str, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class InstabilityError(SolverError):
    pass


class ConservationError(SolverError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class OperatorParams:
    """Weights of ``tau d/dt - mu Laplacian + eps H(grad .) + <A, grad .> + m``.

    ``advection`` is either ``None``, a constant vector, or a time-independent
    :class:`SpaceVectorField`.
    """

    tau: float = 1.0
    mu: float = 1.0
    eps: float = 1.0
    direction: Direction = "forward"
    advection: Optional[object] = None
    method: Method = "spectral"

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.eps >= 0:
            raise ValueError(f"eps must be non-negative, got {self.eps}")
        if self.direction not in ("forward", "backward"):
            raise ValueError(f"direction must be 'forward' or 'backward', got {self.direction!r}")
        if self.method not in ("spectral", "fd"):
            raise ValueError(f"unknown method {self.method!r}")
        adv = self.advection
        if adv is not None and not isinstance(adv, SpaceVectorField):
            vec = np.asarray(adv, dtype=float).ravel()
            if not np.all(np.isfinite(vec)):
                raise ValueError("advection vector must be finite")
            object.__setattr__(self, "advection", tuple(float(v) for v in vec))

    def with_(self, **changes) -> "OperatorParams":
        return replace(self, **changes)

    def flipped(self) -> "OperatorParams":
        return self.with_(direction="backward" if self.direction == "forward" else "forward")

    def advection_vector(self, dim: int):
        """The constant advection vector, or ``None`` if absent or non-constant."""
        adv = self.advection
        if adv is None:
            return None
        if isinstance(adv, SpaceVectorField):
            if not adv.is_constant():
                return None
            return adv.values.reshape(dim, -1)[:, 0].copy()
        vec = np.asarray(adv, dtype=float)
        if vec.size != dim:
            raise ValueError(f"advection has {vec.size} components, grid has dim {dim}")
        return vec

    def advection_array(self, dim: int) -> Optional[np.ndarray]:
        """Non-constant advection as a space array ``(dim, *space)``, else ``None``."""
        adv = self.advection
        if isinstance(adv, SpaceVectorField) and not adv.is_constant():
            vals = adv.values
            if np.max(np.abs(vals - vals[:, :1])) > 0:
                raise ValueError("advection fields must be time-independent")
            return vals[:, 0]
        return None

    def as_dict(self) -> dict:
        adv = self.advection
        if isinstance(adv, SpaceVectorField):
            adv = "field"
        return {"tau": self.tau, "mu": self.mu, "eps": self.eps,
                "direction": self.direction, "advection": adv, "method": self.method}


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalue and eigenfunction of one operator instance.

    ``form`` is ``"u"`` for the positive linear eigenfunction (unit space-time
    quadratic mean) or ``"phi"`` for the corrector (zero space-time mean).
    """

    lam: float
    field: SpaceTimeField
    form: Literal["u", "phi"]
    residual: float
    iterations: int
    diagnostics: dict = field(default_factory=dict)
