"""Convex Hamiltonians ``H(p)`` with ``H(p) > H(0) = 0``.

Vectorized convention: a momentum array has the component axis first, shape
``(d, ...)``; ``eval`` returns shape ``(...)`` and ``grad`` shape ``(d, ...)``.
A plain ``(d,)`` vector gives a scalar value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import optimize

from .params import SolverError

Kind = Literal["quadratic", "power", "aniso"]


class SingularHessianError(ValueError):
    pass


@dataclass(frozen=True)
class Hamiltonian:
    """One member of the zoo: ``scale * |p|^2``, ``scale * |p|^r`` or ``scale * sum w_i p_i^2``.

    ``beta`` is the exponent of the scaling hypothesis ``a H(p) >= H(a^beta p)``
    for ``a`` in (0, 1).
    """

    kind: Kind = "quadratic"
    r: float = 2.0
    weights: tuple = ()
    scale: float = 1.0
    beta: float = field(default=None)

    def __post_init__(self):
        if self.kind not in ("quadratic", "power", "aniso"):
            raise ValueError(f"unknown Hamiltonian kind {self.kind!r}")
        if self.kind == "power" and not self.r > 1:
            raise ValueError(f"power law exponent must exceed 1, got {self.r}")
        if self.kind == "aniso":
            if not self.weights or min(self.weights) <= 0:
                raise ValueError("anisotropic weights must be positive")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.kind == "quadratic":
            object.__setattr__(self, "r", 2.0)
        if not self.scale >= 0:
            raise ValueError(f"scale must be non-negative, got {self.scale}")
        if self.beta is None:
            default = 1.0 / self.r if self.kind == "power" else 0.5
            object.__setattr__(self, "beta", default)
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")

    # -- identity -----------------------------------------------------------

    @property
    def exponent(self) -> float:
        return self.r if self.kind == "power" else 2.0

    def is_isotropic_quadratic(self) -> bool:
        if self.kind == "quadratic":
            return True
        if self.kind == "power" and self.r == 2.0:
            return True
        return self.kind == "aniso" and len(set(self.weights)) == 1 and self.weights[0] == 1.0

    def is_quadratic(self) -> bool:
        """Quadratic form in ``p`` (constant Hessian)."""
        return self.kind in ("quadratic", "aniso") or (self.kind == "power" and self.r == 2.0)

    def scaled(self, factor: float) -> "Hamiltonian":
        return Hamiltonian(self.kind, self.r, self.weights, self.scale * factor, self.beta)

    def describe(self) -> str:
        if self.kind == "quadratic":
            s = "quadratic"
        elif self.kind == "power":
            s = f"power:r={self.r:g}"
        else:
            s = "aniso:w=" + ",".join(f"{w:g}" for w in self.weights)
        if self.scale != 1.0:
            s += (":" if self.kind == "quadratic" else ",") + f"scale={self.scale:g}"
        return s

    # -- evaluation ---------------------------------------------------------

    def _w(self, p):
        w = np.asarray(self.weights, dtype=float)
        if w.size != p.shape[0]:
            raise ValueError(f"anisotropic weights have {w.size} entries, "
                             f"momentum has {p.shape[0]}")
        return w.reshape((-1,) + (1,) * (p.ndim - 1))

    def eval(self, p) -> np.ndarray | float:
        p = np.asarray(p, dtype=float)
        if self.kind == "aniso":
            out = np.sum(self._w(p) * p**2, axis=0)
        else:
            sq = np.sum(p**2, axis=0)
            out = sq if self.kind == "quadratic" else sq ** (self.r / 2.0)
        return self.scale * out

    def grad(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.kind == "quadratic":
            return 2.0 * self.scale * p
        if self.kind == "aniso":
            return 2.0 * self.scale * self._w(p) * p
        sq = np.sum(p**2, axis=0)
        r = self.r
        if r == 2.0:
            return 2.0 * self.scale * p
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(sq > 0, r * sq ** ((r - 2.0) / 2.0), 0.0)
        return self.scale * fac * p

    def hess(self, p) -> np.ndarray:
        """Hessian at a single momentum ``p`` of shape ``(d,)``."""
        p = np.asarray(p, dtype=float).ravel()
        d = p.size
        if self.kind == "quadratic":
            return 2.0 * self.scale * np.eye(d)
        if self.kind == "aniso":
            return 2.0 * self.scale * np.diag(self._w(p[:, None]).ravel())
        r = self.r
        norm = np.linalg.norm(p)
        if norm == 0.0:
            if r < 2.0:
                raise SingularHessianError(f"power-law Hessian is singular at p = 0 for r = {r}")
            return (2.0 * self.scale if r == 2.0 else 0.0) * np.eye(d)
        e = p / norm
        return self.scale * r * norm ** (r - 2.0) * (np.eye(d) + (r - 2.0) * np.outer(e, e))

    def max_speed(self, p) -> float:
        """``max |grad H(p)|`` over a vectorized momentum array."""
        g = self.grad(p)
        return float(np.max(np.sqrt(np.sum(g**2, axis=0))))

    # -- Legendre transform -------------------------------------------------

    def legendre(self, alpha) -> np.ndarray | float:
        """``L(alpha) = sup_p <p, alpha> - H(p)`` in closed form (vectorized like ``eval``)."""
        a = np.asarray(alpha, dtype=float)
        s = self.scale
        if s == 0:
            if np.any(a != 0):
                return np.inf
            return np.zeros(a.shape[1:]) if a.ndim > 1 else 0.0
        if self.kind == "quadratic" or (self.kind == "power" and self.r == 2.0):
            return np.sum(a**2, axis=0) / (4.0 * s)
        if self.kind == "aniso":
            return np.sum(a**2 / self._w(a), axis=0) / (4.0 * s)
        r = self.r
        q = r / (r - 1.0)
        norm = np.sqrt(np.sum(a**2, axis=0))
        return (r - 1.0) * r ** (-q) * s ** (-1.0 / (r - 1.0)) * norm**q

    def legendre_numeric(self, alpha, tol: float = 1e-10) -> float:
        """Concave maximization of ``<p, alpha> - H(p)`` for a single vector ``alpha``."""
        a = np.asarray(alpha, dtype=float).ravel()
        if not np.any(a):
            return 0.0
        res = optimize.minimize(
            lambda p: self.eval(p) - a @ p,
            x0=np.zeros_like(a),
            jac=lambda p: self.grad(p) - a,
            method="BFGS",
            options={"gtol": tol, "maxiter": 10_000},
        )
        if not res.success and np.linalg.norm(res.jac) > 1e3 * tol * max(1.0, np.linalg.norm(a)):
            raise SolverError(f"Legendre maximization failed: {res.message}")
        return float(-res.fun)


def quadratic(scale: float = 1.0) -> Hamiltonian:
    return Hamiltonian("quadratic", scale=scale)


def power_law(r: float, scale: float = 1.0, beta: float | None = None) -> Hamiltonian:
    return Hamiltonian("power", r=r, scale=scale, beta=beta)


def anisotropic(weights, scale: float = 1.0) -> Hamiltonian:
    return Hamiltonian("aniso", weights=tuple(weights), scale=scale)


def parse_hamiltonian(text: str) -> Hamiltonian:
    """Parse ``"quadratic"``, ``"power:r=4"`` or ``"aniso:w=1,2"``.

    Optional ``scale=`` and ``beta=`` entries follow the kind.
    """
    text = text.strip()
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    opts: dict[str, list[str]] = {}
    last = None
    for tok in filter(None, (t.strip() for t in rest.replace(":", ",").split(","))):
        if "=" in tok:
            key, _, val = tok.partition("=")
            last = key.strip().lower()
            opts.setdefault(last, []).append(val.strip())
        elif last is not None:
            opts[last].append(tok)
        else:
            raise ValueError(f"cannot parse Hamiltonian option {tok!r} in {text!r}")

    def one(key, default=None):
        if key not in opts:
            return default
        if len(opts[key]) != 1:
            raise ValueError(f"option {key!r} takes one value in {text!r}")
        return float(opts[key][0])

    known = {"quadratic": {"scale", "beta"}, "power": {"r", "scale", "beta"},
             "aniso": {"w", "scale", "beta"}}
    if kind not in known:
        raise ValueError(f"unknown Hamiltonian {kind!r}; expected quadratic, power or aniso")
    unknown = set(opts) - known[kind]
    if unknown:
        raise ValueError(f"unknown options {sorted(unknown)} for Hamiltonian {kind!r}")
    scale = one("scale", 1.0)
    beta = one("beta")
    if kind == "quadratic":
        return Hamiltonian("quadratic", scale=scale, beta=beta)
    if kind == "power":
        if "r" not in opts:
            raise ValueError("power Hamiltonian needs r=<exponent>")
        return Hamiltonian("power", r=one("r"), scale=scale, beta=beta)
    if "w" not in opts:
        raise ValueError("aniso Hamiltonian needs w=<w1>,<w2>,...")
    return Hamiltonian("aniso", weights=tuple(float(w) for w in opts["w"]), scale=scale, beta=beta)


@dataclass
class HypothesisReport:
    samples: int
    failures: dict
    min_hessian_eig: float

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def as_dict(self) -> dict:
        return {"samples": self.samples, "failures": dict(self.failures),
                "min_hessian_eig": self.min_hessian_eig, "ok": self.ok}


def check_hypotheses(H: Hamiltonian, samples: int = 10_000, dim: int | None = None,
                     seed: int = 0) -> HypothesisReport:
    """Randomized check of positivity, strict convexity, superlinearity and the scaling clause."""
    if samples < 100:
        raise ValueError("check_hypotheses needs at least 100 samples")
    d = dim or (len(H.weights) if H.kind == "aniso" else 2)
    rng = np.random.default_rng(seed)
    # momenta spread over many decades
    p = rng.standard_normal((d, samples)) * 10.0 ** rng.uniform(-3, 3, samples)
    a = rng.uniform(0, 1, samples)
    a = np.where(a == 0, 0.5, a)
    rel = 1e-12

    Hp = H.eval(p)
    failures = {
        "zero_at_origin": int(H.eval(np.zeros(d)) != 0.0),
        "positivity": int(np.sum(Hp <= 0)),
        "scaling": int(np.sum(a * Hp < H.eval(a**H.beta * p) * (1 - rel))),
    }
    big = p / np.sqrt(np.sum(p**2, axis=0)) * 1e6
    failures["superlinearity"] = int(np.sum(H.eval(big) / 1e6 < H.eval(big / 1e3) / 1e3))
    eigs = []
    bad_hess = 0
    for j in range(0, samples, max(1, samples // 500)):
        w = np.linalg.eigvalsh(H.hess(p[:, j]))
        eigs.append(w.min())
        bad_hess += int(w.min() <= 0)
    failures["convexity"] = bad_hess
    return HypothesisReport(samples, failures, float(min(eigs)))
