"""Canonical potentials ``m(t, x)`` used by the experiments.

Every recipe returns a :class:`SpaceTimeField`; ``recipe(name, space, time, **params)``
builds one from its config name.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .grid import TWO_PI, SpaceTimeField, TimeGrid, TorusGrid


def bump_profile(x: np.ndarray, kappa: float) -> np.ndarray:
    """``exp(kappa cos 2 pi x)`` minus its mean ``I_0(kappa)``."""
    return np.exp(kappa * np.cos(TWO_PI * x)) - special.i0(kappa)


def traveling_bump(space: TorusGrid, time: TimeGrid, kappa: float = 1.0,
                   amplitude: float = 1.0, laps: int = 1) -> SpaceTimeField:
    """``amplitude * g(x_1 - laps t / T)`` with ``g`` the recentred bump.

    The time average vanishes at every ``x`` while ``int max_x m dt > 0``.
    """
    if laps == 0:
        raise ValueError("a traveling bump needs laps != 0")
    T = time.period

    def f(t, *xs):
        return amplitude * bump_profile(xs[0] - laps * t / T, kappa)

    return SpaceTimeField.from_function(f, space, time)


def crest(space: TorusGrid, time: TimeGrid, laps: int = 1) -> np.ndarray:
    """Position of the bump's crest on the first axis at the grid times."""
    return (laps * time.times() / time.period) % 1.0


def separable(m0: np.ndarray, h: np.ndarray, space: TorusGrid, time: TimeGrid) -> SpaceTimeField:
    """``m0(x) + h(t)``."""
    m0 = np.asarray(m0, dtype=float)
    h = np.asarray(h, dtype=float).reshape((-1,) + (1,) * space.dim)
    return SpaceTimeField(m0[None] + h, space, time)


def static(m0: np.ndarray, space: TorusGrid, time: TimeGrid) -> SpaceTimeField:
    return SpaceTimeField.static(m0, space, time)


def two_mode(space: TorusGrid, time: TimeGrid, j: int = 1, l: int = 3, amplitude: float = 1.0,
             c_j=None, c_l=None) -> SpaceTimeField:
    """``amplitude (c_j(t) sin(2 pi j x) + c_l(t) sin(2 pi l x))`` along the first axis.

    Default profiles are ``cos(2 pi t / T)`` and ``sin(2 pi t / T)``.
    """
    T = time.period
    c_j = c_j or (lambda t: np.cos(TWO_PI * t / T))
    c_l = c_l or (lambda t: np.sin(TWO_PI * t / T))

    def f(t, *xs):
        x = xs[0]
        return amplitude * (c_j(t) * np.sin(TWO_PI * j * x) + c_l(t) * np.sin(TWO_PI * l * x))

    return SpaceTimeField.from_function(f, space, time)


def random_smooth(space: TorusGrid, time: TimeGrid, seed: int = 0, amplitude: float = 1.0,
                  space_modes: int = 3, time_modes: int = 2, decay: float = 2.0,
                  time_symmetric: bool = False) -> SpaceTimeField:
    """Random trigonometric polynomial with algebraically decaying coefficients.

    Rescaled so that ``max |m| = amplitude``.  With ``time_symmetric`` only
    cosines in time are used, so ``m(T - t) = m(t)``.
    """
    rng = np.random.default_rng(seed)
    T = time.period
    ks = np.arange(-space_modes, space_modes + 1)
    waves = [np.array(k) for k in np.stack(np.meshgrid(*([ks] * space.dim), indexing="ij"),
                                           axis=-1).reshape(-1, space.dim)]
    terms = []
    for k in waves:
        for w in range(time_modes + 1):
            size = (1.0 + np.abs(k).sum() + w) ** -decay
            a, b, c = rng.standard_normal(3) * size
            terms.append((k, w, a, b, c))

    def f(t, *xs):
        out = 0.0
        for k, w, a, b, c in terms:
            phase = TWO_PI * sum(k[i] * xs[i] for i in range(space.dim))
            if time_symmetric:
                tp = np.cos(TWO_PI * w * t / T)
                out = out + (a * np.cos(phase) + b * np.sin(phase)) * tp
            else:
                out = out + a * np.cos(phase + TWO_PI * w * t / T + c)
        return out

    m = SpaceTimeField.from_function(f, space, time)
    scale = m.sup_norm()
    return m * (amplitude / scale) if scale > 0 else m


def random_corpus(space: TorusGrid, time: TimeGrid, count: int, seed: int = 0, **kw) -> list:
    """``count`` independent draws of :func:`random_smooth` from one seed."""
    seeds = np.random.SeedSequence(seed).generate_state(count)
    return [random_smooth(space, time, seed=int(s), **kw) for s in seeds]


def is_separable(m: SpaceTimeField, tol: float = 1e-12) -> bool:
    """Whether ``m(t, x) = m0(x) + h(t)`` up to ``tol`` (sup norm)."""
    v = m.values
    axes = tuple(range(1, v.ndim))
    rest = v - v.mean(axis=0, keepdims=True) - v.mean(axis=axes, keepdims=True) + v.mean()
    return bool(np.max(np.abs(rest)) <= tol * max(1.0, m.sup_norm()))


def is_time_symmetric(m: SpaceTimeField, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(m.values - m.time_reversed().values))
                <= tol * max(1.0, m.sup_norm()))


RECIPES = {
    "traveling_bump": traveling_bump,
    "two_mode": two_mode,
    "random": random_smooth,
}
EXTRA_RECIPES = ["constant", "static_cos", "sin_cos", "separable"]


def recipe(name: str, space: TorusGrid, time: TimeGrid, **params) -> SpaceTimeField:
    """Build a named potential.

    Besides :data:`RECIPES`, ``constant``, ``static_cos``, ``sin_cos``
    (``sin 2 pi x + cos 2 pi y``) and ``separable`` are accepted.
    """
    if name == "constant":
        return SpaceTimeField.constant(params.get("value", 0.0), space, time)
    if name == "static_cos":
        amp = params.get("amplitude", 1.0)
        return SpaceTimeField.from_function(
            lambda t, *xs: amp * sum(np.cos(TWO_PI * x) for x in xs) + 0.0 * t, space, time)
    if name == "sin_cos":
        amp = params.get("amplitude", 1.0)
        return SpaceTimeField.from_function(
            lambda t, *xs: amp * (np.sin(TWO_PI * xs[0])
                                  + sum(np.cos(TWO_PI * x) for x in xs[1:])) + 0.0 * t,
            space, time)
    if name == "separable":
        amp = params.get("amplitude", 1.0)
        return SpaceTimeField.from_function(
            lambda t, *xs: amp * (np.cos(TWO_PI * xs[0]) + np.sin(TWO_PI * t / time.period)),
            space, time)
    if name not in RECIPES:
        raise ValueError(f"unknown potential {name!r}; choose from "
                         f"{sorted(list(RECIPES) + EXTRA_RECIPES)}")
    return RECIPES[name](space, time, **params)
