"""Acceptance suites: each criterion runs at its stated tolerance and runtime budget.

``run_suite(name)`` returns a list of :class:`CriterionResult`; ``"all"`` runs
every criterion in order.  Nothing here asserts; callers decide what to do
with failures.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import experiments as ex
from .grid import (SpaceTimeField, SpaceVectorField, TimeGrid, TorusGrid, grad_array,
                   time_average)
from .hamiltonians import power_law, quadratic
from .measure import hj_drift, hj_measure, weak_residual
from .params import OperatorParams
from .potentials import random_corpus, random_smooth, recipe, traveling_bump, two_mode
from .solve import solve
from .variational import control_value, dv_gap, optimal_control

CORPUS_SEED = 20240601
CORPUS_SIZE = 10
# the upper-bound margin is quadratic in the time-dependent part of m, so the
# corpus needs enough time content for the strictness check to be meaningful
CORPUS_AMPLITUDE = 2.0
CORPUS_DECAY = 1.0


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    runtime: float
    budget: float
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def within_budget(self) -> bool:
        return self.runtime <= self.budget

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [k for k, v in self.checks.items() if not v]
        tail = f" failed: {', '.join(failed)}" if failed else ""
        return (f"{status} [{self.number:2d}] {self.name}: {self.runtime:.1f} s "
                f"(budget {self.budget:.0f} s){tail}")

    def as_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": bool(self.passed),
                "runtime": self.runtime, "budget": self.budget,
                "checks": {k: bool(v) for k, v in self.checks.items()},
                "details": ex._plain(self.details)}


def standard_corpus(n: int = 64, nt: int = 64, count: int = CORPUS_SIZE,
                    seed: int = CORPUS_SEED) -> list[SpaceTimeField]:
    """Seeded random smooth potentials on ``d = 1`` with ``max |m| = 2``."""
    return random_corpus(TorusGrid(1, n), TimeGrid(1.0, nt), count, seed=seed,
                         amplitude=CORPUS_AMPLITUDE, decay=CORPUS_DECAY)


def _finish(number, name, budget, t0, checks, details) -> CriterionResult:
    runtime = _time.perf_counter() - t0
    checks = dict(checks)
    checks["runtime"] = runtime <= budget
    return CriterionResult(number, name, all(checks.values()), runtime, budget, checks, details)


# ---------------------------------------------------------------------------

def cross_route(workers=None) -> CriterionResult:
    t0 = _time.perf_counter()
    H = quadratic()
    p = OperatorParams(tau=1.0, mu=1.0, eps=1.0)
    gaps = []
    for m in standard_corpus():
        lam_hj = solve(m, H, p, route="relaxation").lam
        lam_lin = solve(m, H, p, route="linear").lam
        gaps.append(abs(lam_hj - lam_lin))
    worst = max(gaps)
    return _finish(1, "cross-route", 60.0, t0, {"agreement": worst <= 1e-6},
                   {"max_gap": worst, "gaps": gaps, "tolerance": 1e-6})


def basic_bounds(workers=None) -> CriterionResult:
    t0 = _time.perf_counter()
    H = quadratic()
    p = OperatorParams(tau=1.0, mu=1.0, eps=1.0)
    lower_margin, upper_margin = [], []
    for m in standard_corpus():
        lam = solve(m, H, p, route="linear").lam
        upper = ex.xi(time_average(m), m.space, H)
        lower_margin.append(lam + m.sup_norm())
        upper_margin.append(upper - lam)
    space, tgrid = TorusGrid(1, 64), TimeGrid(1.0, 64)
    const = SpaceTimeField.constant(2.0, space, tgrid)
    const_err = abs(solve(const, H, p, route="relaxation").lam + 2.0)
    m0 = np.cos(2 * np.pi * space.coords()[0]) + 0.5 * np.sin(4 * np.pi * space.coords()[0])
    static = SpaceTimeField.static(m0, space, tgrid)
    static_err = abs(solve(static, H, p, route="relaxation").lam - ex.xi(m0, space, H))
    checks = {"lower_strict": min(lower_margin) > 1e-4,
              "upper_strict": min(upper_margin) > 1e-4,
              "constant_equality": const_err <= 1e-8,
              "static_equality": static_err <= 1e-8}
    return _finish(2, "basic-bounds", 30.0, t0, checks,
                   {"lower_margin": lower_margin, "upper_margin": upper_margin,
                    "constant_error": const_err, "static_error": static_err})


def frequency_limits(workers=None) -> CriterionResult:
    t0 = _time.perf_counter()
    m = traveling_bump(TorusGrid(1, 64), TimeGrid(1.0, 64))
    res = ex.sweep_frequency(m, np.geomspace(1e-2, 1e2, 9), quadratic(), workers=workers)
    low, high = res.limits["limit_low"], res.limits["limit_high"]
    # both limits may vanish, so gaps are measured against the distance between them
    scale = max(abs(low), abs(high), abs(high - low))
    rel_high = abs(res.lams[-1] - high) / scale
    rel_low = abs(res.lams[0] - low) / scale
    checks = {"high_limit": rel_high <= 0.02, "low_limit": rel_low <= 0.02,
              "gap_high_shrinking": res.checks["gap_high_shrinking"],
              "gap_low_shrinking": res.checks["gap_low_shrinking"]}
    return _finish(3, "frequency-limits", 120.0, t0, checks,
                   {"rel_gap_high": rel_high, "rel_gap_low": rel_low, "scale": scale,
                    "sweep": res.as_dict()})


def frequency_monotone(workers=None) -> CriterionResult:
    t0 = _time.perf_counter()
    taus = np.geomspace(1e-2, 1e2, 9)
    fine = (TorusGrid(1, 64), TimeGrid(1.0, 64))
    coarse = (TorusGrid(1, 32), TimeGrid(1.0, 32))
    quad = ex.sweep_frequency(random_smooth(*fine, seed=3), taus, quadratic(), limits=False,
                              workers=workers)
    quartic = ex.sweep_frequency(random_smooth(*coarse, seed=3, amplitude=3.0, time_symmetric=True),
                                 taus, power_law(4), limits=False, workers=workers)
    sep = ex.sweep_frequency(recipe("separable", *coarse), taus, power_law(4), limits=False,
                             workers=workers)
    checks = {"quadratic_monotone": quad.checks["monotone"],
              "quartic_symmetric_monotone": quartic.checks["monotone"],
              "separable_flat": sep.checks.get("flat", False)}
    return _finish(4, "frequency-monotone", 180.0, t0, checks,
                   {"direction": "non-decreasing in tau", "slack": ex.MONOTONE_SLACK,
                    "quadratic": quad.as_dict(), "quartic": quartic.as_dict(),
                    "separable": sep.as_dict()})


def diffusion(workers=None) -> CriterionResult:
    t0 = _time.perf_counter()
    m = traveling_bump(TorusGrid(1, 64), TimeGrid(1.0, 64), kappa=1.0, amplitude=10.0, laps=3)
    res = ex.sweep_diffusion(m, [1e-2, 1.0, 1e2], quadratic(), workers=workers)
    lam = res.lams
    low, high = res.limits["limit_low"], res.limits["limit_high"]
    tol_low = 0.05 * max(abs(low), m.sup_norm())
    tol_high = 0.05 * max(abs(high), m.sup_norm())
    checks = {"small_mu": lam[0] >= -0.1, "unit_mu": lam[1] <= -1.0, "large_mu": lam[2] >= -0.1,
              "certificate": res.extra["certificate"] == (0, 1, 2),
              "low_limit": abs(lam[0] - low) <= tol_low,
              "high_limit": abs(lam[2] - high) <= tol_high}
    return _finish(5, "diffusion", 120.0, t0, checks,
                   {"tolerance_low": tol_low, "tolerance_high": tol_high, "sweep": res.as_dict()})


def large_heat(workers=None) -> CriterionResult:
    t0 = _time.perf_counter()
    m = random_smooth(TorusGrid(1, 64), TimeGrid(1.0, 64), seed=1, amplitude=3.0)
    eps = [0.2, 0.1, 0.05, 0.025]
    quad = ex.large_heat_slope(m, eps, quadratic(), workers=workers)
    quart = ex.large_heat_slope(m, eps, power_law(4), workers=workers)
    checks = {"quadratic": quad.extra["richardson_rel_error"] <= 0.02,
              "quartic": quart.extra["richardson_rel_error"] <= 0.05}
    return _finish(6, "large-heat", 90.0, t0, checks,
                   {"quadratic": quad.as_dict(), "quartic": quart.as_dict()})


def blowup(workers=None) -> CriterionResult:
    t0 = _time.perf_counter()
    m = traveling_bump(TorusGrid(1, 64), TimeGrid(1.0, 64))
    res = ex.amplitude_probe(m, [0.25, 0.125, 0.0625], quadratic(), workers=workers)
    checks = {"plateau_positive": res.checks["plateau_positive"],
              "below_plateau": res.checks["below_plateau"]}
    return _finish(7, "blowup", 120.0, t0, checks, {"probe": res.as_dict()})


def reversibility(workers=None) -> CriterionResult:
    t0 = _time.perf_counter()
    H = quadratic()
    gaps = []
    for m in standard_corpus(count=20, seed=CORPUS_SEED + 1):
        fw = solve(m, H, OperatorParams(1.0, 1.0, 1.0)).lam
        bw = solve(m, H, OperatorParams(1.0, 1.0, 1.0, direction="backward")).lam
        gaps.append(abs(fw - bw))
    amp = 4.0
    m = two_mode(TorusGrid(1, 64), TimeGrid(1.0, 64), 1, 3, amp)
    rep = ex.reversibility_probe(power_law(4), m, [0.2, 0.1, 0.05, 0.025],
                                 two_mode=(1, 3, amp), workers=workers)
    checks = {"quadratic_reversible": max(gaps) <= 1e-7,
              "mode_gap": rep.checks["mode_gap"], "slope_gap": rep.checks["slope_gap"]}
    return _finish(8, "reversibility", 120.0, t0, checks,
                   {"quadratic_gaps": gaps, "two_mode": rep.as_dict()})


def _smooth_perturbation(space, tgrid, rng, size) -> np.ndarray:
    x = space.coords()[0][None]
    t = tgrid.times()[:, None] / tgrid.period
    out = np.zeros((tgrid.n_steps,) + space.shape)
    for k in range(1, 4):
        for w in range(0, 3):
            a, b = rng.standard_normal(2) / (k + w)
            out += a * np.cos(2 * np.pi * (k * x + w * t)) + b * np.sin(2 * np.pi * (k * x - w * t))
    return size * out / np.max(np.abs(out))


def dv_saddle(workers=None) -> CriterionResult:
    t0 = _time.perf_counter()
    space, tgrid = TorusGrid(1, 32), TimeGrid(1.0, 32)
    m = random_smooth(space, tgrid, seed=11)
    rng = np.random.default_rng(CORPUS_SEED)
    gaps, remainder_err = [], []
    control_excess = []
    equality = {}
    for H in (quadratic(), power_law(4)):
        p = OperatorParams(1.0, 1.0, 1.0)
        eig = solve(m, H, p)
        eta = hj_measure(eig, H, p)
        for _ in range(25):
            delta = _smooth_perturbation(space, tgrid, rng, rng.uniform(0.01, 1.0))
            rep = dv_gap(eig.field + SpaceTimeField(delta, space, tgrid), eig, eta, m, H, p)
            gaps.append(rep.gap)
            if rep.quadratic_form is not None:
                remainder_err.append(abs(rep.gap - rep.quadratic_form))
        alpha_star = optimal_control(eig, H, p)
        J_star = control_value(alpha_star, m, H, p)
        equality[H.describe()] = abs(J_star + eig.lam)
        for _ in range(10):
            pert = _smooth_perturbation(space, tgrid, rng, rng.uniform(0.05, 1.0))
            alpha = alpha_star + SpaceVectorField(pert[None], space, tgrid)
            control_excess.append(control_value(alpha, m, H, p) + eig.lam)
    checks = {"gap_nonnegative": min(gaps) >= -1e-8,
              "quadratic_remainder": max(remainder_err) <= 1e-6,
              "controls_below": max(control_excess) <= 1e-8,
              "optimal_equality": max(equality.values()) <= 1e-6}
    return _finish(9, "dv-saddle", 90.0, t0, checks,
                   {"min_gap": min(gaps), "max_remainder_error": max(remainder_err),
                    "max_control_excess": max(control_excess), "optimal_gap": equality})


def invariant_measure(workers=None) -> CriterionResult:
    t0 = _time.perf_counter()
    H = quadratic()
    p = OperatorParams(1.0, 1.0, 1.0)
    rng = np.random.default_rng(CORPUS_SEED)
    worst = {"min_density": np.inf, "mass": 0.0, "weak": 0.0, "duality": 0.0}
    for m in standard_corpus():
        eig = solve(m, H, p)
        eta = hj_measure(eig, H, p)
        T = m.time.period
        worst["min_density"] = min(worst["min_density"], float(eta.values.min()))
        worst["mass"] = max(worst["mass"], float(np.max(np.abs(eta.per_slice_mass - 1.0 / T))))
        b = hj_drift(eig, H, p)
        for _ in range(3):
            f = SpaceTimeField(_smooth_perturbation(m.space, m.time, rng, 1.0), m.space, m.time)
            worst["weak"] = max(worst["weak"], abs(weak_residual(eta, f, b, p)))
        grad = grad_array(eig.field.values, m.space)
        extra = H.eval(grad) - np.sum(H.grad(grad) * grad, axis=0)
        dual = eta.integrate(m) + eig.lam + p.eps * eta.integrate(extra)
        worst["duality"] = max(worst["duality"], abs(dual))
    checks = {"positive": worst["min_density"] >= 0.0, "slice_mass": worst["mass"] <= 1e-8,
              "weak_residual": worst["weak"] <= 1e-6, "duality": worst["duality"] <= 1e-6}
    return _finish(10, "invariant-measure", 60.0, t0, checks, worst)


def advection(workers=None) -> CriterionResult:
    t0 = _time.perf_counter()
    space = TorusGrid(2, 48)
    x, y = space.coords()
    m0 = np.sin(2 * np.pi * x) + np.cos(2 * np.pi * y)
    details = {}
    checks = {}
    for flow in ("rational", "irrational"):
        res = ex.advection_limit(m0, space, flow, [1e-2], quadratic(), workers=workers)
        pred = res.limits["prediction"]
        # a vanishing limit gets 5% of the potential's size instead
        scale = abs(pred) if abs(pred) > 1e-12 else float(np.max(np.abs(m0)))
        tol = 0.05 * scale
        err = abs(res.lams[0] - pred)
        checks[flow] = err <= tol
        details[flow] = {"lambda": float(res.lams[0]), "prediction": pred, "error": err,
                         "tolerance": tol, "flow": res.extra["flow"]}
    return _finish(11, "advection", 180.0, t0, checks, details)


SUITES = {
    "cross-route": cross_route,
    "basic-bounds": basic_bounds,
    "frequency-limits": frequency_limits,
    "frequency-monotone": frequency_monotone,
    "diffusion": diffusion,
    "large-heat": large_heat,
    "blowup": blowup,
    "reversibility": reversibility,
    "dv-saddle": dv_saddle,
    "invariant-measure": invariant_measure,
    "advection": advection,
}

TOTAL_BUDGET = 20 * 60.0


def run_suite(name: str = "all", workers: int | None = None, echo=None) -> list[CriterionResult]:
    """Run one named suite or ``"all"``; ``echo`` receives each result line as it finishes."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ValueError(f"unknown suite {name!r}; choose from {['all'] + list(SUITES)}")
    out = []
    for key in names:
        res = SUITES[key](workers)
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out
