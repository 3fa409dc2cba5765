"""Parameter sweeps and probes for the scaling limits and (non-)monotonicity of ``lam_H``.

Every sweep returns a :class:`SweepResult` with the computed eigenvalues, the
predicted limits evaluated independently (elliptic solves, quadrature or an
exact heat solve), and named boolean checks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.fft as sfft

from .grid import (TWO_PI, SpaceTimeField, TimeGrid, TorusGrid, fft_space,
                   grad_array, ifft_space, time_average)
from .hamiltonians import Hamiltonian
from .linear import elliptic_xi
from .params import OperatorParams
from .potentials import is_separable, is_time_symmetric
from .solve import solve

MONOTONE_SLACK = 1e-7


@dataclass
class SweepResult:
    """One parameter sweep: ``lams[i]`` is the eigenvalue at ``values[i]``."""

    parameter: str
    values: np.ndarray
    lams: np.ndarray
    limits: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.lams = np.asarray(self.lams, dtype=float)
        d = np.diff(self.values)
        if self.values.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("sweep values must be strictly monotone")

    def rows(self) -> list[dict]:
        """One flat record per entry (CSV-ready)."""
        out = []
        for i, v in enumerate(self.values):
            row = {self.parameter: float(v), "lambda": float(self.lams[i])}
            for key, val in self.limits.items():
                row[key] = float(val)
            for key, val in self.extra.items():
                if isinstance(val, (list, np.ndarray)) and len(val) == len(self.values):
                    row[key] = _plain(val[i])
            diag = self.diagnostics[i] if i < len(self.diagnostics) else {}
            for key in ("residual", "iterations"):
                if key in diag:
                    row[key] = _plain(diag[key])
            out.append(row)
        return out

    def as_dict(self) -> dict:
        return {"parameter": self.parameter, "values": self.values.tolist(),
                "lambda": self.lams.tolist(),
                "limits": {k: float(v) for k, v in self.limits.items()},
                "checks": {k: bool(v) for k, v in self.checks.items()},
                "extra": {k: _plain(v) for k, v in self.extra.items()},
                "diagnostics": [_plain(d) for d in self.diagnostics]}


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if hasattr(v, "as_dict"):
        return _plain(v.as_dict())
    return v


# ---------------------------------------------------------------------------
# parallel map

def worker_count(workers: int | None = None) -> int:
    """Explicit count, else ``ERGOHAM_WORKERS``, else 1."""
    if workers is None:
        workers = int(os.environ.get("ERGOHAM_WORKERS", "1") or 1)
    return max(1, int(workers))


def _pmap(func, items: list, workers: int | None) -> list:
    n = min(worker_count(workers), len(items))
    if n <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(func, items))


def _solve_entry(args):
    m, H, params, kw = args
    res = solve(m, H, params, **kw)
    return res.lam, {"residual": res.residual, "iterations": res.iterations,
                     "route": res.diagnostics.get("route")}


def _solve_many(ms, H, params_list, workers, kw) -> tuple[np.ndarray, list]:
    if isinstance(ms, SpaceTimeField):
        ms = [ms] * len(params_list)
    out = _pmap(_solve_entry, [(m, H, p, kw) for m, p in zip(ms, params_list)], workers)
    return np.array([o[0] for o in out]), [o[1] for o in out]


# ---------------------------------------------------------------------------
# elliptic eigenvalues

def xi(m_static: np.ndarray, space: TorusGrid, H: Hamiltonian, mu: float = 1.0,
       eps: float = 1.0, advection=None) -> float:
    """Elliptic eigenvalue of ``-mu Lap + eps H(grad .) + <A, grad .> + m_static``."""
    return elliptic_xi(m_static, space, mu=mu, H=H, eps=eps, advection=advection).lam


def _xi_entry(args):
    return xi(*args)


def slice_xi(m: SpaceTimeField, H: Hamiltonian, mu: float = 1.0, eps: float = 1.0,
             workers: int | None = None) -> np.ndarray:
    """``xi(m(t_k, .))`` for every time slice; repeated slices are solved once."""
    keys = {}
    order = []
    for k in range(m.time.n_steps):
        key = m.values[k].tobytes()
        if key not in keys:
            keys[key] = len(order)
            order.append(k)
    vals = _pmap(_xi_entry, [(m.values[k], m.space, H, mu, eps) for k in order], workers)
    return np.array([vals[keys[m.values[k].tobytes()]] for k in range(m.time.n_steps)])


# ---------------------------------------------------------------------------
# heat cell problem

def heat_cell_problem(m: SpaceTimeField, direction: str = "forward", tau: float = 1.0,
                      mu: float = 1.0) -> SpaceTimeField:
    """Zero-mean periodic solution of ``s tau d_t psi - mu Lap psi = <<m>> - m``.

    ``s = +1`` forward, ``-1`` backward.  Solved exactly by division in the
    space-time Fourier basis, which is the discrete periodic
    variation-of-constants formula for each spatial mode.
    """
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    s = 1.0 if direction == "forward" else -1.0
    space, time = m.space, m.time
    src = m.values.mean() - m.values
    src_hat = sfft.fft(fft_space(src, space), axis=0)
    nt = time.n_steps
    omega = TWO_PI * sfft.fftfreq(nt, time.period / nt)
    if nt % 2 == 0 and nt > 1:
        omega[nt // 2] = 0.0
    lap = np.zeros(space.spectral_shape())
    for q in space.integer_freqs():
        lap = lap + (TWO_PI * q) ** 2
    denom = 1j * s * tau * omega.reshape((-1,) + (1,) * space.dim) + mu * lap[None]
    with np.errstate(divide="ignore", invalid="ignore"):
        psi_hat = np.where(denom == 0, 0.0, src_hat / denom)
    psi = ifft_space(sfft.ifft(psi_hat, axis=0), space).real
    return m.with_values(psi - psi.mean())


# ---------------------------------------------------------------------------
# sweeps

def _monotone_nondecreasing(lams: np.ndarray, slack: float) -> bool:
    return bool(np.all(np.diff(lams) >= -slack))


def _strictly_increasing(lams: np.ndarray) -> bool:
    return bool(np.all(np.diff(lams) > 0))


def _shrinking(gaps: np.ndarray) -> bool:
    return bool(np.all(np.diff(gaps) <= 0))


def sweep_frequency(m: SpaceTimeField, taus, H: Hamiltonian, mu: float = 1.0, eps: float = 1.0,
                    limits: bool = True, workers: int | None = None,
                    slack: float = MONOTONE_SLACK, **solve_kw) -> SweepResult:
    """``lam(tau)`` for ``tau d_t - mu Lap + eps H(grad .) + m``.

    Limits: ``limit_high = xi(<m>_t)`` as tau grows, ``limit_low = <xi(m(t, .))>_t``
    as tau shrinks.  ``taus`` must be increasing.

    ``xi`` is concave in the potential, so ``limit_low <= limit_high`` and the
    sweep is checked for being non-decreasing in tau.
    """
    taus = np.asarray(taus, dtype=float)
    if np.any(np.diff(taus) <= 0):
        raise ValueError("tau values must be increasing")
    params = [OperatorParams(tau=t, mu=mu, eps=eps) for t in taus]
    lams, diags = _solve_many(m, H, params, workers, solve_kw)
    res = SweepResult("tau", taus, lams, diagnostics=diags)
    res.checks["monotone"] = _monotone_nondecreasing(lams, slack)
    res.checks["strictly_increasing"] = _strictly_increasing(lams)
    res.extra["monotone_ok"] = [True] + [bool(d >= -slack) for d in np.diff(lams)]
    sep = is_separable(m)
    res.extra["separable"] = sep
    res.extra["time_symmetric"] = is_time_symmetric(m)
    if sep:
        res.checks["flat"] = bool(np.ptp(lams) <= slack)
    if limits:
        high = xi(time_average(m), m.space, H, mu, eps)
        low = float(np.mean(slice_xi(m, H, mu, eps, workers)))
        res.limits = {"limit_low": low, "limit_high": high}
        gap_high = np.abs(lams - high)
        gap_low = np.abs(lams - low)
        res.extra["gap_high"] = gap_high
        res.extra["gap_low"] = gap_low
        # gaps to each limit shrink toward its end of the grid
        res.checks["gap_high_shrinking"] = _shrinking(gap_high)
        res.checks["gap_low_shrinking"] = _shrinking(gap_low[::-1])
    return res


def sweep_diffusion(m: SpaceTimeField, mus, H: Hamiltonian, tau: float = 1.0,
                    workers: int | None = None, **solve_kw) -> SweepResult:
    """``lam(mu)`` for ``tau d_t + mu(-Lap + H(grad .)) + m``.

    Limits: ``-max_x <m>_t`` as mu shrinks and ``-<<m>>`` as mu grows.
    A non-monotonicity certificate is a triple ``i < j < k`` with ``lam_j``
    strictly below (or above) both ``lam_i`` and ``lam_k``.
    """
    mus = np.asarray(mus, dtype=float)
    if np.any(np.diff(mus) <= 0):
        raise ValueError("mu values must be increasing")
    params = [OperatorParams(tau=tau, mu=v, eps=v) for v in mus]
    lams, diags = _solve_many(m, H, params, workers, solve_kw)
    res = SweepResult("mu", mus, lams, diagnostics=diags)
    res.limits = {"limit_low": -float(np.max(time_average(m))),
                  "limit_high": -float(np.mean(m.values))}
    cert = non_monotone_triple(lams)
    res.extra["certificate"] = cert
    res.checks["non_monotone"] = cert is not None
    return res


def non_monotone_triple(lams) -> tuple | None:
    """Indices ``(i, j, k)`` maximizing the dip (or bump) ``lam_j`` against both ends."""
    lams = np.asarray(lams)
    best, depth = None, 0.0
    n = len(lams)
    for j in range(1, n - 1):
        lo_i, lo_k = np.argmin(lams[:j]), j + 1 + np.argmin(lams[j + 1:])
        hi_i, hi_k = np.argmax(lams[:j]), j + 1 + np.argmax(lams[j + 1:])
        dip = min(lams[hi_i], lams[hi_k]) - lams[j]
        bump = lams[j] - max(lams[lo_i], lams[lo_k])
        if dip > depth:
            best, depth = (int(hi_i), j, int(hi_k)), dip
        if bump > depth:
            best, depth = (int(lo_i), j, int(lo_k)), bump
    return best


def richardson(eps_values, slopes) -> float:
    """Linear extrapolation to ``eps = 0`` from the two smallest ``eps``."""
    e = np.asarray(eps_values, dtype=float)
    s = np.asarray(slopes, dtype=float)
    i, j = np.argsort(e)[:2]
    return float((e[j] * s[i] - e[i] * s[j]) / (e[j] - e[i]))


def heat_prediction(m: SpaceTimeField, H: Hamiltonian, direction: str = "forward",
                    tau: float = 1.0, mu: float = 1.0) -> float:
    """``<<H(grad psi_0)>>`` with ``psi_0`` from :func:`heat_cell_problem`."""
    psi = heat_cell_problem(m, direction, tau, mu)
    return float(np.mean(H.eval(grad_array(psi.values, psi.space))))


def large_heat_slope(m: SpaceTimeField, eps_values, H: Hamiltonian, tau: float = 1.0,
                     mu: float = 1.0, direction: str = "forward", workers: int | None = None,
                     **solve_kw) -> SweepResult:
    """Slopes ``(-lam(eps) - <<m>>) / eps`` against ``<<H(grad psi_0)>>``.

    ``eps_values`` must be decreasing (e.g. halving).
    """
    eps_values = np.asarray(eps_values, dtype=float)
    if np.any(np.diff(eps_values) >= 0):
        raise ValueError("eps values must be decreasing")
    params = [OperatorParams(tau=tau, mu=mu, eps=e, direction=direction) for e in eps_values]
    lams, diags = _solve_many(m, H, params, workers, solve_kw)
    mean_m = float(np.mean(m.values))
    slopes = (-lams - mean_m) / eps_values
    pred = heat_prediction(m, H, direction, tau, mu)
    res = SweepResult("eps", eps_values, lams, diagnostics=diags)
    res.limits = {"prediction": pred}
    res.extra["slope"] = slopes
    errors = np.abs(slopes - pred)
    res.extra["slope_error"] = errors
    res.extra["richardson"] = richardson(eps_values, slopes) if len(slopes) > 1 else slopes[0]
    ratios = errors[:-1] / np.where(errors[1:] > 0, errors[1:], np.inf)
    res.extra["error_ratio"] = ratios.tolist()
    scale = max(abs(pred), 1e-300)
    res.extra["richardson_rel_error"] = abs(res.extra["richardson"] - pred) / scale
    return res


# ---------------------------------------------------------------------------
# blow-up under a strong potential

def periodic_gaussian(x: np.ndarray, delta: float) -> np.ndarray:
    """Unit-mass periodic Gaussian of width ``delta`` on the unit circle."""
    out = np.zeros_like(x, dtype=float)
    for k in range(-4, 5):
        out = out + np.exp(-0.5 * ((x - k) / delta) ** 2)
    return out / (delta * math.sqrt(TWO_PI))


def crest_measure(curve: np.ndarray, space: TorusGrid, time: TimeGrid,
                  delta: float) -> np.ndarray:
    """Mollified graph measure of a curve ``x = curve[k]`` (d = 1), slice mass ``1/T``."""
    if space.dim != 1:
        raise ValueError("the crest measure is implemented for d = 1")
    x = space.coords()[0]
    eta = periodic_gaussian(((x[None] - np.asarray(curve)[:, None]) + 0.5) % 1.0 - 0.5, delta)
    eta = eta / eta.mean(axis=1, keepdims=True)
    return eta / time.period


def transport_drift(eta: np.ndarray, space: TorusGrid, time: TimeGrid, tau: float = 1.0,
                    mu: float = 1.0) -> np.ndarray:
    """Zero-mean drift ``alpha`` with ``-tau d_t eta - mu eta'' - (eta alpha)' = 0`` (d = 1).

    Integrating once in x: ``eta alpha = -tau G - mu eta' + C(t)`` with
    ``G' = d_t eta``; the constant makes ``alpha`` a periodic gradient and
    minimizes ``int alpha^2 eta``.
    """
    from .grid import derivative_symbols, dt_array
    (sym,) = derivative_symbols(space)
    deta = dt_array(eta, time.period)
    dh = fft_space(deta, space)
    with np.errstate(divide="ignore", invalid="ignore"):
        G = ifft_space(np.where(sym == 0, 0.0, dh / sym), space)
    eta_x = ifft_space(sym * fft_space(eta, space), space)
    F = -tau * G - mu * eta_x
    C = -np.mean(F / eta, axis=1, keepdims=True) / np.mean(1.0 / eta, axis=1, keepdims=True)
    return (F + C) / eta


def crest_bound(m: SpaceTimeField, H: Hamiltonian, eps: float, tau: float = 1.0, mu: float = 1.0,
                curve: np.ndarray | None = None, deltas=None, min_ratio: float = 1e-8) -> dict:
    """Lower bound ``-eps lam(eps) >= int int (m - eps L(alpha)) d eta_bar`` along a crest.

    ``eta_bar`` is the mollified graph measure of ``curve`` (default: the
    slice-wise argmax of ``m``).  The width is scanned over ``deltas``
    (default: from ``4 h`` up) and the best bound at this ``eps`` is returned.
    Widths whose density drops below ``min_ratio`` of its peak are skipped,
    since the drift division is then dominated by round-off.
    """
    space, time = m.space, m.time
    if curve is None:
        x = space.coords()[0]
        curve = x[np.argmax(m.values, axis=1)]
    if deltas is None:
        deltas = np.geomspace(4 * space.h, 0.5, 24)
    best = None
    for d in deltas:
        eta = crest_measure(curve, space, time, d)
        if eta.min() < min_ratio * eta.max():
            continue
        alpha = transport_drift(eta, space, time, tau, mu)
        cell = time.dt * space.h
        gain = float(np.sum(m.values * eta) * cell)
        cost = float(np.sum(H.legendre(alpha[None]) * eta) * cell)
        bound = gain - eps * cost
        if best is None or bound > best["bound"]:
            best = {"bound": bound, "delta": float(d), "gain": gain, "cost": cost}
    if best is None:
        raise ValueError("no admissible mollifier width")
    return best


def amplitude_probe(m: SpaceTimeField, eps_values, H: Hamiltonian, tau: float = 1.0,
                    mu: float = 1.0, bound_eps: float | None = None, curve=None,
                    workers: int | None = None, **solve_kw) -> SweepResult:
    """``eps lam(eps)`` for ``tau d_t - mu Lap + H(grad .) + m / eps``.

    The plateau ``c`` is the crest-measure bound at ``bound_eps`` (default the
    largest ``eps``); since that bound grows as ``eps`` decreases,
    ``eps lam(eps) <= -c`` is expected for every ``eps <= bound_eps``.
    """
    eps_values = np.asarray(eps_values, dtype=float)
    if np.any(np.diff(eps_values) >= 0):
        raise ValueError("eps values must be decreasing")
    mass = float(np.mean(np.max(m.values.reshape(m.time.n_steps, -1), axis=1)))
    if not mass > 0:
        raise ValueError("the potential violates int max_x m dt > 0")
    bound_eps = float(eps_values.max()) if bound_eps is None else bound_eps
    params = OperatorParams(tau=tau, mu=mu, eps=1.0)
    ms = [m * (1.0 / e) for e in eps_values]
    lams, diags = _solve_many(ms, H, [params] * len(ms), workers, solve_kw)
    scaled = eps_values * lams
    res = SweepResult("eps", eps_values, lams, diagnostics=diags)
    res.extra["eps_lambda"] = scaled
    res.extra["crest_mean"] = mass
    if m.space.dim == 1:
        bound = crest_bound(m, H, bound_eps, tau, mu, curve)
        c = bound["bound"]
        res.limits = {"plateau": -c}
        res.extra["bound"] = bound
        sel = eps_values <= bound_eps * (1 + 1e-12)
        res.checks["plateau_positive"] = c > 0
        res.checks["below_plateau"] = bool(c > 0 and np.all(scaled[sel] <= -c))
    return res


# ---------------------------------------------------------------------------
# reversibility

def _mode_profile(lk: float, a: float, b: float, w: float, t: np.ndarray, tau: float,
                  sign: float) -> np.ndarray:
    """Periodic solution of ``sign tau y' + lk y = -(a cos wt + b sin wt)`` in closed form."""
    # y = p cos + q sin: cos: sign tau w q + lk p = -a;  sin: -sign tau w p + lk q = -b
    k = sign * tau * w
    mat = np.array([[lk, k], [-k, lk]])
    p, q = np.linalg.solve(mat, [-a, -b])
    return p * np.cos(w * t) + q * np.sin(w * t)


def _mode_integrals_at(j, l, amplitude, H, period, tau, mu, n_quad) -> dict:
    w = TWO_PI / period
    t = np.arange(n_quad) / n_quad * period
    x = np.arange(n_quad) / n_quad
    tt, xx = np.meshgrid(t, x, indexing="ij")
    out = {}
    for name, sign in (("forward", 1.0), ("backward", -1.0)):
        grad = 0.0
        for k, (a, b) in ((j, (amplitude, 0.0)), (l, (0.0, amplitude))):
            lk = mu * (TWO_PI * k) ** 2
            y = _mode_profile(lk, a, b, w, tt, tau, sign)
            grad = grad + y * TWO_PI * k * np.cos(TWO_PI * k * xx)
        out[name] = float(np.mean(H.eval(grad[None])))
    return out


def mode_integrals(j: int, l: int, amplitude: float, H: Hamiltonian, period: float = 1.0,
                   tau: float = 1.0, mu: float = 1.0, n_quad: int = 256) -> dict:
    """``<<H(psi_x)>>`` and ``<<H(theta_x)>>`` for the two-mode potential by brute force.

    The potential is ``amplitude (cos(wt) sin(2 pi j x) + sin(wt) sin(2 pi l x))``.
    Each Fourier mode solves a scalar periodic ODE in closed form; the
    integrals are then evaluated on a fine uniform grid.  ``quad_tol`` is the
    change when the quadrature grid is halved.
    """
    fine = _mode_integrals_at(j, l, amplitude, H, period, tau, mu, n_quad)
    coarse = _mode_integrals_at(j, l, amplitude, H, period, tau, mu, n_quad // 2)
    fine["gap"] = fine["forward"] - fine["backward"]
    fine["quad_tol"] = max(abs(coarse["forward"] - fine["forward"]),
                           abs(coarse["backward"] - fine["backward"]),
                           1e-15 * max(abs(fine["forward"]), abs(fine["backward"])))
    return fine


@dataclass
class ReversibilityReport:
    eps: np.ndarray
    lam_forward: np.ndarray
    lam_backward: np.ndarray
    slope_forward: float
    slope_backward: float
    prediction_forward: float
    prediction_backward: float
    modes: dict | None = None
    checks: dict = field(default_factory=dict)

    @property
    def lam_gap(self) -> np.ndarray:
        return np.abs(self.lam_forward - self.lam_backward)

    @property
    def slope_gap(self) -> float:
        return abs(self.slope_forward - self.slope_backward)

    @property
    def slope_tol(self) -> float:
        """Error of the extrapolated slopes against their heat-equation predictions."""
        return max(abs(self.slope_forward - self.prediction_forward),
                   abs(self.slope_backward - self.prediction_backward))

    def as_dict(self) -> dict:
        return {"eps": self.eps.tolist(), "lambda_forward": self.lam_forward.tolist(),
                "lambda_backward": self.lam_backward.tolist(),
                "slope_forward": self.slope_forward, "slope_backward": self.slope_backward,
                "prediction_forward": self.prediction_forward,
                "prediction_backward": self.prediction_backward,
                "slope_tol": self.slope_tol, "modes": self.modes,
                "checks": {k: bool(v) for k, v in self.checks.items()}}


def reversibility_probe(H: Hamiltonian, m: SpaceTimeField, eps_values, tau: float = 1.0,
                        mu: float = 1.0, two_mode: tuple | None = None,
                        workers: int | None = None, **solve_kw) -> ReversibilityReport:
    """Forward and backward eigenvalues and large-heat slopes.

    ``two_mode = (j, l, amplitude)`` adds the closed-form mode integrals of the
    two-mode potential (d = 1).
    """
    fw = large_heat_slope(m, eps_values, H, tau, mu, "forward", workers, **solve_kw)
    bw = large_heat_slope(m, eps_values, H, tau, mu, "backward", workers, **solve_kw)
    rep = ReversibilityReport(fw.values, fw.lams, bw.lams, fw.extra["richardson"],
                              bw.extra["richardson"], fw.limits["prediction"],
                              bw.limits["prediction"])
    if two_mode is not None:
        j, l, amp = two_mode
        rep.modes = mode_integrals(j, l, amp, H, m.time.period, tau, mu)
        quad = max(rep.modes["quad_tol"],
                   abs(rep.modes["forward"] - rep.prediction_forward),
                   abs(rep.modes["backward"] - rep.prediction_backward))
        rep.modes["quad_tol"] = quad
        rep.checks["mode_gap"] = abs(rep.modes["gap"]) > 10 * quad
        tol = rep.slope_tol + quad
        rep.checks["slope_gap"] = rep.slope_gap >= 10 * tol
        rep.checks["slope_gap_sign"] = bool(
            np.sign(rep.slope_forward - rep.slope_backward) == np.sign(rep.modes["gap"]))
    rep.checks["reversible"] = bool(np.all(rep.lam_gap <= MONOTONE_SLACK))
    return rep


# ---------------------------------------------------------------------------
# advection

SHIPPED_FLOWS = ("zero", "rational", "irrational")


def snap_direction(value: float, n: int) -> Fraction:
    """First continued-fraction convergent of ``value`` with denominator ``>= n / 2``."""
    quotients = []
    x = value
    for _ in range(64):
        quotients.append(math.floor(x))
        conv = Fraction(quotients[-1])
        for q in reversed(quotients[:-1]):
            conv = q + 1 / conv
        rest = x - quotients[-1]
        if conv.denominator >= n / 2 or rest == 0:
            return conv
        x = 1.0 / rest
    raise ValueError(f"no convergent of {value} with denominator >= {n / 2}")


def shipped_flow(name: str, n: int) -> tuple[np.ndarray, str]:
    """Constant flow vector for a shipped name and the description of its limit."""
    if name == "zero":
        return np.zeros(2), "max"
    if name == "rational":
        return np.array([1.0, 0.0]), "x-average"
    if name == "irrational":
        q = snap_direction(math.sqrt(2.0), n)
        return np.array([1.0, q.numerator / q.denominator]), "mean"
    raise ValueError(f"advection flow {name!r} is not shipped; the limit assumption cannot be "
                     f"certified (choose from {SHIPPED_FLOWS})")


def advection_prediction(m_static: np.ndarray, kind: str) -> float:
    if kind == "max":
        return -float(np.max(m_static))
    if kind == "x-average":
        return -float(np.max(np.mean(m_static, axis=0)))
    return -float(np.mean(m_static))


def advection_limit(m_static: np.ndarray, space: TorusGrid, flow: str, eps_values,
                    H: Hamiltonian, workers: int | None = None, **solve_kw) -> SweepResult:
    """``lam(eps, A)`` for ``eps(-Lap + H(grad .)) + <A, grad .> + m`` (static, d = 2)."""
    if space.dim != 2:
        raise ValueError("advection_limit works on d = 2")
    A, kind = shipped_flow(flow, space.n)
    eps_values = np.asarray(eps_values, dtype=float)
    time = TimeGrid.degenerate()
    m = SpaceTimeField.static(m_static, space, time)
    adv = None if not np.any(A) else tuple(A)
    params = [OperatorParams(tau=1.0, mu=e, eps=e, advection=adv) for e in eps_values]
    lams, diags = _solve_many(m, H, params, workers, solve_kw)
    res = SweepResult("eps", eps_values, lams, diagnostics=diags)
    res.limits = {"prediction": advection_prediction(np.asarray(m_static), kind)}
    res.extra["flow"] = A.tolist()
    res.extra["flow_name"] = flow
    return res
