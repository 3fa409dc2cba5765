"""Fourth-order exponential time differencing for ``v' = L v + N(v, t)``.

``L`` is diagonal in Fourier space (diffusion, and constant advection when
present), so it is integrated exactly; ``N`` is treated explicitly.  The
phi-function coefficients are evaluated by contour averages (Kassam and
Trefethen) which avoids cancellation for small ``|h L|``.

ETD schemes map every equilibrium of the ODE to a fixed point of the step,
which is why static cell problems come out independent of the step size.
"""

from __future__ import annotations

import numpy as np

_CONTOUR_POINTS = 64


class ETDRK4:
    """One-step map of the ETDRK4 scheme (Cox and Matthews) for a fixed ``h``."""

    def __init__(self, symbol: np.ndarray, h: float):
        self.h = float(h)
        L = np.asarray(symbol, dtype=complex)
        hL = self.h * L
        r = np.exp(2j * np.pi * (np.arange(1, _CONTOUR_POINTS + 1) - 0.5) / _CONTOUR_POINTS)
        LR = hL[..., None] + r
        eLR = np.exp(LR)
        real_symbol = not np.any(np.imag(L))

        def avg(z):
            out = np.mean(z, axis=-1)
            return out.real if real_symbol else out

        self.E = np.exp(hL)
        self.E2 = np.exp(hL / 2)
        self.Q = self.h * avg((np.exp(LR / 2) - 1.0) / LR)
        self.f1 = self.h * avg((-4.0 - LR + eLR * (4.0 - 3.0 * LR + LR**2)) / LR**3)
        self.f2 = self.h * avg((2.0 + LR + eLR * (LR - 2.0)) / LR**3)
        self.f3 = self.h * avg((-4.0 - 3.0 * LR - LR**2 + eLR * (4.0 - LR)) / LR**3)
        if real_symbol:
            self.E = self.E.real
            self.E2 = self.E2.real

    def step(self, v_hat: np.ndarray, t: float, nonlinear) -> np.ndarray:
        """Advance ``v_hat`` from ``t`` to ``t + h``.

        ``nonlinear(v_hat, t)`` returns ``N`` in spectral space.
        """
        h = self.h
        Nv = nonlinear(v_hat, t)
        a = self.E2 * v_hat + self.Q * Nv
        Na = nonlinear(a, t + h / 2)
        b = self.E2 * v_hat + self.Q * Na
        Nb = nonlinear(b, t + h / 2)
        c = self.E2 * a + self.Q * (2.0 * Nb - Nv)
        Nc = nonlinear(c, t + h)
        return self.E * v_hat + self.f1 * Nv + 2.0 * self.f2 * (Na + Nb) + self.f3 * Nc


def substeps_for(limit_dt: float, interval: float, at_least: int = 1) -> int:
    """Smallest power of two ``k >= at_least`` with ``interval / k <= limit_dt``."""
    k = max(1, at_least)
    if not np.isfinite(limit_dt) or limit_dt <= 0:
        return k
    while interval / k > limit_dt:
        k *= 2
        if k > 2**22:
            raise RuntimeError("time step underflow while choosing substeps")
    return k
