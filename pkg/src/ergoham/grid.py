"""Periodic space-time grids, fields and discrete calculus on the unit torus.

Arrays carrying a field are laid out as ``(n_time, n, ..., n)``: axis 0 is the
time index and the trailing ``dim`` axes are space.  Two derivative backends
are available: Fourier pseudo-spectral (default) and second-order central
differences.  Both are diagonal in Fourier space, so every operator here is
applied through its symbol.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.fft as sfft

Method = Literal["spectral", "fd"]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on the unit torus ``[0, 1)^dim``."""

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n_per_axis must be even and >= 8, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def axes(self) -> tuple[int, ...]:
        """Spatial axes of a space-time array."""
        return tuple(range(-self.dim, 0))

    def coords(self) -> tuple[np.ndarray, ...]:
        x = np.arange(self.n) / self.n
        if self.dim == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))

    def integer_freqs(self) -> tuple[np.ndarray, ...]:
        """Integer wavenumbers broadcastable against an ``rfftn`` output."""
        full = sfft.fftfreq(self.n, 1.0 / self.n)
        half = sfft.rfftfreq(self.n, 1.0 / self.n)
        if self.dim == 1:
            return (half,)
        return (full[:, None], half[None, :])

    def spectral_shape(self) -> tuple[int, ...]:
        return self.shape[:-1] + (self.n // 2 + 1,)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on one period ``[0, T)``; ``n_steps == 1`` marks a static problem."""

    period: float
    n_steps: int

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")
        if self.n_steps != 1 and self.n_steps < 8:
            raise ValueError(f"n_steps must be >= 8 (or 1 for static), got {self.n_steps}")

    @property
    def dt(self) -> float:
        return self.period / self.n_steps

    @property
    def static(self) -> bool:
        return self.n_steps == 1

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps) * self.dt

    @classmethod
    def degenerate(cls, period: float = 1.0) -> "TimeGrid":
        return cls(period, 1)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


class SpaceTimeField:
    """Real values on a periodic space-time grid.  Immutable."""

    __slots__ = ("values", "space", "time")

    def __init__(self, values, space: TorusGrid, time: TimeGrid):
        values = _frozen(values)
        expected = (time.n_steps,) + space.shape
        if values.shape != expected:
            raise ValueError(f"values have shape {values.shape}, expected {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "time", time)

    def __setattr__(self, name, value):
        raise AttributeError("SpaceTimeField is immutable")

    def __reduce__(self):
        # rebuild through __init__ so worker processes receive a frozen copy
        return (type(self), (np.array(self.values), self.space, self.time))

    def __repr__(self):
        return (f"SpaceTimeField(dim={self.space.dim}, n={self.space.n}, "
                f"nt={self.time.n_steps}, T={self.time.period})")

    @classmethod
    def from_function(cls, func, space: TorusGrid, time: TimeGrid) -> "SpaceTimeField":
        """Sample ``func(t, *x)`` on the grid (broadcasting is used)."""
        t = time.times().reshape((-1,) + (1,) * space.dim)
        xs = tuple(x[None] for x in space.coords())
        vals = np.broadcast_to(func(t, *xs), (time.n_steps,) + space.shape)
        return cls(vals, space, time)

    @classmethod
    def constant(cls, c: float, space: TorusGrid, time: TimeGrid) -> "SpaceTimeField":
        return cls(np.full((time.n_steps,) + space.shape, float(c)), space, time)

    @classmethod
    def static(cls, values, space: TorusGrid, time: TimeGrid) -> "SpaceTimeField":
        """Repeat a space-only array over every time node."""
        values = np.asarray(values, dtype=float)
        return cls(np.broadcast_to(values, (time.n_steps,) + space.shape), space, time)

    def with_values(self, values) -> "SpaceTimeField":
        return SpaceTimeField(values, self.space, self.time)

    def is_static(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.values - self.values[:1])) <= tol)

    def time_reversed(self) -> "SpaceTimeField":
        """The field ``(t, x) -> f(T - t, x)`` sampled on the same grid."""
        return self.with_values(np.roll(self.values[::-1], 1, axis=0))

    def __add__(self, other):
        if isinstance(other, SpaceTimeField):
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, SpaceTimeField):
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, c):
        if isinstance(c, SpaceTimeField):
            return self.with_values(self.values * c.values)
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


class SpaceVectorField:
    """``dim`` real components per node; shape ``(dim, n_time, *space)``."""

    __slots__ = ("values", "space", "time")

    def __init__(self, values, space: TorusGrid, time: TimeGrid):
        values = _frozen(values)
        expected = (space.dim, time.n_steps) + space.shape
        if values.shape != expected:
            raise ValueError(f"values have shape {values.shape}, expected {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("vector field values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "time", time)

    def __setattr__(self, name, value):
        raise AttributeError("SpaceVectorField is immutable")

    def __reduce__(self):
        # rebuild through __init__ so worker processes receive a frozen copy
        return (type(self), (np.array(self.values), self.space, self.time))

    @classmethod
    def constant(cls, vec, space: TorusGrid, time: TimeGrid) -> "SpaceVectorField":
        vec = np.asarray(vec, dtype=float).reshape((space.dim,) + (1,) * (1 + space.dim))
        return cls(np.broadcast_to(vec, (space.dim, time.n_steps) + space.shape), space, time)

    def component(self, i: int) -> SpaceTimeField:
        return SpaceTimeField(self.values[i], self.space, self.time)

    def is_constant(self) -> bool:
        flat = self.values.reshape(self.space.dim, -1)
        return bool(np.all(flat == flat[:, :1]))

    def __mul__(self, c: float):
        return SpaceVectorField(self.values * c, self.space, self.time)

    __rmul__ = __mul__

    def __add__(self, other: "SpaceVectorField"):
        return SpaceVectorField(self.values + other.values, self.space, self.time)


# ---------------------------------------------------------------------------
# symbols

def derivative_symbols(space: TorusGrid, method: Method = "spectral") -> tuple[np.ndarray, ...]:
    """Symbols of d/dx_i in ``rfftn`` layout (purely imaginary)."""
    out = []
    for q in space.integer_freqs():
        if method == "spectral":
            sym = 1j * TWO_PI * q
            # odd derivative: the unpaired Nyquist mode is dropped
            sym = np.where(np.abs(q) == space.n // 2, 0.0, sym)
        elif method == "fd":
            sym = 1j * np.sin(TWO_PI * q / space.n) / space.h
        else:
            raise ValueError(f"unknown method {method!r}")
        out.append(sym)
    return tuple(out)


def laplacian_symbol(space: TorusGrid, method: Method = "spectral") -> np.ndarray:
    total = np.zeros(space.spectral_shape())
    for q in space.integer_freqs():
        if method == "spectral":
            total = total - (TWO_PI * q) ** 2
        elif method == "fd":
            total = total - (4.0 / space.h**2) * np.sin(np.pi * q / space.n) ** 2
        else:
            raise ValueError(f"unknown method {method!r}")
    return total


def dealias_mask(space: TorusGrid) -> np.ndarray:
    """Two-thirds rule: keep integer wavenumbers with ``|q| <= n/3`` on every axis."""
    mask = np.ones(space.spectral_shape(), dtype=bool)
    for q in space.integer_freqs():
        mask = mask & (np.abs(q) <= space.n // 3)
    return mask


# ---------------------------------------------------------------------------
# array-level operators (trailing ``dim`` axes are space)

def fft_space(a: np.ndarray, space: TorusGrid) -> np.ndarray:
    if space.dim == 1:
        return sfft.rfft(a, axis=-1)
    return sfft.rfft2(a, axes=(-2, -1))


def ifft_space(a_hat: np.ndarray, space: TorusGrid) -> np.ndarray:
    if space.dim == 1:
        return sfft.irfft(a_hat, n=space.n, axis=-1)
    return sfft.irfft2(a_hat, s=space.shape, axes=(-2, -1))


def grad_array(a: np.ndarray, space: TorusGrid, method: Method = "spectral") -> np.ndarray:
    """Gradient of an array; returns shape ``(dim,) + a.shape``."""
    a_hat = fft_space(a, space)
    return np.stack([ifft_space(sym * a_hat, space) for sym in derivative_symbols(space, method)])


def lap_array(a: np.ndarray, space: TorusGrid, method: Method = "spectral") -> np.ndarray:
    return ifft_space(laplacian_symbol(space, method) * fft_space(a, space), space)


def div_array(v: np.ndarray, space: TorusGrid, method: Method = "spectral") -> np.ndarray:
    """Divergence of a vector array of shape ``(dim,) + shape``."""
    syms = derivative_symbols(space, method)
    acc = sum(sym * fft_space(v[i], space) for i, sym in enumerate(syms))
    return ifft_space(acc, space)


def dt_array(a: np.ndarray, period: float) -> np.ndarray:
    """Spectral time derivative along axis 0 of a periodic sample."""
    nt = a.shape[0]
    if nt == 1:
        return np.zeros_like(a)
    w = TWO_PI * sfft.rfftfreq(nt, period / nt)
    w = np.where(np.arange(w.size) == nt // 2, 0.0, w) if nt % 2 == 0 else w
    w = w.reshape((-1,) + (1,) * (a.ndim - 1))
    return sfft.irfft(1j * w * sfft.rfft(a, axis=0), n=nt, axis=0)


# ---------------------------------------------------------------------------
# field-level operations

def gradient(f: SpaceTimeField, method: Method = "spectral") -> SpaceVectorField:
    return SpaceVectorField(grad_array(f.values, f.space, method), f.space, f.time)


def laplacian(f: SpaceTimeField, method: Method = "spectral") -> SpaceTimeField:
    return f.with_values(lap_array(f.values, f.space, method))


def time_derivative(f: SpaceTimeField) -> SpaceTimeField:
    return f.with_values(dt_array(f.values, f.time.period))


def space_time_average(f: SpaceTimeField) -> float:
    return float(np.mean(f.values))


def slice_average(f: SpaceTimeField, t_index: int) -> float:
    return float(np.mean(f.values[t_index % f.time.n_steps]))


def time_average(f: SpaceTimeField) -> np.ndarray:
    """Mean over the period at each space node (a space-only array)."""
    return np.mean(f.values, axis=0)


def integrate(f: SpaceTimeField, density: np.ndarray) -> float:
    """Space-time integral of ``f`` against a density, by nodal quadrature."""
    cell = f.time.dt * f.space.h ** f.space.dim
    return float(np.sum(f.values * density) * cell)


class TimeInterpolant:
    """Trigonometric interpolation in time of a periodic sample.

    The interpolation weights are real, so the same operator applies to
    physical values and to their spatial Fourier transforms alike.  The
    unpaired Nyquist mode of an even-length sample is taken as a pure cosine.
    """

    def __init__(self, values: np.ndarray, period: float):
        values = np.asarray(values)
        self.period = period
        self.nt = values.shape[0]
        self._complex = np.iscomplexobj(values)
        if self.nt == 1:
            self._const = values[0]
            return
        self._const = None
        self._coef = sfft.fft(values, axis=0) / self.nt
        self._omega = TWO_PI * sfft.fftfreq(self.nt, period / self.nt)
        self._nyq = self.nt // 2 if self.nt % 2 == 0 else None

    def __call__(self, t: float) -> np.ndarray:
        if self._const is not None:
            return self._const
        phase = np.exp(1j * self._omega * t)
        if self._nyq is not None:
            phase[self._nyq] = np.cos(self._omega[self._nyq] * t)
        out = np.tensordot(phase, self._coef, axes=(0, 0))
        return out if self._complex else out.real


class StageSource:
    """Values of a periodic sample at the stage times of a fixed-step scheme.

    Stage times are multiples of ``h / 2``.  When the table fits in
    ``max_entries`` floats it is evaluated once and looked up afterwards;
    otherwise every call interpolates.
    """

    def __init__(self, values: np.ndarray, period: float, h: float, max_entries: int = 2**24):
        self.interp = TimeInterpolant(values, period)
        self.half = h / 2.0
        self.count = int(round(period / self.half))
        self.table = None
        if self.interp.nt == 1:
            return
        size = self.count * int(np.prod(values.shape[1:]))
        if abs(self.count * self.half - period) < 1e-9 * period and size <= max_entries:
            self.table = np.array([self.interp(j * self.half) for j in range(self.count)])

    def __call__(self, t: float) -> np.ndarray:
        if self.interp.nt == 1:
            return self.interp(t)
        if self.table is not None:
            j = int(round(t / self.half))
            if abs(j * self.half - t) <= 1e-9 * self.half:
                return self.table[j % self.count]
        return self.interp(t)
