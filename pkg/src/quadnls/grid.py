"""Tensor-product periodic grids, wavefunctions and spectral norms.

The box ``[-L, L)`` per axis stands in for the whole space; all transforms
use the unitary DFT so that mass is the same in physical and frequency
space. Quadrature weights are the cell volume ``h**n`` (trapezoidal rule on
a periodic grid).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import fft as sfft

from .errors import BoundaryMassError, DomainError, NumericalCorruptionError

__all__ = [
    "Grid",
    "WaveFunction",
    "forward_spectral",
    "inverse_spectral",
    "spectral_gradient",
    "norm_L2",
    "norm_Lp",
    "norm_grad_L2",
    "norm_x_L2",
    "norm_Sigma",
    "boundary_mass",
    "spectral_tail",
    "affine_resample",
    "shift",
]

MAX_DIM = 3


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``prod_j [-L_j, L_j)``."""

    num_points: tuple[int, ...]
    half_width: tuple[float, ...]

    def __post_init__(self):
        if len(self.num_points) != len(self.half_width):
            raise DomainError("num_points and half_width must have the same length")
        if not 1 <= len(self.num_points) <= MAX_DIM:
            raise DomainError(f"dimension must be between 1 and {MAX_DIM}")
        for n in self.num_points:
            if n < 8 or not _is_power_of_two(int(n)):
                raise DomainError(f"num_points must be a power of two >= 8, got {n}")
        for L in self.half_width:
            if not (np.isfinite(L) and L > 0):
                raise DomainError(f"half_width must be positive, got {L}")

    @classmethod
    def create(cls, dim: int = 1, num_points: int | Sequence[int] = 2048,
               half_width: float | Sequence[float] = 16.0) -> "Grid":
        if np.isscalar(num_points):
            num_points = (int(num_points),) * dim
        if np.isscalar(half_width):
            half_width = (float(half_width),) * dim
        return cls(tuple(int(n) for n in num_points), tuple(float(L) for L in half_width))

    @property
    def dim(self) -> int:
        return len(self.num_points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.num_points

    @property
    def size(self) -> int:
        return int(np.prod(self.num_points))

    @cached_property
    def spacing(self) -> tuple[float, ...]:
        return tuple(2.0 * L / n for n, L in zip(self.num_points, self.half_width))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(-L + h * np.arange(n)
                     for n, L, h in zip(self.num_points, self.half_width, self.spacing))

    @cached_property
    def frequencies(self) -> tuple[np.ndarray, ...]:
        """Angular frequency lattice per axis, in DFT order."""
        return tuple(2.0 * np.pi * np.fft.fftfreq(n, h)
                     for n, h in zip(self.num_points, self.spacing))

    @cached_property
    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def freq_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.frequencies, indexing="ij"))

    @cached_property
    def r2(self) -> np.ndarray:
        return sum(x * x for x in self.mesh)

    @cached_property
    def xi2(self) -> np.ndarray:
        return sum(k * k for k in self.freq_mesh)

    def broadcast_axis(self, j: int, values: np.ndarray) -> np.ndarray:
        """Reshape a 1D per-axis array so it broadcasts along axis ``j``."""
        shape = [1] * self.dim
        shape[j] = -1
        return np.reshape(values, shape)

    def scaled(self, factor: float) -> "Grid":
        """Same number of points, every half-width multiplied by ``factor``."""
        return Grid(self.num_points, tuple(L * factor for L in self.half_width))


@dataclass(frozen=True)
class WaveFunction:
    """Samples of ``u(t, x)`` on a grid together with ``t`` and ``epsilon``."""

    grid: Grid
    values: np.ndarray = field(repr=False)
    time: float = 0.0
    epsilon: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            if values.size == self.grid.size:
                values = values.reshape(self.grid.shape)
            else:
                raise DomainError(
                    f"values have {values.size} entries, grid has {self.grid.size}")
        object.__setattr__(self, "values", values)
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")

    @classmethod
    def from_function(cls, grid: Grid, func, time: float = 0.0,
                      epsilon: float = 1.0) -> "WaveFunction":
        """Sample ``func(*mesh)`` on the grid."""
        return cls(grid, np.asarray(func(*grid.mesh), dtype=complex), time, epsilon)

    def with_values(self, values: np.ndarray, time: float | None = None) -> "WaveFunction":
        return replace(self, values=values, time=self.time if time is None else time)

    def check_finite(self) -> "WaveFunction":
        if not np.all(np.isfinite(self.values)):
            raise NumericalCorruptionError(f"non-finite values at t={self.time}")
        return self

    def copy(self) -> "WaveFunction":
        return replace(self, values=self.values.copy())


def forward_spectral(w: WaveFunction) -> np.ndarray:
    """Unitary DFT coefficients of ``w`` (standard DFT ordering)."""
    w.check_finite()
    return np.fft.fftn(w.values, norm="ortho")


def inverse_spectral(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`forward_spectral`, returning grid values."""
    if not np.all(np.isfinite(coeffs)):
        raise NumericalCorruptionError("non-finite spectral coefficients")
    return np.fft.ifftn(coeffs, norm="ortho")


def spectral_gradient(w: WaveFunction) -> list[np.ndarray]:
    """Components of the gradient of ``w``, differentiated spectrally."""
    c = forward_spectral(w)
    return [np.fft.ifftn(1j * k * c, norm="ortho") for k in w.grid.freq_mesh]


def _integrate(grid: Grid, density: np.ndarray) -> float:
    return float(np.sum(density) * grid.cell_volume)


def norm_L2(w: WaveFunction) -> float:
    return np.sqrt(_integrate(w.grid, np.abs(w.values) ** 2))


def norm_Lp(w: WaveFunction, p: float) -> float:
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    a = np.abs(w.values)
    if np.isinf(p):
        return float(a.max())
    return _integrate(w.grid, a ** p) ** (1.0 / p)


def norm_grad_L2(w: WaveFunction) -> float:
    c = forward_spectral(w)
    return np.sqrt(_integrate(w.grid, w.grid.xi2 * np.abs(c) ** 2))


def norm_x_L2(w: WaveFunction) -> float:
    return np.sqrt(_integrate(w.grid, w.grid.r2 * np.abs(w.values) ** 2))


def norm_Sigma(w: WaveFunction) -> float:
    """``||f||_L2 + ||grad f||_L2 + ||x f||_L2``."""
    return norm_L2(w) + norm_grad_L2(w) + norm_x_L2(w)


def boundary_mass(w: WaveFunction, fraction: float = 0.1) -> float:
    """Fraction of the mass in the outer ``fraction`` of the box (any axis)."""
    rho = np.abs(w.values) ** 2
    total = rho.sum()
    if total == 0:
        return 0.0
    outer = np.zeros(w.grid.shape, dtype=bool)
    for x, L in zip(w.grid.mesh, w.grid.half_width):
        outer |= np.abs(x) > (1.0 - fraction) * L
    return float(rho[outer].sum() / total)


def spectral_tail(w: WaveFunction, fraction: float = 1.0 / 3.0) -> float:
    """Fraction of the mass in the outer ``fraction`` of the frequency lattice."""
    power = np.abs(forward_spectral(w)) ** 2
    total = power.sum()
    if total == 0:
        return 0.0
    outer = np.zeros(w.grid.shape, dtype=bool)
    for k, h in zip(w.grid.freq_mesh, w.grid.spacing):
        outer |= np.abs(k) > (1.0 - fraction) * np.pi / h
    return float(power[outer].sum() / total)


def _chirp(m: np.ndarray, scale: float, n: int) -> np.ndarray:
    # exp(i pi scale m^2 / n); the integer part of scale is reduced exactly
    m2 = m.astype(np.int64) ** 2
    whole = np.floor(scale)
    frac = scale - whole
    k = (int(whole) * (m2 % (2 * n))) % (2 * n) if whole else 0
    return np.exp(1j * np.pi * (k + frac * m2.astype(float)) / n)


def _chirp_z(c: np.ndarray, scale: float, axis: int) -> np.ndarray:
    """``X_k = sum_j c_j exp(2 i pi scale j k / n)`` along ``axis`` (Bluestein)."""
    n = c.shape[axis]
    shape = [1] * c.ndim
    shape[axis] = -1
    j = np.arange(n)
    wj = _chirp(j, scale, n)
    size = sfft.next_fast_len(2 * n - 1)
    kern = np.zeros(size, dtype=complex)
    kern[:n] = np.conj(wj)
    kern[size - n + 1:] = np.conj(wj[1:][::-1])
    a = sfft.fft(c * wj.reshape(shape), size, axis=axis)
    conv = sfft.ifft(a * sfft.fft(kern).reshape(shape), axis=axis)
    conv = np.take(conv, j, axis=axis)
    return conv * wj.reshape(shape)


def _resample_axis(values: np.ndarray, axis: int, n: int, L: float, h: float,
                   scale: float, offset: float) -> np.ndarray:
    # Evaluates the trigonometric interpolant at y_j = scale * x_j + offset
    # with a chirp-z transform over the centred frequency range.
    c = np.fft.fftshift(np.fft.fft(values, axis=axis, norm="ortho"), axes=axis)
    kk = np.arange(n) - n // 2
    xi = 2.0 * np.pi * kk / (n * h)
    y0 = -scale * L + offset
    shape = [1] * values.ndim
    shape[axis] = -1
    c = c * np.exp(1j * xi * (y0 + L)).reshape(shape)
    out = _chirp_z(c, scale, axis)
    j = np.arange(n)
    factor = np.exp(-1j * np.pi * j * scale) / np.sqrt(n)
    # points mapped outside the fundamental box are treated as zero, not wrapped
    y = y0 + j * scale * h
    factor[np.abs(y) >= L] = 0.0
    return out * factor.reshape(shape)


def affine_resample(w: WaveFunction, scale: float | Sequence[float],
                    offset: float | Sequence[float] = 0.0) -> np.ndarray:
    """Values of the band-limited interpolant of ``w`` at ``scale * x + offset``.

    Points mapped outside the box ``[-L, L)`` get the value zero (no
    periodic wrap-around); callers keep the data localized. A pure offset
    (``scale == 1``) is a spectral phase shift and stays periodic.
    """
    g = w.grid
    scales = np.broadcast_to(np.asarray(scale, dtype=float), (g.dim,))
    offsets = np.broadcast_to(np.asarray(offset, dtype=float), (g.dim,))
    out = w.values
    for j in range(g.dim):
        if scales[j] == 1.0 and offsets[j] == 0.0:
            continue
        if scales[j] == 1.0:
            c = np.fft.fft(out, axis=j)
            out = np.fft.ifft(c * g.broadcast_axis(j, np.exp(1j * g.frequencies[j] * offsets[j])), axis=j)
            continue
        out = _resample_axis(out, j, g.num_points[j], g.half_width[j], g.spacing[j],
                             scales[j], offsets[j])
    return np.array(out, dtype=complex, copy=True)


def shift(w: WaveFunction, displacement: Sequence[float], max_boundary_mass: float = 1e-8) -> np.ndarray:
    """Values of ``x -> w(x + displacement)`` via a spectral phase shift."""
    out = affine_resample(w, 1.0, displacement)
    moved = w.with_values(out)
    if boundary_mass(moved) > max_boundary_mass and boundary_mass(moved) > boundary_mass(w):
        raise BoundaryMassError(
            f"shift by {tuple(displacement)} pushes mass to the box edge")
    return out
