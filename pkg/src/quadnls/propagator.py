"""Exact linear propagation for canonical quadratic potentials.

The Mehler phase splits as

    S(t, x, y) = c |x|^2 / 2 + |x - y|^2 / (2 g) + c |y|^2 / 2,   c = (h - 1) / g

per axis, so ``U_V(t) = M_c  U_0(g)  M_c`` where ``M_c`` multiplies by
``exp(i c x^2 / (2 eps))`` and ``U_0(g)`` is the free flow at time ``g``,
diagonal in frequency space. The prefactor ``(2 i pi eps g)^(-1/2)`` is the
free kernel's, so its branch is carried by the Fourier multiplier. The chirp
rate ``c`` is ``-w tan(wt/2)`` on harmonic axes and ``w tanh(wt/2)`` on
repulsive ones; the factorization is used directly while ``|w t| <= pi/2``
on every harmonic axis and otherwise by halving the time step.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularTimeError
from .grid import WaveFunction, forward_spectral, inverse_spectral
from .potential import QuadraticPotential, phase_functions

__all__ = [
    "MehlerKernel",
    "mehler_kernel",
    "mehler_propagate",
    "inverse_propagate",
    "dispersion_bound",
    "sampling_ratio",
    "MAX_SPLIT_DEPTH",
]

MAX_SPLIT_DEPTH = 8
SINGULAR_RTOL = 1e-6
_WINDOW = 0.5 * np.pi * (1.0 + 1e-12)


@dataclass(frozen=True)
class MehlerKernel:
    """Per-axis data of the Mehler kernel at one time."""

    t: float
    epsilon: float
    g: np.ndarray
    h: np.ndarray

    @property
    def chirp(self) -> np.ndarray:
        """``(h - 1) / g`` per axis, with its limit 0 at ``g = 0, h = 1``."""
        g, h = self.g, self.h
        out = np.zeros_like(g)
        nz = g != 0
        out[nz] = (h[nz] - 1.0) / g[nz]
        return out

    @property
    def prefactor(self) -> complex:
        """Product of ``(2 i pi eps g_j)^(-1/2)`` on the principal branch."""
        return complex(np.prod((2j * np.pi * self.epsilon * self.g.astype(complex)) ** -0.5))

    def phase(self, x, y) -> np.ndarray:
        """``S(t, x, y)`` for coordinate sequences ``x``, ``y`` (one array per axis)."""
        return sum(((xj ** 2 + yj ** 2) * hj / 2 - xj * yj) / gj
                   for xj, yj, gj, hj in zip(x, y, self.g, self.h))


def mehler_kernel(pot: QuadraticPotential, eps: float, t: float) -> MehlerKernel:
    g, h = pot.phase_functions(t)
    return MehlerKernel(float(t), float(eps), np.atleast_1d(g), np.atleast_1d(h))


def _in_window(pot: QuadraticPotential, t: float) -> bool:
    return all(d != 1 or abs(w * t) <= _WINDOW for d, w in zip(pot.delta, pot.omega))


def _apply_factor(values: np.ndarray, w: WaveFunction, pot: QuadraticPotential, t: float) -> np.ndarray:
    grid = w.grid
    eps = w.epsilon
    kern = mehler_kernel(pot, eps, t)
    c = kern.chirp
    chirp = np.zeros(grid.shape)
    kinetic = np.zeros(grid.shape)
    for j in range(grid.dim):
        chirp = chirp + c[j] * grid.mesh[j] ** 2
        kinetic = kinetic + kern.g[j] * grid.freq_mesh[j] ** 2
    m = np.exp(0.5j * chirp / eps)
    coeffs = np.fft.fftn(values * m, norm="ortho")
    coeffs *= np.exp(-0.5j * eps * kinetic)
    return np.fft.ifftn(coeffs, norm="ortho") * m


def _split_count(pot: QuadraticPotential, t: float) -> int:
    depth = 0
    s = t
    while not _in_window(pot, s):
        depth += 1
        if depth > MAX_SPLIT_DEPTH:
            raise SingularTimeError(
                f"t={t} needs more than {MAX_SPLIT_DEPTH} halvings to avoid a focus")
        s = t / 2 ** depth
    return 2 ** depth


def mehler_propagate(w: WaveFunction, t: float, pot: QuadraticPotential) -> WaveFunction:
    """Apply ``U_V^eps(t)`` exactly (to roundoff) for a gauge-free canonical ``pot``."""
    if pot.dim != w.grid.dim:
        raise DomainError("potential and grid dimensions differ")
    if not pot.is_gauge_free:
        raise DomainError("remove linear/constant terms with a gauge before propagating")
    t = float(t)
    values = w.check_finite().values
    if t != 0.0:
        pieces = _split_count(pot, t)
        for _ in range(pieces):
            values = _apply_factor(values, w, pot, t / pieces)
    else:
        values = inverse_spectral(forward_spectral(w))
    return w.with_values(values, time=w.time + t).check_finite()


def inverse_propagate(w: WaveFunction, t: float, pot: QuadraticPotential) -> WaveFunction:
    """``U_V^eps(-t) w``."""
    return mehler_propagate(w, -t, pot)


def dispersion_bound(pot: QuadraticPotential, eps: float, t: float) -> float:
    """``prod_j (2 pi eps |g_j(t)|)^(-1/2)``; ``inf`` at a focus."""
    g, _ = pot.phase_functions(t)
    g = np.atleast_1d(np.abs(g))
    tol = SINGULAR_RTOL * np.maximum(1.0, 1.0 / np.where(np.array(pot.omega) > 0,
                                                          np.array(pot.omega), 1.0))
    if np.any(g < tol):
        return float("inf")
    return float(np.prod((2.0 * np.pi * eps * g) ** -0.5))


def sampling_ratio(w: WaveFunction, t: float, pot: QuadraticPotential,
                   support_tol: float = 1e-14) -> float:
    """Largest chirp phase advance per cell, in units of pi, over the support of ``w``.

    Values below 1 mean the chirp ``exp(i c x^2 / 2 eps)`` of each direct
    factor is sampled without aliasing where ``w`` carries mass.
    """
    pieces = _split_count(pot, t) if t != 0 else 1
    c = np.abs(mehler_kernel(pot, w.epsilon, t / pieces).chirp)
    rho = np.abs(w.values) ** 2
    mask = rho > support_tol * rho.max() if rho.max() > 0 else np.zeros_like(rho, bool)
    worst = 0.0
    for j in range(w.grid.dim):
        if not mask.any():
            break
        xmax = np.abs(w.grid.mesh[j][mask]).max()
        worst = max(worst, c[j] * xmax * w.grid.spacing[j] / (w.epsilon * np.pi))
    return float(worst)
