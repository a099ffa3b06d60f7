"""Second-order polynomial potentials in canonical per-axis form.

After an orthonormal change of basis and a shift of the origin, every
potential ``x.a.x + b.x + c`` becomes

    V(x) = sum_j ( delta_j * omega_j**2 / 2 * x_j**2 + bt_j * x_j ) + ct

with ``delta_j`` in {-1, 0, +1} and ``bt_j`` nonzero only on free axes.
The classical phase functions ``g_j, h_j`` solve ``g' = h``,
``h' = -delta * omega**2 * g`` with ``g(0) = 0``, ``h(0) = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "QuadraticPotential",
    "PotentialClassification",
    "canonicalize",
    "phase_functions",
    "classical_trajectory",
    "rationally_dependent",
]

ZERO_EIGENVALUE_RTOL = 1e-12
RATIONAL_MAX_DENOMINATOR = 64
RATIONAL_TOL = 1e-9


@dataclass(frozen=True)
class PotentialClassification:
    omega_plus: float
    omega_minus: float
    has_repulsive_axis: bool
    fully_harmonic: bool
    rationally_dependent_frequencies: bool


@dataclass(frozen=True)
class QuadraticPotential:
    """Canonical quadratic potential, one ``(delta, omega)`` pair per axis.

    ``omega`` is stored as 0.0 on free axes. ``linear`` holds the residual
    Stark coefficients (free axes only) and ``constant`` the residual
    constant; both are removed by gauges before exact propagation.
    """

    delta: tuple[int, ...]
    omega: tuple[float, ...]
    linear: tuple[float, ...] = ()
    constant: float = 0.0

    def __post_init__(self):
        n = len(self.delta)
        if len(self.omega) != n:
            raise DomainError("delta and omega must have the same length")
        linear = tuple(float(b) for b in self.linear) if self.linear else (0.0,) * n
        if len(linear) != n:
            raise DomainError("linear coefficients must match the dimension")
        delta = tuple(int(d) for d in self.delta)
        omega = []
        for d, w, b in zip(delta, self.omega, linear):
            if d not in (-1, 0, 1):
                raise DomainError(f"delta must be -1, 0 or +1, got {d}")
            if d != 0 and not w > 0:
                raise DomainError(f"omega must be positive on non-free axes, got {w}")
            if d != 0 and b != 0:
                raise DomainError("linear terms are only allowed on free axes")
            omega.append(float(w) if d != 0 else 0.0)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "omega", tuple(omega))
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "constant", float(self.constant))

    @classmethod
    def free(cls, dim: int = 1) -> "QuadraticPotential":
        return cls((0,) * dim, (0.0,) * dim)

    @classmethod
    def harmonic(cls, omega: float, dim: int = 1) -> "QuadraticPotential":
        return cls((1,) * dim, (float(omega),) * dim)

    @classmethod
    def repulsive(cls, omega: float, dim: int = 1) -> "QuadraticPotential":
        return cls((-1,) * dim, (float(omega),) * dim)

    @classmethod
    def stark(cls, field: Sequence[float]) -> "QuadraticPotential":
        field = tuple(float(e) for e in field)
        return cls((0,) * len(field), (0.0,) * len(field), field)

    @property
    def dim(self) -> int:
        return len(self.delta)

    @property
    def is_free(self) -> bool:
        return all(d == 0 for d in self.delta)

    @property
    def is_gauge_free(self) -> bool:
        return all(b == 0 for b in self.linear) and self.constant == 0

    @property
    def isotropic_signature(self) -> tuple[int, float] | None:
        """``(delta, omega)`` if every axis carries the same nonzero pair."""
        d0, w0 = self.delta[0], self.omega[0]
        if d0 == 0 or any(d != d0 or w != w0 for d, w in zip(self.delta, self.omega)):
            return None
        return d0, w0

    def without_gauge(self) -> "QuadraticPotential":
        return QuadraticPotential(self.delta, self.omega)

    def __call__(self, *coords: np.ndarray) -> np.ndarray:
        """Evaluate ``V`` on coordinate arrays (one per axis)."""
        if len(coords) != self.dim:
            raise DomainError(f"expected {self.dim} coordinate arrays")
        out = self.constant
        for d, w, b, x in zip(self.delta, self.omega, self.linear, coords):
            out = out + 0.5 * d * w * w * x * x + b * x
        return np.asarray(out, dtype=float)

    def quadratic_form(self) -> np.ndarray:
        return np.diag([0.5 * d * w * w for d, w in zip(self.delta, self.omega)])

    def classification(self) -> PotentialClassification:
        plus = [w for d, w in zip(self.delta, self.omega) if d == 1]
        minus = [w for d, w in zip(self.delta, self.omega) if d == -1]
        return PotentialClassification(
            omega_plus=max(plus, default=0.0),
            omega_minus=max(minus, default=0.0),
            has_repulsive_axis=bool(minus),
            fully_harmonic=len(plus) == self.dim,
            rationally_dependent_frequencies=rationally_dependent(plus),
        )

    def phase_functions(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Per-axis ``(g_j(t), h_j(t))``."""
        return phase_functions(np.array(self.delta), np.array(self.omega), t)


def rationally_dependent(freqs: Sequence[float]) -> bool:
    """Pairwise rational-dependence heuristic.

    ``w_i / w_j`` counts as rational when a continued-fraction convergent with
    denominator at most 64 matches it to 1e-9 (relative). Undecidable in
    floating point, so this is a declared heuristic.
    """
    for a, b in combinations(freqs, 2):
        r = a / b
        q = Fraction(r).limit_denominator(RATIONAL_MAX_DENOMINATOR)
        if abs(r - float(q)) <= RATIONAL_TOL * abs(r):
            return True
    return False


def canonicalize(a, b=None, c: float = 0.0):
    """Reduce ``V(x) = x.a.x + b.x + c`` to canonical per-axis form.

    Returns ``(potential, basis, origin)`` where the columns of ``basis``
    are the new orthonormal axes and ``origin`` is the new origin in the
    original coordinates, so ``V(origin + basis @ z) = potential(z)``.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    n = a.shape[0]
    if a.shape != (n, n):
        raise DomainError("quadratic form must be a square matrix")
    scale = max(np.abs(a).max(), 1.0)
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-14 * scale):
        raise DomainError("quadratic form must be symmetric")
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float).reshape(n)

    eigvals, basis = np.linalg.eigh(0.5 * (a + a.T))
    # keep an already-diagonal form in its own axis order
    if np.allclose(a, np.diag(np.diag(a)), rtol=0, atol=0):
        eigvals, basis = np.diag(a).copy(), np.eye(n)
    top = np.abs(eigvals).max() if n else 0.0
    beta = basis.T @ b
    delta, omega, linear = [], [], []
    z0 = np.zeros(n)
    constant = float(c)
    for j, lam in enumerate(eigvals):
        if top == 0.0 or abs(lam) <= ZERO_EIGENVALUE_RTOL * top:
            delta.append(0)
            omega.append(0.0)
            linear.append(float(beta[j]))
        else:
            delta.append(int(np.sign(lam)))
            omega.append(float(np.sqrt(2.0 * abs(lam))))
            linear.append(0.0)
            z0[j] = -beta[j] / (2.0 * lam)
            constant -= beta[j] ** 2 / (4.0 * lam)
    pot = QuadraticPotential(tuple(delta), tuple(omega), tuple(linear), constant)
    return pot, basis, basis @ z0


def phase_functions(delta, omega, t):
    """Classical phase functions ``(g, h)``.

    ``(sinh(wt)/w, cosh(wt))`` for delta = -1, ``(t, 1)`` for delta = 0 and
    ``(sin(wt)/w, cos(wt))`` for delta = +1. Broadcasts over arrays.
    """
    delta = np.asarray(delta)
    omega = np.asarray(omega, dtype=float)
    t = np.asarray(t, dtype=float)
    delta, omega, t = np.broadcast_arrays(delta, omega, t)
    w = np.where(delta == 0, 1.0, omega)
    wt = w * t
    g = np.select([delta == 1, delta == -1], [np.sin(wt) / w, np.sinh(wt) / w], t)
    h = np.select([delta == 1, delta == -1], [np.cos(wt), np.cosh(wt)], 1.0)
    if g.ndim == 0:
        return float(g), float(h)
    return g, h


def classical_trajectory(x0, xi0, pot: QuadraticPotential, t: float):
    """Hamilton flow of ``|xi|^2/2 + V(x)`` from ``(x0, xi0)`` after time ``t``."""
    x0 = np.asarray(x0, dtype=float).reshape(pot.dim)
    xi0 = np.asarray(xi0, dtype=float).reshape(pot.dim)
    delta = np.array(pot.delta)
    omega = np.array(pot.omega)
    g, h = phase_functions(delta, omega, np.full(pot.dim, float(t)))
    x = x0 * h + xi0 * g
    xi = -delta * omega ** 2 * g * x0 + xi0 * h
    b = np.array(pot.linear)
    x = x - 0.5 * b * t * t
    xi = xi - b * t
    return x, xi
