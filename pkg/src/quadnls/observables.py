"""Monitored functionals of a wavefunction.

Everything here is a pure function of a :class:`WaveFunction` plus the
potential and nonlinearity. Time-dependent operators take ``t`` as the time
elapsed since the origin of the linear flow (``w.time`` for solver output).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np

from .errors import DomainError
from .grid import (WaveFunction, boundary_mass, forward_spectral, norm_grad_L2,
                   norm_L2, norm_Lp, norm_Sigma, norm_x_L2, spectral_gradient,
                   spectral_tail)
from .nonlinearity import Nonlinearity
from .potential import QuadraticPotential, phase_functions
from .propagator import inverse_propagate

__all__ = [
    "ObservableRecord",
    "ScatteringResult",
    "BlowupCriteriaReport",
    "energy_terms",
    "energy",
    "apply_J",
    "apply_H",
    "apply_J_factorized",
    "vector_norm_sq",
    "virial",
    "im_moment",
    "gn_constant",
    "weighted_GN_check",
    "pseudo_conformal_functional",
    "E1_E2",
    "blowup_criteria_report",
    "scattering_from_pullbacks",
    "scattering_monitor",
    "sigma0",
    "delta_p",
    "record",
]


H_ZERO_TOL = 1e-12


def sigma0(n: int) -> float:
    """Short-range threshold ``(2 - n + sqrt(n^2 + 12 n + 4)) / (4 n)``."""
    return (2.0 - n + math.sqrt(n * n + 12.0 * n + 4.0)) / (4.0 * n)


def delta_p(n: int, p: float) -> float:
    """Gagliardo--Nirenberg exponent ``n (1/2 - 1/p)``."""
    if np.isinf(p):
        return n / 2.0
    return n * (0.5 - 1.0 / p)


def _power_integral(w: WaveFunction, sigma: float) -> float:
    """``||u||_{L^(2 sigma + 2)}^(2 sigma + 2)``."""
    return float(np.sum(np.abs(w.values) ** (2.0 * sigma + 2.0)) * w.grid.cell_volume)


def energy_terms(w: WaveFunction, pot: QuadraticPotential, nl: Nonlinearity) -> tuple[float, float, float]:
    """``(kinetic, potential, nonlinear)`` parts of the energy."""
    eps = w.epsilon
    kinetic = 0.5 * eps ** 2 * norm_grad_L2(w) ** 2
    rho = np.abs(w.values) ** 2
    potential = float(np.sum(pot(*w.grid.mesh) * rho) * w.grid.cell_volume)
    nonlinear = nl.lam / (nl.sigma + 1.0) * _power_integral(w, nl.sigma) if nl.lam else 0.0
    return kinetic, potential, nonlinear


def energy(w: WaveFunction, pot: QuadraticPotential, nl: Nonlinearity) -> float:
    return float(sum(energy_terms(w, pot, nl)))


def apply_J(w: WaveFunction, t: float, pot: QuadraticPotential) -> list[np.ndarray]:
    """Components ``J_j(t) w = -delta w^2 g x_j w / eps + i h d_j w``."""
    eps = w.epsilon
    g, h = pot.phase_functions(t)
    g, h = np.atleast_1d(g), np.atleast_1d(h)
    grad = spectral_gradient(w)
    return [-d * om ** 2 * g[j] * w.grid.mesh[j] * w.values / eps + 1j * h[j] * grad[j]
            for j, (d, om) in enumerate(zip(pot.delta, pot.omega))]


def apply_H(w: WaveFunction, t: float, pot: QuadraticPotential) -> list[np.ndarray]:
    """Components ``H_j(t) w = h x_j w + i eps g d_j w``."""
    eps = w.epsilon
    g, h = pot.phase_functions(t)
    g, h = np.atleast_1d(g), np.atleast_1d(h)
    grad = spectral_gradient(w)
    return [h[j] * w.grid.mesh[j] * w.values + 1j * eps * g[j] * grad[j]
            for j in range(w.grid.dim)]


def apply_J_factorized(w: WaveFunction, t: float, pot: QuadraticPotential) -> list[np.ndarray]:
    """``J_j(t) = i h e^{i phi/eps} d_j (e^{-i phi/eps} .)`` with ``phi = -delta w^2 g |x|^2 / (2h)``.

    Needs ``h_j(t) != 0`` and a grid fine enough for the chirp.
    """
    eps = w.epsilon
    g, h = pot.phase_functions(t)
    g, h = np.atleast_1d(g), np.atleast_1d(h)
    if np.any(np.abs(h) < H_ZERO_TOL):
        raise DomainError("factorized form needs h_j(t) != 0")
    phi = sum(-d * om ** 2 * g[j] / (2.0 * h[j]) * w.grid.mesh[j] ** 2
              for j, (d, om) in enumerate(zip(pot.delta, pot.omega)))
    phase = np.exp(1j * phi / eps)
    grad = spectral_gradient(w.with_values(w.values / phase))
    return [1j * h[j] * phase * grad[j] for j in range(w.grid.dim)]


def vector_norm_sq(w: WaveFunction, components: Sequence[np.ndarray]) -> float:
    return float(sum(np.sum(np.abs(c) ** 2) for c in components) * w.grid.cell_volume)


def virial(w: WaveFunction) -> float:
    """``y = ||x u||^2``."""
    return norm_x_L2(w) ** 2


def im_moment(w: WaveFunction) -> float:
    """``Im int conj(u) x . eps grad u``."""
    grad = spectral_gradient(w)
    s = sum(np.sum(np.conj(w.values) * x * d) for x, d in zip(w.grid.mesh, grad))
    return float(np.imag(s) * w.grid.cell_volume * w.epsilon)


def gn_constant(n: int, p: float) -> float:
    """Gagliardo--Nirenberg ratio of the unit Gaussian in dimension ``n``.

    Scale invariant, so every Gaussian ``exp(-|x|^2 / (2 s^2))`` gives the same
    value; used as the calibrated constant of :func:`weighted_GN_check`.
    """
    d = delta_p(n, p)
    l2 = math.pi ** (n / 4.0)
    grad = math.sqrt(0.5 * n) * l2
    lp = 1.0 if np.isinf(p) else (2.0 * math.pi / p) ** (n / (2.0 * p))
    return lp / (l2 ** (1.0 - d) * grad ** d)


def _check_gn_exponent(n: int, p: float):
    if p < 2:
        raise DomainError(f"p must be >= 2, got {p}")
    if n == 2 and np.isinf(p):
        raise DomainError("p must be finite in dimension 2")
    if n >= 3 and p >= 2.0 * n / (n - 2):
        raise DomainError(f"p must be below {2.0 * n / (n - 2)} in dimension {n}")


def weighted_GN_check(w: WaveFunction, t: float, pot: QuadraticPotential, p: float):
    """``(lhs, rhs, lhs / rhs)`` for the weighted Gagliardo--Nirenberg bound.

    ``rhs = C prod_j |h_j(t)|^(-delta(p)/n) ||w||^(1-delta(p)) ||J(t) w||^delta(p)``
    with ``C`` from :func:`gn_constant`. The weight is what the factorized
    form of ``J`` gives: ``|d_j (e^{-i phi} w)| = |J_j w| / |h_j|``.
    """
    n = w.grid.dim
    _check_gn_exponent(n, p)
    d = delta_p(n, p)
    _, h = pot.phase_functions(t)
    weight = float(np.prod(np.abs(np.atleast_1d(h)) ** (-d / n)))
    lhs = norm_Lp(w, p)
    jn = math.sqrt(vector_norm_sq(w, apply_J(w, t, pot))) if d else 1.0
    rhs = gn_constant(n, p) * weight * norm_L2(w) ** (1.0 - d) * jn ** d
    return lhs, rhs, (lhs / rhs if rhs > 0 else float("inf"))


def pseudo_conformal_functional(w: WaveFunction, t: float, nl: Nonlinearity,
                                pot: QuadraticPotential | None = None) -> float:
    """``1/2 ||(x + i eps t grad) u||^2 + lam t^2 / (sigma + 1) ||u||^(2 sigma + 2)``.

    Conserved when ``sigma = 2/n``; only defined without potential.
    """
    if pot is not None and not (pot.is_free and pot.is_gauge_free):
        raise DomainError("pseudo-conformal functional needs V = 0; use E1_E2")
    galilean = apply_H(w, t, pot or QuadraticPotential.free(w.grid.dim))
    value = 0.5 * vector_norm_sq(w, galilean)
    if nl.lam:
        value += nl.lam / (nl.sigma + 1.0) * t * t * _power_integral(w, nl.sigma)
    return value


def E1_E2(w: WaveFunction, t: float, pot: QuadraticPotential, nl: Nonlinearity) -> tuple[float, float]:
    """Split of the energy following the isotropic (repulsive) harmonic flow.

    ``E1 = 1/2 ||eps J u||^2 + lam/(sigma+1) h^2 ||u||^(2sigma+2)`` and
    ``E2 = delta (w^2/2 ||H u||^2 + lam/(sigma+1) (w g)^2 ||u||^(2sigma+2))``.
    """
    sig = pot.isotropic_signature
    if sig is None or not pot.is_gauge_free:
        raise DomainError("E1/E2 need V = +-w^2 |x|^2 / 2 (isotropic, gauge-free)")
    d, om = sig
    eps = w.epsilon
    g, h = phase_functions(d, om, t)
    nl_term = nl.lam / (nl.sigma + 1.0) * _power_integral(w, nl.sigma) if nl.lam else 0.0
    e1 = 0.5 * eps ** 2 * vector_norm_sq(w, apply_J(w, t, pot)) + h * h * nl_term
    e2 = d * (0.5 * om ** 2 * vector_norm_sq(w, apply_H(w, t, pot)) + (om * g) ** 2 * nl_term)
    return float(e1), float(e2)


@dataclass(frozen=True)
class BlowupCriteriaReport:
    """Sufficient blow-up conditions evaluated by quadrature on ``u0``.

    Conditions that do not apply to the given potential are ``None``.
    """

    energy_free: float
    energy_potential: float
    kinetic: float
    nonlinear_term: float
    virial: float
    im_moment: float
    focusing_supercritical: bool
    glassey: bool
    harmonic: bool | None = None
    harmonic_time_bound: float | None = None
    repulsive_one_sided: bool | None = None
    repulsive_two_sided: bool | None = None

    def holds(self) -> list[str]:
        names = ["glassey", "harmonic", "repulsive_one_sided", "repulsive_two_sided"]
        return [k for k in names if getattr(self, k)]

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def blowup_criteria_report(u0: WaveFunction, pot: QuadraticPotential,
                           nl: Nonlinearity) -> BlowupCriteriaReport:
    """Evaluate the virial-type sufficient conditions for finite-time blow-up."""
    eps = u0.epsilon
    kinetic = 0.5 * eps ** 2 * norm_grad_L2(u0) ** 2
    nl_term = nl.lam / (nl.sigma + 1.0) * _power_integral(u0, nl.sigma) if nl.lam else 0.0
    e0 = kinetic + nl_term
    y = virial(u0)
    im = im_moment(u0)
    focusing = nl.lam < 0 and nl.l2_supercritical
    _, potential_term, _ = energy_terms(u0, pot, nl)
    report = dict(
        energy_free=e0, energy_potential=e0 + potential_term, kinetic=kinetic,
        nonlinear_term=nl_term, virial=y, im_moment=im,
        focusing_supercritical=focusing, glassey=bool(focusing and e0 < 0),
    )
    sig = pot.isotropic_signature if pot.is_gauge_free else None
    if sig is not None:
        d, om = sig
        if d == 1:
            report["harmonic"] = bool(focusing and e0 + potential_term <= 0.5 * om ** 2 * y)
            report["harmonic_time_bound"] = math.pi / (2.0 * om)
        else:
            report["repulsive_one_sided"] = bool(focusing and e0 < -0.5 * om ** 2 * y)
            report["repulsive_two_sided"] = bool(
                focusing and e0 < -0.5 * om ** 2 * y - om * abs(im))
    return BlowupCriteriaReport(**report)


@dataclass
class ScatteringResult:
    times: np.ndarray
    states: list = field(repr=False)
    differences: np.ndarray
    converged: bool
    tolerance: float

    @property
    def limit(self) -> WaveFunction:
        """Estimate of the asymptotic state (last checkpoint)."""
        return self.states[-1]

    def difference_table(self) -> np.ndarray:
        """Pairwise Sigma-norm differences between all checkpoints."""
        k = len(self.states)
        table = np.zeros((k, k))
        for i in range(k):
            for j in range(i + 1, k):
                d = self.states[i].with_values(self.states[i].values - self.states[j].values)
                table[i, j] = table[j, i] = norm_Sigma(d)
        return table


def scattering_from_pullbacks(times, states: Sequence[WaveFunction],
                              tol: float = 1e-4) -> ScatteringResult:
    """Convergence test for pulled-back states ``U_V(-t_k) u(t_k)``.

    Converged when consecutive Sigma-differences decrease and the last one
    is below ``tol``.
    """
    times = np.asarray(times, dtype=float)
    diffs = np.array([
        norm_Sigma(a.with_values(b.values - a.values)) for a, b in zip(states[:-1], states[1:])
    ])
    decreasing = bool(np.all(np.diff(diffs) < 0)) if diffs.size > 1 else True
    converged = bool(diffs.size >= 1 and decreasing and diffs[-1] < tol)
    return ScatteringResult(times, list(states), diffs, converged, tol)


def scattering_monitor(run, pot: QuadraticPotential, checkpoints=None,
                       tol: float = 1e-4) -> ScatteringResult:
    """Pull the snapshots of a completed run back with ``U_V(-t)``.

    ``run`` is a :class:`~quadnls.solver.RunOutcome` or a sequence of
    wavefunctions. ``checkpoints`` optionally selects snapshot times.
    """
    if pot.classification().fully_harmonic and not pot.is_free:
        raise DomainError("no scattering for a fully harmonic potential")
    if not (pot.is_free or pot.classification().has_repulsive_axis):
        raise DomainError("scattering needs a repulsive axis or a free potential")
    if getattr(run, "status", "completed") != "completed":
        raise DomainError("scattering needs a completed run")
    if getattr(run, "pullbacks", None):
        times = np.asarray(run.checkpoint_times, dtype=float)
        states = list(run.pullbacks)
    else:
        snapshots = list(getattr(run, "snapshots", run))
        times = np.array([s.time for s in snapshots])
        states = [inverse_propagate(s, s.time, pot) for s in snapshots]
    if checkpoints is not None:
        keep = [i for i, tk in enumerate(times) if np.any(np.isclose(tk, checkpoints, atol=1e-9))]
        states = [states[i] for i in keep]
        times = times[keep]
    return scattering_from_pullbacks(times, states, tol)


@dataclass
class ObservableRecord:
    """One time sample of all monitored functionals (one CSV row)."""

    t: float
    mass: float
    energy: float
    kinetic: float
    potential: float
    nonlinear: float
    J_norm_sq: float
    H_norm_sq: float
    virial: float
    E1: float
    E2: float
    grad_norm: float
    Linf: float
    boundary_mass: float
    spectral_tail: float
    Lp: dict = field(default_factory=dict)

    def columns(self) -> list[str]:
        base = [f.name for f in fields(self) if f.name != "Lp"]
        return base + [f"L{p:g}" for p in sorted(self.Lp)]

    def row(self) -> list[float]:
        base = [getattr(self, f.name) for f in fields(self) if f.name != "Lp"]
        return base + [self.Lp[p] for p in sorted(self.Lp)]


def record(w: WaveFunction, pot: QuadraticPotential, nl: Nonlinearity,
           ps: Sequence[float] = (), t: float | None = None) -> ObservableRecord:
    """Evaluate every monitored functional of ``w``.

    ``t`` is the time used in ``J(t)``, ``H(t)`` (defaults to ``w.time``).
    """
    t = w.time if t is None else t
    kin, potl, nonl = energy_terms(w, pot, nl)
    lin = pot.without_gauge()
    jn = vector_norm_sq(w, apply_J(w, t, lin))
    hn = vector_norm_sq(w, apply_H(w, t, lin))
    try:
        e1, e2 = E1_E2(w, t, pot, nl)
    except DomainError:
        e1 = e2 = float("nan")
    grad = norm_grad_L2(w)
    return ObservableRecord(
        t=float(w.time), mass=norm_L2(w) ** 2, energy=kin + potl + nonl, kinetic=kin,
        potential=potl, nonlinear=nonl, J_norm_sq=jn, H_norm_sq=hn, virial=virial(w),
        E1=e1, E2=e2, grad_norm=grad, Linf=norm_Lp(w, np.inf),
        boundary_mass=boundary_mass(w), spectral_tail=spectral_tail(w),
        Lp={float(p): norm_Lp(w, p) for p in ps},
    )
