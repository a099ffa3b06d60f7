"""Built-in invariant suite (``quadnls check``).

Small, fast versions of the structural identities the library relies on.
Each check returns a :class:`CheckResult` with the measured value and the
tolerance it was held to.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ..grid import Grid, WaveFunction, norm_L2
from ..nonlinearity import Nonlinearity
from ..observables import apply_H, apply_J, energy, vector_norm_sq
from ..potential import QuadraticPotential, phase_functions
from ..propagator import mehler_propagate
from ..solver import SolverConfig, evolve, ground_state_residual, ground_state_proxy

__all__ = ["CheckResult", "run_checks", "CHECKS"]


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value < self.tolerance)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<28s} {self.value:.3e} (tol {self.tolerance:.0e}, {self.seconds:.2f}s)"


def _gaussian(grid, center=0.4, width=1.0, k=0.7, eps=1.0):
    x = grid.axes[0]
    vals = np.exp(-0.5 * ((x - center) / width) ** 2 + 1j * k * x)
    return WaveFunction(grid, vals, 0.0, eps)


def _rel(a: WaveFunction, b: WaveFunction) -> float:
    return norm_L2(a.with_values(a.values - b.values)) / norm_L2(a)


def check_wronskian(samples: int = 10_000, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    delta = rng.choice([-1, 0, 1], samples)
    omega = rng.uniform(0.1, 3.0, samples)
    t = rng.uniform(-3.0, 3.0, samples)
    g, h = phase_functions(delta, omega, t)
    # relative to the size of the terms, which grow like cosh^2 on repulsive axes
    scale = h ** 2 + np.abs(delta) * omega ** 2 * g ** 2
    return float(np.max(np.abs(-delta * omega ** 2 * g ** 2 - h ** 2 + 1.0) / scale))


def check_group_law() -> float:
    grid = Grid.create(1, 1024, 16.0)
    w = _gaussian(grid)
    worst = 0.0
    for pot in (QuadraticPotential.free(), QuadraticPotential.harmonic(1.0),
                QuadraticPotential.repulsive(0.5)):
        a = mehler_propagate(mehler_propagate(w, 0.7, pot), 0.5, pot)
        b = mehler_propagate(w, 1.2, pot)
        worst = max(worst, _rel(b, a), abs(norm_L2(b) / norm_L2(w) - 1.0))
    return worst


def check_revival() -> float:
    worst = 0.0
    for eps in (1.0, 0.1):
        grid = Grid.create(1, 2048, 12.0)
        w = _gaussian(grid, k=0.7 / eps, eps=eps)
        u = mehler_propagate(w, 2 * math.pi, QuadraticPotential.harmonic(1.0))
        worst = max(worst, norm_L2(u.with_values(u.values + w.values)) / norm_L2(w))
    return worst


def check_heisenberg() -> float:
    grid = Grid.create(1, 1024, 16.0)
    w = _gaussian(grid)
    worst = 0.0
    for pot in (QuadraticPotential.harmonic(1.0), QuadraticPotential.repulsive(0.5)):
        j0 = vector_norm_sq(w, apply_J(w, 0.0, pot))
        h0 = vector_norm_sq(w, apply_H(w, 0.0, pot))
        for t in (0.5, 1.0, 1.5):
            u = mehler_propagate(w, t, pot)
            worst = max(worst, abs(vector_norm_sq(u, apply_J(u, t, pot)) / j0 - 1.0),
                        abs(vector_norm_sq(u, apply_H(u, t, pot)) / h0 - 1.0))
    return worst


def _nonlinear_run():
    grid = Grid.create(1, 1024, 16.0)
    w = _gaussian(grid)
    pot, nl = QuadraticPotential.harmonic(1.0), Nonlinearity(1.0, 1.0)
    return w, evolve(w, 1.0, pot, nl, SolverConfig(dt_initial=1e-3)).final_state, pot, nl


def check_mass() -> float:
    w, u, _, _ = _nonlinear_run()
    return abs(norm_L2(u) ** 2 / norm_L2(w) ** 2 - 1.0)


def check_energy() -> float:
    w, u, pot, nl = _nonlinear_run()
    return abs(energy(u, pot, nl) / energy(w, pot, nl) - 1.0)


def check_ground_state() -> float:
    grid = Grid.create(1, 512, 16.0)
    nl = Nonlinearity(-1.0, 1.0)
    return ground_state_residual(ground_state_proxy(grid, nl), nl)


# name -> (function, tolerance)
CHECKS = {
    "wronskian_identity": (check_wronskian, 1e-12),
    "mehler_group_law": (check_group_law, 1e-8),
    "harmonic_revival": (check_revival, 1e-6),
    "heisenberg_constancy": (check_heisenberg, 1e-8),
    "mass_conservation": (check_mass, 1e-10),
    "energy_conservation": (check_energy, 1e-6),
    "ground_state_residual": (check_ground_state, 1e-8),
}


def run_checks(names=None) -> list[CheckResult]:
    out = []
    for name in names or CHECKS:
        fn, tol = CHECKS[name]
        t0 = time.perf_counter()
        value = float(fn())
        out.append(CheckResult(name, value, tol, time.perf_counter() - t0))
    return out
