"""Focusing quintic NLS in 1D: how a quadratic potential changes blow-up.

The datum 1.4 exp(-x^2) has negative energy, so without potential the
virial ||x u||^2 is concave and the solution must blow up. A harmonic trap
can only make it happen sooner (before pi/(2 omega)); a strong enough
repulsive potential disperses the mass and the run completes.

    python demos/blowup_and_potentials.py
"""
import math

import numpy as np

from quadnls import Grid, Nonlinearity, QuadraticPotential, SolverConfig, WaveFunction, evolve
from quadnls.observables import blowup_criteria_report

grid = Grid.create(1, 2048, 16.0)
x = grid.axes[0]
u0 = WaveFunction(grid, 1.4 * np.exp(-x ** 2))
nl = Nonlinearity(-1.0, 2.0)

report = blowup_criteria_report(u0, QuadraticPotential.free(), nl)
print(f"free energy E0 = {report.energy_free:.5f} (negative: virial argument applies)")

free = evolve(u0, 1.0, QuadraticPotential.free(), nl, SolverConfig(record_every=0.02))
print(f"V = 0:            {free.status:18s} bracket {free.bracket}")
t, y = free.series("t"), free.series("virial")
print("virial y(t):", " ".join(f"{v:.3f}" for v in y[::5]))

for omega in (0.5, 1.0):
    run = evolve(u0, 1.0, QuadraticPotential.harmonic(omega), nl)
    print(f"harmonic w={omega:<4g}  {run.status:18s} bracket {run.bracket}"
          f"  (bound pi/2w = {math.pi / (2 * omega):.3f})")

# the repulsive run is integrated in the lens frame, where time is finite
for omega in (1.0, 4.0, 8.0):
    cfg = SolverConfig(frame="lens", record_every=0.1)
    run = evolve(u0, 10.0 / omega, QuadraticPotential.repulsive(omega), nl, cfg)
    print(f"repulsive w={omega:<4g} {run.status:18s} reached t = {run.final_time:.3f}")
