"""The lens transform as an oracle for the splitting solver.

For the L2-critical power (sigma = 2/n) the solution in a harmonic trap is
an explicit rescaling of a free solution at warped time tan(omega t)/omega.
We integrate both problems independently and compare.

    python demos/lens_oracle.py
"""
import math

import numpy as np

from quadnls import (Grid, Nonlinearity, QuadraticPotential, SolverConfig, WaveFunction, evolve,
                     harmonic_lens, lens_time, norm_L2)

omega = 1.0
grid = Grid.create(1, 4096, 32.0)
x = grid.axes[0]
u0 = WaveFunction(grid, np.exp(-(x - 0.5) ** 2 / 2))
nl = Nonlinearity(1.0, 2.0)
pot = QuadraticPotential.harmonic(omega)

times = list(np.linspace(0.1, 0.8 * math.pi / 2, 8))
warped = [lens_time(t, omega, 1) for t in times]
cfg = SolverConfig(dt_initial=1e-3)
direct = evolve(u0, times[-1], pot, nl, cfg, checkpoints=times).snapshots
free = evolve(u0, warped[-1], QuadraticPotential.free(), nl, cfg, checkpoints=warped).snapshots

print("    t      s = tan(t)   relative L2 gap")
for t, s, a, b in zip(times, warped, direct, harmonic_lens(free, omega, nl=nl)):
    gap = norm_L2(a.with_values(a.values - b.values)) / norm_L2(a)
    print(f"{t:7.3f}  {s:10.3f}   {gap:.2e}")
