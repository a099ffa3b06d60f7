"""Scattering for defocusing cubic NLS with a repulsive potential.

The pullbacks U_V(-t) u(t) converge in Sigma as t grows: the nonlinear
solution behaves like a linear one. The run uses the lens frame, where
lab time t = atanh(omega s)/omega stays finite.

    python demos/scattering.py
"""
from quadnls.scenarios.drivers import driver_scattering

report = driver_scattering(checkpoints=(2, 4, 6, 8, 10, 12, 14))
print(report.table())
for key, value in report.verdicts.items():
    print(f"{key}: {value}")
