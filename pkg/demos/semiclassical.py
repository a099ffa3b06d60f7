"""Semiclassical focusing in a harmonic trap.

At t = pi/(2 omega) every ray passes through the origin and the linear
solution is the (rescaled) Fourier transform of the datum. Before the focus
the WKB-type approximation improves as epsilon decreases, also with the
critical nonlinearity lambda = epsilon^2. The boundary-layer driver shows
that a concentrating datum follows the rescaled free NLS on |t| <= 2 eps.

    python demos/semiclassical.py      # about half a minute
"""
from quadnls.scenarios.drivers import driver_boundary_layer, driver_refocusing

focus = driver_refocusing()
print(focus.table())
print(focus.verdicts)

layer = driver_boundary_layer()
print(layer.table())
print(layer.verdicts)
