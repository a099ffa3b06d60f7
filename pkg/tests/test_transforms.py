import math

import numpy as np
import pytest

from quadnls.errors import BoundaryMassError, DomainError, ResolutionError
from quadnls.grid import Grid, WaveFunction, norm_L2
from quadnls.nonlinearity import Nonlinearity
from quadnls.potential import QuadraticPotential
from quadnls.propagator import mehler_propagate
from quadnls.solver import SolverConfig, evolve
from quadnls.transforms import (TransformSpec, avron_herbst, harmonic_lens, lens_inverse, lens_time,
                                plane_oscillation_gauge, repulsive_lens, semiclassical_rescale)

FREE = QuadraticPotential.free()


def packet(grid, amp=1.0, c=0.0, w=1.0, k=0.0, eps=1.0, t=0.0):
    x = grid.axes[0]
    return WaveFunction(grid, amp * np.exp(-(x - c) ** 2 / (2 * w * w) + 1j * k * x / eps), t, eps)


def rel(a, b):
    return norm_L2(a.with_values(a.values - b.values)) / norm_L2(b)


def test_identities():
    g = Grid.create(1, 512, 16.0)
    w = packet(g, c=0.3, k=0.4)
    assert np.allclose(avron_herbst(w, [0.0]).values, w.values)
    assert np.allclose(avron_herbst(w, [2.0]).values, w.values)  # t = 0
    assert rel(harmonic_lens(w, 1.3), w) < 1e-12
    assert rel(repulsive_lens(w, 0.7), w) < 1e-12
    assert np.allclose(plane_oscillation_gauge(w.with_values(w.values, 0.8), [0.0]).values, w.values)
    assert rel(semiclassical_rescale(w, 1.0), w) < 1e-15


def test_plane_gauge_at_time_zero():
    g = Grid.create(1, 256, 8.0)
    w = packet(g, eps=0.5)
    out = plane_oscillation_gauge(w, [1.0])
    assert np.allclose(out.values, w.values * np.exp(1j * g.axes[0] / 0.5))


@pytest.mark.parametrize("omega,delta,t", [(1.0, 1, 1.2), (0.8, -1, 2.0)])
def test_linear_lens_matches_mehler(omega, delta, t):
    g = Grid.create(1, 8192, 96.0)
    u0 = packet(g, c=0.3, w=0.9, k=0.2)
    s = lens_time(t, omega, delta)
    v = mehler_propagate(u0, s, FREE)
    lens = harmonic_lens if delta == 1 else repulsive_lens
    u = lens(v, omega)
    direct = mehler_propagate(u0, t, QuadraticPotential((delta,), (omega,)))
    assert u.time == pytest.approx(t)
    assert rel(u, direct) < 1e-6


def test_lens_inverse_roundtrip_and_series():
    g = Grid.create(1, 4096, 32.0)
    vs = [packet(g, c=0.2, k=0.3, t=s) for s in (0.0, 0.3, 0.6)]
    us = repulsive_lens(vs, 1.0)
    assert isinstance(us, list) and len(us) == 3
    back = lens_inverse(us, 1.0, -1)
    for a, b in zip(back, vs):
        assert a.time == pytest.approx(b.time)
        assert rel(a, b) < 1e-10


def test_lens_errors():
    g = Grid.create(1, 256, 16.0)
    with pytest.raises(DomainError):
        lens_time(2.0, 1.0, 1)
    with pytest.raises(DomainError):
        repulsive_lens(packet(g, t=1.5), 1.0)  # warped time beyond 1/omega
    with pytest.raises(DomainError):
        harmonic_lens(packet(g), 1.0, nl=Nonlinearity(-1.0, 1.0))  # sigma != 2/n
    with pytest.raises(DomainError):
        harmonic_lens(packet(g, eps=0.5), 1.0, eps=1.0)
    with pytest.raises(ResolutionError):
        # the lab chirp exp(i w tanh(w t) x^2 / 2 eps) is aliased on this grid
        repulsive_lens(packet(Grid.create(1, 64, 16.0), w=4.0, eps=0.05, t=0.9), 1.0)


def test_harmonic_lens_concentrates_stationary_profile():
    # a non-dispersing free v makes |u| grow like cos(w t)^(-1/2) towards the focus
    g = Grid.create(1, 4096, 16.0)
    v = packet(g, w=1.0)
    for s in (0.5, 2.0, 8.0):
        u = harmonic_lens(v.with_values(v.values, time=s), 1.0)
        assert np.abs(u.values).max() == pytest.approx(math.cos(u.time) ** -0.5, rel=1e-6)


def test_avron_herbst_nonlinear_oracle():
    g = Grid.create(1, 2048, 32.0)
    E = [0.5]
    u0 = packet(g, 1.0, 0.2, 0.9, 0.3)
    nl = Nonlinearity(-1.0, 1.0)
    cps = [0.5, 1.0, 1.5, 2.0]
    cfg = SolverConfig(dt_initial=5e-4)
    direct = evolve(u0, 2.0, QuadraticPotential.stark(E), nl, cfg, checkpoints=cps)
    free = evolve(u0, 2.0, FREE, nl, cfg, checkpoints=cps)
    for a, b in zip(direct.snapshots, avron_herbst(free.snapshots, E)):
        assert rel(a, b) < 1e-7


def test_avron_herbst_shifts_blowup_point():
    g = Grid.create(1, 2048, 16.0)
    u0 = WaveFunction(g, 1.4 * np.exp(-g.axes[0] ** 2))
    nl = Nonlinearity(-1.0, 2.0)
    E = [1.0]
    free = evolve(u0, 1.0, FREE, nl)
    stark = evolve(u0, 1.0, QuadraticPotential.stark(E), nl)
    assert free.status == stark.status == "blow_up_detected"
    assert stark.bracket == pytest.approx(free.bracket, abs=SolverConfig().dt_initial)
    T = stark.final_time
    peak = g.axes[0][np.argmax(np.abs(stark.final_state.values))]
    assert peak == pytest.approx(-0.5 * T * T * E[0], abs=2 * g.spacing[0])


def test_avron_herbst_boundary_guard():
    g = Grid.create(1, 256, 8.0)
    with pytest.raises(BoundaryMassError):
        avron_herbst(packet(g, t=3.0), [2.0])


def test_plane_oscillation_gauge_linear():
    eps = 0.5
    g = Grid.create(1, 2048, 16.0)
    pot = QuadraticPotential.harmonic(1.0)
    f = packet(g, 1.0, 0.0, 0.8, eps=eps)
    gauged = f.with_values(f.values * np.exp(1j * g.axes[0] / eps))
    for t in (0.5, 1.0, 2.0, 3.0):
        a = mehler_propagate(gauged, t, pot)
        b = plane_oscillation_gauge(mehler_propagate(f, t, pot), [1.0])
        assert rel(a, b) < 1e-10


def test_plane_oscillation_gauge_nonlinear():
    eps = 0.5
    g = Grid.create(1, 2048, 16.0)
    pot = QuadraticPotential.harmonic(1.0)
    nl = Nonlinearity(1.0, 1.0)
    f = packet(g, 1.0, 0.0, 0.8, eps=eps)
    gauged = f.with_values(f.values * np.exp(1j * g.axes[0] / eps))
    cps = [0.5, 1.0, 2.0, 3.0]
    cfg = SolverConfig(dt_initial=5e-4)
    a = evolve(gauged, 3.0, pot, nl, cfg, checkpoints=cps).snapshots
    b = plane_oscillation_gauge(evolve(f, 3.0, pot, nl, cfg, checkpoints=cps).snapshots, [1.0])
    for x, y in zip(a, b):
        assert rel(x, y) < 1e-6


def test_semiclassical_rescale():
    eps = 0.1
    g = Grid.create(1, 1024, 1.6)
    u = packet(g, 1.0, 0.0, eps, eps=eps, t=0.3)
    psi = semiclassical_rescale(u, eps, t0=0.1)
    assert psi.epsilon == 1.0 and psi.time == pytest.approx(2.0)
    assert psi.grid.half_width == pytest.approx((16.0,))
    assert norm_L2(psi) == pytest.approx(norm_L2(u), rel=1e-14)
    assert np.allclose(np.abs(psi.values), np.exp(-psi.grid.axes[0] ** 2 / 2) * math.sqrt(eps))
    back = semiclassical_rescale(psi, eps, t0=0.1, inverse=True)
    assert back.time == pytest.approx(0.3) and np.allclose(back.values, u.values)
    with pytest.raises(ResolutionError):
        semiclassical_rescale(packet(Grid.create(1, 64, 8.0), eps=0.1), 0.1)
    with pytest.raises(DomainError):
        semiclassical_rescale(u, 0.0)


def test_transform_spec():
    g = Grid.create(1, 512, 16.0)
    w = packet(g, t=0.5)
    assert rel(TransformSpec("harmonic_lens", {"omega": 1.0}).apply(w), harmonic_lens(w, 1.0)) == 0
    assert np.allclose(TransformSpec("plane_oscillation", {"xi0": [0.5]}).apply(w).values,
                       plane_oscillation_gauge(w, [0.5]).values)
    with pytest.raises(DomainError):
        TransformSpec("galilei")
    with pytest.raises(DomainError):
        TransformSpec("repulsive_lens", {"omega": 1.0}).validate(Nonlinearity(1.0, 3.0))
