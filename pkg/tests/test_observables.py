import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadnls.errors import DomainError
from quadnls.grid import Grid, WaveFunction, norm_grad_L2, norm_L2, norm_Lp, norm_x_L2
from quadnls.nonlinearity import Nonlinearity
from quadnls.observables import (E1_E2, apply_H, apply_J, apply_J_factorized,
                                 blowup_criteria_report, delta_p, energy, energy_terms,
                                 gn_constant, im_moment, pseudo_conformal_functional, record,
                                 scattering_from_pullbacks, scattering_monitor, sigma0,
                                 vector_norm_sq, weighted_GN_check)
from quadnls.potential import QuadraticPotential
from quadnls.propagator import mehler_propagate

HARM, REP, FREE = QuadraticPotential.harmonic(1.0), QuadraticPotential.repulsive(1.0), QuadraticPotential.free()


def packet(grid, amp=1.0, c=0.0, w=1.0, k=0.0, eps=1.0):
    x = grid.axes[0]
    return WaveFunction(grid, amp * np.exp(-(x - c) ** 2 / (2 * w * w) + 1j * k * x / eps), 0.0, eps)


def test_exponents():
    assert sigma0(1) == pytest.approx((1 + math.sqrt(17)) / 4)
    assert delta_p(3, 2.0) == 0.0
    assert delta_p(1, math.inf) == 0.5
    assert delta_p(2, 4.0) == pytest.approx(0.5)


def test_energy_terms_closed_form():
    # f = A exp(-x^2): ||f'||^2 = A^2 sqrt(pi/2), int |f|^6 = A^6 sqrt(pi/6), ||x f||^2 = A^2 sqrt(pi/2)/4
    A = 3.0
    g = Grid.create(1, 2048, 12.0)
    u = WaveFunction(g, A * np.exp(-g.axes[0] ** 2))
    kin, pot, nl = energy_terms(u, HARM, Nonlinearity(-1.0, 2.0))
    assert kin == pytest.approx(0.5 * A ** 2 * math.sqrt(math.pi / 2), rel=1e-12)
    assert pot == pytest.approx(0.5 * A ** 2 * math.sqrt(math.pi / 2) / 4, rel=1e-12)
    assert nl == pytest.approx(-A ** 6 * math.sqrt(math.pi / 6) / 3, rel=1e-12)
    assert energy(u, HARM, Nonlinearity(-1.0, 2.0)) == pytest.approx(kin + pot + nl, rel=1e-14)


def test_J_H_at_time_zero():
    g = Grid.create(1, 512, 16.0)
    u = packet(g, c=0.3, k=0.5)
    from quadnls.grid import spectral_gradient
    for pot in (HARM, REP, FREE):
        assert np.allclose(apply_J(u, 0.0, pot)[0], 1j * spectral_gradient(u)[0], atol=1e-13)
        assert np.allclose(apply_H(u, 0.0, pot)[0], g.axes[0] * u.values, atol=1e-13)


@pytest.mark.parametrize("pot", [FREE, HARM, REP])
@pytest.mark.parametrize("eps", [1.0, 0.3])
def test_heisenberg_norms_constant_along_linear_flow(pot, eps):
    # the repulsive flow spreads by cosh(3) ~ 10 and chirps at slope ~ x / eps,
    # hence the wide, fine box
    g = Grid.create(1, 16384, 96.0)
    u0 = packet(g, c=0.4, w=0.8, k=0.3, eps=eps)
    j0 = norm_grad_L2(u0) ** 2
    h0 = norm_x_L2(u0) ** 2
    for t in (0.5, 1.5, 3.0):
        u = mehler_propagate(u0, t, pot)
        assert vector_norm_sq(u, apply_J(u, t, pot)) == pytest.approx(j0, rel=1e-9)
        assert vector_norm_sq(u, apply_H(u, t, pot)) == pytest.approx(h0, rel=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(0.1, 1.2))
def test_factorized_J_matches(seed, t):
    rng = np.random.default_rng(seed)
    g = Grid.create(1, 1024, 16.0)
    u = packet(g, c=rng.uniform(-1, 1), w=rng.uniform(0.5, 1.5), k=rng.uniform(-1, 1))
    for pot in (HARM, REP):
        a = apply_J(u, t, pot)[0]
        b = apply_J_factorized(u, t, pot)[0]
        assert np.max(np.abs(a - b)) < 1e-10 * np.max(np.abs(a))


def test_factorized_needs_nonzero_h():
    g = Grid.create(1, 64, 8.0)
    with pytest.raises(DomainError):
        apply_J_factorized(packet(g), math.pi / 2, HARM)


@pytest.mark.parametrize("pot", [HARM, REP])
def test_E1_plus_E2_is_energy(pot):
    g = Grid.create(1, 2048, 16.0)
    u = packet(g, 1.3, 0.2, 0.9, 0.4)
    nl = Nonlinearity(-1.0, 1.0)
    for t in (0.0, 0.4, 1.1):
        e1, e2 = E1_E2(u, t, pot, nl)
        assert e1 + e2 == pytest.approx(energy(u, pot, nl), rel=1e-9)


def test_E1_E2_at_zero():
    g = Grid.create(1, 1024, 16.0)
    u = packet(g, 1.2)
    nl = Nonlinearity(1.0, 2.0)
    kin, pot, nonl = energy_terms(u, QuadraticPotential.harmonic(2.0), nl)
    e1, e2 = E1_E2(u, 0.0, QuadraticPotential.harmonic(2.0), nl)
    assert e1 == pytest.approx(kin + nonl, rel=1e-13)
    assert e2 == pytest.approx(2.0 * norm_x_L2(u) ** 2, rel=1e-13)
    with pytest.raises(DomainError):
        E1_E2(u, 0.0, FREE, nl)


def test_weighted_GN():
    g = Grid.create(1, 2048, 16.0)
    u = packet(g, w=0.7)
    assert weighted_GN_check(u, 0.0, FREE, 2.0)[2] == pytest.approx(1.0)
    # the unit Gaussian calibrates C, and the ratio is scale invariant
    for w in (0.5, 1.0, 2.0):
        assert weighted_GN_check(packet(g, w=w), 0.0, FREE, 6.0)[2] == pytest.approx(1.0, rel=1e-10)
    assert gn_constant(1, 2.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        weighted_GN_check(u, 0.0, FREE, 1.5)


def test_lp_decay_along_repulsive_flow():
    # ||U(t) f||_Lp <= C cosh(t)^-delta(p) ||f|| ... (||J f|| constant); check the decay rate
    g = Grid.create(1, 8192, 96.0)
    u0 = packet(g, w=1.0)
    p = 6.0
    d = delta_p(1, p)
    prev = norm_Lp(u0, p)
    for t in (1.0, 2.0, 3.0):
        u = mehler_propagate(u0, t, REP)
        lhs, rhs, ratio = weighted_GN_check(u, t, REP, p)
        assert ratio <= 1.0 + 1e-9
        assert lhs < prev
        assert lhs <= norm_Lp(u0, p) * math.cosh(t) ** -d * 1.01
        prev = lhs


def test_pseudo_conformal_at_zero_and_errors():
    g = Grid.create(1, 1024, 16.0)
    u = packet(g, 1.5, 0.3, k=0.4)
    nl = Nonlinearity(-1.0, 2.0)
    assert pseudo_conformal_functional(u, 0.0, nl) == pytest.approx(0.5 * norm_x_L2(u) ** 2)
    with pytest.raises(DomainError):
        pseudo_conformal_functional(u, 0.0, nl, HARM)


def test_criteria_report():
    g = Grid.create(1, 2048, 12.0)
    x = g.axes[0]
    u0 = WaveFunction(g, 3.0 * np.exp(-x ** 2))
    rep = blowup_criteria_report(u0, HARM, Nonlinearity(-1.0, 2.0))
    e0 = 0.5 * 9 * math.sqrt(math.pi / 2) - 729 * math.sqrt(math.pi / 6) / 3
    assert rep.energy_free == pytest.approx(e0, rel=1e-12)
    assert rep.harmonic is True and rep.glassey is True
    assert rep.harmonic_time_bound == pytest.approx(math.pi / 2)
    assert rep.repulsive_one_sided is None
    assert set(rep.holds()) == {"glassey", "harmonic"}
    defocus = blowup_criteria_report(u0, REP, Nonlinearity(1.0, 2.0))
    assert defocus.holds() == []
    # real datum: Im term vanishes and conditions (2), (3) agree
    rep = blowup_criteria_report(u0, QuadraticPotential.repulsive(0.5), Nonlinearity(-1.0, 2.0))
    assert abs(rep.im_moment) < 1e-12
    assert rep.repulsive_one_sided == rep.repulsive_two_sided is True


def test_im_moment_of_chirp():
    # Im int conj(u) x u' for u = f exp(i b x^2/2) equals b ||x f||^2
    g = Grid.create(1, 2048, 16.0)
    f = np.exp(-g.axes[0] ** 2 / 2)
    u = WaveFunction(g, f * np.exp(0.5j * 0.7 * g.axes[0] ** 2))
    assert im_moment(u) == pytest.approx(0.7 * norm_x_L2(u) ** 2, rel=1e-10)


def test_scattering_linear_pullbacks_constant():
    g = Grid.create(1, 4096, 64.0)
    u0 = packet(g, c=0.2, k=0.3)
    snaps = [mehler_propagate(u0, t, REP) for t in (1.0, 2.0, 3.0)]
    res = scattering_monitor(snaps, REP, tol=1e-8)
    assert np.all(res.differences < 1e-9)
    assert res.difference_table().shape == (3, 3)
    with pytest.raises(DomainError):
        scattering_monitor(snaps, HARM)


def test_scattering_convergence_rule():
    g = Grid.create(1, 64, 8.0)
    base = packet(g)
    states = [base.with_values(base.values * (1 + 10.0 ** -k)) for k in range(1, 6)]
    assert scattering_from_pullbacks(range(5), states, 1e-3).converged
    assert not scattering_from_pullbacks(range(5), states[::-1], 1e-3).converged


def test_record_columns():
    g = Grid.create(1, 256, 8.0)
    r = record(packet(g), HARM, Nonlinearity(1.0, 1.0), ps=(4, 6))
    cols = r.columns()
    assert cols[:3] == ["t", "mass", "energy"] and cols[-2:] == ["L4", "L6"]
    assert len(cols) == len(r.row())
    assert r.mass == pytest.approx(math.sqrt(math.pi))
    assert math.isnan(record(packet(g), FREE, Nonlinearity(1.0, 1.0)).E1)
