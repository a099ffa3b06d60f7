"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (the lines are
collected into the terminal summary) or ``python tests/test_acceptance.py``.
"""
import math
import time

import numpy as np
import pytest

from quadnls.grid import Grid, WaveFunction, norm_L2
from quadnls.nonlinearity import Nonlinearity
from quadnls.observables import (apply_H, apply_J, blowup_criteria_report, pseudo_conformal_functional,
                                 vector_norm_sq)
from quadnls.potential import QuadraticPotential
from quadnls.propagator import dispersion_bound, mehler_propagate
from quadnls.scenarios import parse_scenario, run_scenario
from quadnls.scenarios.checks import check_revival, check_wronskian
from quadnls.scenarios.drivers import (GLASSEY_AMPLITUDE, GLASSEY_WIDTH, ROUNDOFF_FLOOR,
                                       driver_blowup_harmonic, driver_boundary_layer,
                                       driver_chirped_blowup, driver_global_repulsive,
                                       driver_refocusing, driver_scattering, scenario_text)
from quadnls.solver import SolverConfig, evolve

FREE, HARM, REP = QuadraticPotential.free(), QuadraticPotential.harmonic(1.0), QuadraticPotential.repulsive(1.0)
RESULTS: list[str] = []


def report(number: int, title: str, passed: bool, detail: str, seconds: float) -> None:
    line = f"{'PASS' if passed else 'FAIL'}  [{number:2d}] {title}: {detail} ({seconds:.1f}s)"
    RESULTS.append(line)
    print(line)
    assert passed, line


def packet(grid, amp=1.0, c=0.0, w=1.0, k=0.0, eps=1.0):
    x = grid.axes[0]
    return WaveFunction(grid, amp * np.exp(-(x - c) ** 2 / (2 * w * w) + 1j * k * x / eps), 0.0, eps)


def rel(a, b):
    return norm_L2(a.with_values(a.values - b.values)) / norm_L2(b)


def second_order(values) -> bool:
    # each refinement halves dt; a drift already at round-off counts as converged
    return all(b <= ROUNDOFF_FLOOR or math.log2(a / b) >= 1.8 for a, b in zip(values, values[1:]))


def test_01_wronskian():
    t0 = time.perf_counter()
    err = check_wronskian(10_000)
    dt = time.perf_counter() - t0
    report(1, "Wronskian identity", err < 1e-12 and dt < 1.0, f"max rel error {err:.2e} on 1e4 samples", dt)


def test_02_unitarity_group_law():
    t0 = time.perf_counter()
    # the repulsive packet spreads by cosh(2): keep it off the box edge
    g = Grid.create(1, 4096, 64.0)
    w = packet(g, c=0.4, k=0.7)
    mass, group = 0.0, 0.0
    for pot in (FREE, HARM, REP):
        for t, s in ((0.7, 0.5), (1.1, 0.9)):
            a = mehler_propagate(w, t + s, pot)
            b = mehler_propagate(mehler_propagate(w, s, pot), t, pot)
            mass = max(mass, abs(norm_L2(a) ** 2 / norm_L2(w) ** 2 - 1))
            group = max(group, rel(b, a))
    report(2, "Mehler unitarity and group law", mass < 1e-10 and group < 1e-8,
           f"mass drift {mass:.1e}, group-law gap {group:.1e}", time.perf_counter() - t0)


def test_03_revival():
    t0 = time.perf_counter()
    err = check_revival()
    report(3, "harmonic revival u(2pi) = -u(0)", err < 1e-6, f"eps in {{1, 0.1}}: {err:.1e}",
           time.perf_counter() - t0)


def test_04_dispersive_bound():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    g = Grid.create(1, 2048, 32.0)
    worst = 0.0
    for pot in (FREE, HARM, REP):
        for _ in range(20):
            t = rng.uniform(0.2, 1.4)
            w = packet(g, 1.0, rng.uniform(-2, 2), rng.uniform(0.3, 1.5), rng.uniform(-2, 2))
            u = mehler_propagate(w, t, pot)
            l1 = np.sum(np.abs(w.values)) * g.spacing[0]
            worst = max(worst, np.abs(u.values).max() / (dispersion_bound(pot, 1.0, t) * l1))
    report(4, "dispersive bound", worst <= 1 + 1e-6, f"max sup/bound ratio {worst:.4f} (60 samples)",
           time.perf_counter() - t0)


def test_05_heisenberg():
    t0 = time.perf_counter()
    # the repulsive flow spreads by cosh(3): wide box
    g = Grid.create(1, 8192, 128.0)
    w = packet(g, c=0.4, w=0.8, k=0.3)
    worst = 0.0
    for pot in (FREE, HARM, REP):
        j0, h0 = vector_norm_sq(w, apply_J(w, 0.0, pot)), vector_norm_sq(w, apply_H(w, 0.0, pot))
        for t in np.linspace(0.25, 3.0, 12):
            u = mehler_propagate(w, t, pot)
            worst = max(worst, abs(vector_norm_sq(u, apply_J(u, t, pot)) / j0 - 1),
                        abs(vector_norm_sq(u, apply_H(u, t, pot)) / h0 - 1))
    report(5, "Heisenberg observables constant", worst < 1e-8, f"max rel drift {worst:.1e} on [0, 3]",
           time.perf_counter() - t0)


def _oracle_cases():
    for lam in (1.0, -1.0):
        yield ("harmonic_lens", lam, 2.0, dict(
            points=4096, half_width=32.0, potential="kind = canonical\ndelta = 1\nomega = 1",
            t_end=0.8 * math.pi / 2, observables="oracle = harmonic_lens"))
        yield ("repulsive_lens", lam, 2.0, dict(
            points=8192, half_width=96.0, potential="kind = canonical\ndelta = -1\nomega = 1",
            t_end=3.0, observables="oracle = repulsive_lens"))
        for sigma in (1.0, 2.0):
            yield ("avron_herbst", lam, sigma, dict(
                points=2048, half_width=32.0, potential="kind = free\nlinear = 0.5",
                t_end=2.0, observables="oracle = avron_herbst"))


def test_06_transform_oracles():
    t0 = time.perf_counter()
    worst, slowest, ok = 0.0, 0.0, True
    for name, lam, sigma, kw in _oracle_cases():
        t1 = time.perf_counter()
        text = scenario_text(name, lam=lam, sigma=sigma, dt=1e-3,
                             initial="kind = gaussian\ncenter = 0.3\nxi0 = 0.2", **kw)
        rep = run_scenario(parse_scenario(text), write=False)
        slowest = max(slowest, time.perf_counter() - t1)
        ok &= rep.status == "completed" and len(rep.oracle) == 10 and rep.verdicts["oracle_pass"]
        worst = max(worst, rep.verdicts["oracle_max_gap"])
    report(6, "lens / Avron-Herbst oracles", ok and worst < 5e-4 and slowest < 60,
           f"max gap {worst:.1e} over 8 cases x 10 checkpoints, slowest {slowest:.0f}s",
           time.perf_counter() - t0)


def test_07_conservation():
    t0 = time.perf_counter()
    g = Grid.create(1, 1024, 16.0)
    w = packet(g, 1.0, 0.4, 1.0, 0.7)
    ok, parts = True, []
    for label, pot, nl in (("harmonic+", HARM, Nonlinearity(1.0, 1.0)),
                           ("harmonic-", HARM, Nonlinearity(-1.0, 1.0)),
                           ("repulsive+", REP, Nonlinearity(1.0, 1.0))):
        mass, en = [], []
        for dt in (1e-3, 5e-4, 2.5e-4):
            run = evolve(w, 1.0, pot, nl, SolverConfig(dt_initial=dt, adaptive=False,
                                                       record_every=0.1))
            m, e = run.series("mass"), run.series("energy")
            mass.append(np.max(np.abs(m / m[0] - 1)))
            en.append(np.max(np.abs(e / e[0] - 1)))
        default = evolve(w, 1.0, pot, nl, SolverConfig(record_every=0.1))
        m, e = default.series("mass"), default.series("energy")
        dm, de = np.max(np.abs(m / m[0] - 1)), np.max(np.abs(e / e[0] - 1))
        ok &= dm < 1e-10 and de < 1e-6 and second_order(mass) and second_order(en)
        parts.append(f"{label}: mass {dm:.0e}, energy {de:.1e}, "
                     f"energy rates {[round(math.log2(a / b), 2) for a, b in zip(en, en[1:])]}")
    report(7, "mass and energy conservation", ok, "; ".join(parts), time.perf_counter() - t0)


def test_08_pseudo_conformal():
    t0 = time.perf_counter()
    g = Grid.create(1, 2048, 32.0)
    nl = Nonlinearity(1.0, 2.0)
    u0 = packet(g, 1.2, 0.0, 1.0, 0.3)
    cps = [0.25 * k for k in range(1, 9)]
    run = evolve(u0, 2.0, FREE, nl, SolverConfig(), checkpoints=cps)
    p0 = pseudo_conformal_functional(u0, 0.0, nl)
    drift = max(abs(pseudo_conformal_functional(s, s.time, nl) / p0 - 1) for s in run.snapshots)
    report(8, "pseudo-conformal conservation", drift < 1e-6, f"max rel drift {drift:.1e} on [0, 2]",
           time.perf_counter() - t0)


def test_09_E1_evolution_laws():
    t0 = time.perf_counter()
    g = Grid.create(1, 1024, 24.0)
    w = packet(g, 1.2, 0.3, 1.0, 0.4)
    lam, sigma, omega = 1.0, 1.0, 1.0
    nl = Nonlinearity(lam, sigma)
    ok, parts = True, []
    for delta in (1, -1):
        pot = QuadraticPotential((delta,), (omega,))
        res = []
        for dt in (4e-3, 2e-3, 1e-3):
            run = evolve(w, 1.0, pot, nl, SolverConfig(dt_initial=dt, adaptive=False, record_every=10 * dt))
            t, e1 = run.series("t"), run.series("E1")
            power = run.series("nonlinear") * (sigma + 1) / lam  # int |u|^(2 sigma + 2)
            if delta == 1:
                rhs = omega * lam / (2 * sigma + 2) * (sigma - 2) * np.sin(2 * omega * t) * power
            else:
                rhs = omega * lam / (2 * sigma + 2) * (2 - sigma) * np.sinh(2 * omega * t) * power
            fd = (e1[2:] - e1[:-2]) / (t[2:] - t[:-2])
            res.append(np.max(np.abs(fd - rhs[1:-1])))
        rates = [math.log2(a / b) for a, b in zip(res, res[1:])]
        ok &= all(r >= 1.8 for r in rates)
        parts.append(f"delta={delta:+d} residuals {res[0]:.1e}->{res[-1]:.1e}, rates "
                     f"{[round(r, 2) for r in rates]}")
    report(9, "E1 evolution laws", ok, "; ".join(parts), time.perf_counter() - t0)


def test_10_glassey_blowup():
    t0 = time.perf_counter()
    rep = driver_blowup_harmonic(omegas=(), include_free=True)
    a = GLASSEY_AMPLITUDE
    # E0 of a exp(-x^2) in closed form, checked against quadrature
    e0 = 0.5 * a ** 2 * math.sqrt(math.pi / 2) - a ** 6 * math.sqrt(math.pi / 6) / 3
    g = Grid.create(1, 2048, 16.0)
    u0 = WaveFunction(g, a * np.exp(-g.axes[0] ** 2 / (2 * GLASSEY_WIDTH ** 2)))
    eq = blowup_criteria_report(u0, FREE, Nonlinearity(-1.0, 2.0)).energy_free
    row = rep.rows[0]
    ok = (eq < 0 and abs(eq / e0 - 1) < 1e-12 and rep.verdicts["pass_glassey_blowup"]
          and rep.verdicts["pass_virial_concave"])
    report(10, "Glassey blow-up", ok,
           f"E0 = {eq:.5f}, bracket ({row['bracket_lo']:.5f}, {row['bracket_hi']:.5f}), virial concave",
           time.perf_counter() - t0)


def test_11_harmonic_blowup_bound():
    t0 = time.perf_counter()
    rep = driver_blowup_harmonic(omegas=(0.5, 1.0), include_free=False)
    ok = rep.verdicts["pass_harmonic_bound_w0.5"] and rep.verdicts["pass_harmonic_bound_w1"]
    detail = ", ".join(f"w={r['omega']:g}: hi {r['bracket_hi']:.4f} <= {math.pi / (2 * r['omega']) * 1.02:.4f}"
                       for r in rep.rows)
    report(11, "harmonic blow-up time bound", ok, detail, time.perf_counter() - t0)


def test_12_repulsive_global():
    t0 = time.perf_counter()
    rep = driver_global_repulsive()
    ok = rep.verdicts["pass_blowup_without_potential"] and rep.verdicts["pass_global_for_largest_omega"]
    report(12, "repulsive potential prevents blow-up", ok,
           f"transition omega = {rep.verdicts['transition_omega']:g}", time.perf_counter() - t0)


def test_13_chirped_blowup():
    t0 = time.perf_counter()
    rep = driver_chirped_blowup()
    ok = all(v for k, v in rep.verdicts.items() if k.startswith("pass_"))
    detail = ", ".join(f"b={r['b']:g}: {r['status']}" + (f" hi {r['bracket_hi']:.4f}"
                                                          if r["status"] == "blow_up_detected" else "")
                       for r in rep.rows)
    report(13, "chirped-data blow-up control", ok, detail, time.perf_counter() - t0)


def test_14_scattering():
    t0 = time.perf_counter()
    rep = driver_scattering()
    dt = time.perf_counter() - t0
    ok = rep.verdicts["pass_decreasing"] and rep.verdicts["pass_below_tolerance"] and dt < 60
    report(14, "scattering", ok, f"final Sigma difference {rep.verdicts['final_difference']:.1e}", dt)


def test_15_refocusing():
    t0 = time.perf_counter()
    rep = driver_refocusing()
    ok = all(v for k, v in rep.verdicts.items() if k.startswith("pass_"))
    focus = ", ".join(f"{r['focus_profile_error']:.0e}" for r in rep.rows)
    lin = ", ".join(f"{r['linear_prefocus_error']:.3f}" for r in rep.rows)
    nonlin = ", ".join(f"{r['nonlinear_prefocus_error']:.3f}" for r in rep.rows)
    report(15, "semiclassical refocusing", ok,
           f"focus errors [{focus}] (round-off floor {ROUNDOFF_FLOOR:.0e}), "
           f"pre-focus linear [{lin}], nonlinear [{nonlin}]", time.perf_counter() - t0)


def test_16_boundary_layer():
    t0 = time.perf_counter()
    rep = driver_boundary_layer()
    errs = ", ".join(f"eps={r['eps']:g}: {r['max_error']:.4f}" for r in rep.rows)
    report(16, "boundary layer", rep.verdicts["pass_error_decreasing"], errs, time.perf_counter() - t0)


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
