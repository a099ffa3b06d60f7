"""Scenario execution, CSV/verdict emission and parameter sweeps."""
from __future__ import annotations

import csv
import itertools
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import QuadNLSError
from ..grid import norm_L2
from ..observables import (BlowupCriteriaReport, ScatteringResult, blowup_criteria_report,
                           scattering_monitor)
from ..solver import LensFrame, RunOutcome, SolverConfig, evolve
from ..transforms import (avron_herbst, harmonic_lens, lens_time, plane_oscillation_gauge,
                          repulsive_lens)
from .config import ScenarioSpec, build_initial, format_scenario

__all__ = ["ExperimentReport", "run_scenario", "sweep", "write_csv", "write_verdicts",
           "format_value", "ORACLE_TOL", "EXIT_CODES"]

ORACLE_TOL = 5e-4
EXIT_CODES = {"completed": 0, "blow_up_detected": 2, "resolution_lost": 3, "error": 1}


@dataclass
class ExperimentReport:
    spec: ScenarioSpec = field(repr=False)
    outcome: RunOutcome | None = field(default=None, repr=False)
    criteria: BlowupCriteriaReport | None = field(default=None, repr=False)
    oracle: list[tuple[float, float]] = field(default_factory=list)
    scattering: ScatteringResult | None = field(default=None, repr=False)
    verdicts: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def status(self) -> str:
        if self.error is not None or self.outcome is None:
            return "error"
        return self.outcome.status

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def strip(self) -> "ExperimentReport":
        """Drop wavefunction payloads (for cheap transfer between processes)."""
        if self.outcome is not None:
            self.outcome.snapshots = []
            self.outcome.pullbacks = []
        if self.scattering is not None:
            self.scattering.states = []
        return self


def format_value(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if x is None:
        return "none"
    return str(x)


def write_csv(path, records) -> None:
    """Observable series, one row per record, 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if records:
            writer.writerow(records[0].columns())
            for r in records:
                writer.writerow([format_value(v) for v in r.row()])


def write_verdicts(path, verdicts: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for key, val in verdicts.items():
            fh.write(f"{key} = {format_value(val)}\n")


def _config(spec: ScenarioSpec) -> SolverConfig:
    return SolverConfig(dt_initial=spec.dt, dt_min=spec.dt_min, record_every=spec.record_every,
                        lp=tuple(spec.lp), frame=spec.frame,
                        gradient_ratio_max=spec.gradient_ratio_max,
                        spectral_tail_max=spec.spectral_tail_max)


def _oracle_checkpoints(spec: ScenarioSpec) -> tuple[float, ...]:
    if spec.checkpoints:
        return spec.checkpoints
    if spec.oracle != "none" and spec.t_end > 0:
        return tuple(float(t) for t in np.linspace(spec.t_end / 10, spec.t_end, 10))
    return ()


def _lab_snapshots(spec: ScenarioSpec, outcome: RunOutcome):
    if spec.frame == "lens":
        frame = LensFrame(spec.potential, spec.nonlinearity)
        return [frame.to_lab(v) for v in outcome.snapshots]
    return list(outcome.snapshots)


def _run_oracle(spec: ScenarioSpec, u0, outcome: RunOutcome, cfg: SolverConfig):
    """Relative L2 gap between the direct run and free-run-plus-transform."""
    from ..potential import QuadraticPotential

    times = list(outcome.checkpoint_times)
    if not times:
        return []
    direct = _lab_snapshots(spec, outcome)
    lab_cfg = replace(cfg, frame="lab", record_every=0.0)
    pot, nl = spec.potential, spec.nonlinearity
    free = QuadraticPotential.free(pot.dim)
    if spec.oracle == "avron_herbst":
        ref = evolve(u0, times[-1], free, nl, lab_cfg, checkpoints=times)
        other = avron_herbst(ref.snapshots, pot.linear)
    elif spec.oracle in ("harmonic_lens", "repulsive_lens"):
        delta, omega = pot.isotropic_signature
        warped = [lens_time(t, omega, delta) for t in times]
        ref = evolve(u0, warped[-1], free, nl, lab_cfg, checkpoints=warped)
        lens = harmonic_lens if delta == 1 else repulsive_lens
        other = lens(ref.snapshots, omega, nl=nl)
    else:  # plane_oscillation
        base = build_initial(spec, with_plane_phase=False)
        ref = evolve(base, times[-1], pot, nl, lab_cfg, checkpoints=times)
        other = plane_oscillation_gauge(ref.snapshots, spec.initial["xi0"])
    rows = []
    for a, b, t in zip(direct, other, times):
        gap = norm_L2(a.with_values(a.values - b.values)) / max(norm_L2(a), 1e-300)
        rows.append((float(t), float(gap)))
    return rows


def _verdicts(spec: ScenarioSpec, rep: ExperimentReport) -> dict:
    out = rep.outcome
    v: dict = {"scenario": spec.name, "status": rep.status}
    if rep.error is not None:
        v["error"] = rep.error
    if out is not None:
        recs = out.records
        v["final_time"] = out.final_time
        v["steps"] = out.steps
        lo, hi = out.bracket if out.bracket else (math.nan, math.nan)
        v["bracket_lo"], v["bracket_hi"] = lo, hi
        m0, e0 = recs[0].mass, recs[0].energy
        v["mass_drift"] = max(abs(r.mass - m0) for r in recs) / m0 if m0 else 0.0
        v["energy_drift"] = max(abs(r.energy - e0) for r in recs) / max(abs(e0), 1e-300)
        v["max_boundary_mass"] = max(r.boundary_mass for r in recs)
        if out.message:
            v["message"] = out.message
    if rep.criteria is not None:
        c = rep.criteria
        v["energy_free"] = c.energy_free
        v["criteria_holding"] = ",".join(c.holds()) or "none"
        if c.harmonic and out is not None and out.bracket:
            v["harmonic_bound_respected"] = bool(out.bracket[1] <= c.harmonic_time_bound * 1.02)
    if spec.oracle != "none":
        gaps = [g for _, g in rep.oracle]
        v["oracle"] = spec.oracle
        v["oracle_max_gap"] = max(gaps) if gaps else math.nan
        v["oracle_pass"] = bool(gaps) and max(gaps) < ORACLE_TOL
    if rep.scattering is not None:
        s = rep.scattering
        v["scattering_final_difference"] = float(s.differences[-1]) if s.differences.size else math.nan
        v["scattering_converged"] = s.converged
    return v


def run_scenario(spec: ScenarioSpec, out_dir=None, write: bool = True) -> ExperimentReport:
    """Run one scenario: solver, observables, optional oracle and scattering.

    Writes ``<name>.csv`` (observable series), ``<name>.verdicts`` and
    ``<name>.scenario`` (echo) to ``out_dir`` (default: the spec's output
    directory). Module errors are recorded in the verdict file and re-raised.
    """
    out_dir = Path(out_dir if out_dir is not None else spec.out_dir)
    rep = ExperimentReport(spec)
    try:
        u0 = build_initial(spec)
        if spec.criteria:
            rep.criteria = blowup_criteria_report(u0, spec.potential, spec.nonlinearity)
        cfg = _config(spec)
        checkpoints = _oracle_checkpoints(spec)
        rep.outcome = evolve(u0, spec.t_end, spec.potential, spec.nonlinearity, cfg,
                             checkpoints=checkpoints)
        if spec.oracle != "none":
            rep.oracle = _run_oracle(spec, u0, rep.outcome, cfg)
        if spec.scattering and rep.outcome.status == "completed":
            rep.scattering = scattering_monitor(rep.outcome, spec.potential, checkpoints,
                                                spec.scattering_tol)
    except QuadNLSError as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
        rep.verdicts = _verdicts(spec, rep)
        if write:
            _write(out_dir, spec, rep)
        raise
    rep.verdicts = _verdicts(spec, rep)
    if write:
        _write(out_dir, spec, rep)
    return rep


def _write(out_dir: Path, spec: ScenarioSpec, rep: ExperimentReport) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    if spec.csv and rep.outcome is not None:
        write_csv(out_dir / f"{spec.name}.csv", rep.outcome.records)
    if rep.oracle:
        with open(out_dir / f"{spec.name}.oracle.csv", "w", encoding="utf-8") as fh:
            fh.write("t,relative_l2_gap\n")
            for t, g in rep.oracle:
                fh.write(f"{format_value(t)},{format_value(g)}\n")
    write_verdicts(out_dir / f"{spec.name}.verdicts", rep.verdicts)
    (out_dir / f"{spec.name}.scenario").write_text(format_scenario(spec), encoding="utf-8")


# --- sweeps ----------------------------------------------------------------

def _cell_name(base: str, params: dict) -> str:
    tag = "_".join(f"{k.rpartition('.')[2]}={v}" for k, v in params.items())
    return re.sub(r"[^A-Za-z0-9_.=+-]", "_", f"{base}__{tag}")


def _run_cell(spec: ScenarioSpec, params: dict, out_dir: str) -> ExperimentReport:
    name = _cell_name(spec.name, params)
    try:
        cell = spec.with_overrides({**params, ".name": name})
    except QuadNLSError as exc:
        rep = ExperimentReport(spec, error=f"{type(exc).__name__}: {exc}")
        rep.verdicts = {"scenario": name, "status": "error", "error": rep.error}
        return rep
    try:
        return run_scenario(cell, Path(out_dir) / name).strip()
    except Exception as exc:  # crash isolation: a failing cell never aborts the sweep
        rep = ExperimentReport(cell, error=f"{type(exc).__name__}: {exc}")
        rep.verdicts = {"scenario": name, "status": "error", "error": rep.error}
        return rep


def pool_size(cells: int, workers: int | None = None) -> int:
    cap = workers or int(os.environ.get("NLSP_THREADS", "0") or 0) or (os.cpu_count() or 1)
    return max(1, min(cap, cells))


def sweep(spec: ScenarioSpec, grid: dict[str, Sequence], out_dir=None,
          workers: int | None = None) -> list[ExperimentReport]:
    """Run every cell of the cartesian product ``grid`` (``section.key -> values``).

    Cells run independently (in a process pool when more than one worker is
    available; ``NLSP_THREADS`` caps the pool). A summary CSV with one row
    per cell, in grid order, is written at the end.
    """
    out_dir = Path(out_dir if out_dir is not None else spec.out_dir)
    if not grid or any(len(v) == 0 for v in grid.values()):
        return []
    keys = list(grid)
    cells = [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    cells = [{k: format_value(v) if not isinstance(v, str) else v for k, v in c.items()}
             for c in cells]
    n = pool_size(len(cells), workers)
    if n == 1:
        reports = [_run_cell(spec, c, str(out_dir)) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            futures = [pool.submit(_run_cell, spec, c, str(out_dir)) for c in cells]
            reports = []
            for fut, c in zip(futures, cells):
                try:
                    reports.append(fut.result())
                except Exception as exc:
                    rep = ExperimentReport(spec, error=f"{type(exc).__name__}: {exc}")
                    rep.verdicts = {"scenario": _cell_name(spec.name, c), "status": "error",
                                    "error": rep.error}
                    reports.append(rep)
    _write_summary(out_dir / f"{spec.name}.sweep.csv", keys, cells, reports)
    return reports


SUMMARY_FIELDS = ("status", "final_time", "bracket_lo", "bracket_hi", "mass_drift",
                  "energy_drift", "max_boundary_mass", "oracle_max_gap",
                  "scattering_final_difference", "error")


def _write_summary(path: Path, keys, cells, reports) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cell"] + keys + list(SUMMARY_FIELDS))
        for i, (c, r) in enumerate(zip(cells, reports)):
            row = [i] + [c[k] for k in keys]
            row += [format_value(r.verdicts.get(f, "")) if f in r.verdicts else "" for f in SUMMARY_FIELDS]
            writer.writerow(row)
