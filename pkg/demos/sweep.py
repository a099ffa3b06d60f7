"""Parameter sweep over the chirp of the blow-up datum.

A quadratic phase exp(i b x^2 / 2) moves the blow-up time: T_b = T/(1 - bT)
for the conformal power, so b < -1/T blows up earlier and b >= 1/T gives a
global solution. Same sweep from the shell:

    quadnls sweep demos/scenarios/glassey.scenario --param initial.chirp=-4,0,4 --out out/sweep

    python demos/sweep.py
"""
from pathlib import Path

from quadnls.scenarios import load_scenario, sweep

here = Path(__file__).parent
spec = load_scenario(here / "scenarios" / "glassey.scenario")
spec = spec.with_overrides({"grid.points": "8192", "grid.half_width": "64", "time.t_end": "1"})
reports = sweep(spec, {"initial.chirp": [-4, 0, 4]}, out_dir=Path("out") / "sweep")
for rep in reports:
    v = rep.verdicts
    print(f"{v['scenario']:40s} {v['status']:18s} bracket ({v['bracket_lo']:.4f}, {v['bracket_hi']:.4f})")
print("summary written to out/sweep/glassey.sweep.csv")
