"""Command-line interface.

    quadnls run <file> [--out DIR]
    quadnls sweep <file> --param section.key=v1,v2,... [--param ...] [--out DIR] [--workers N]
    quadnls check
    quadnls criteria <file>
    quadnls driver <name> [--out DIR]

Exit codes for ``run``: 0 completed, 2 blow-up detected, 3 resolution lost,
1 error. ``sweep`` exits 1 if any cell errored, ``check`` and ``driver`` exit 1
if a check fails.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import QuadNLSError
from .config import load_scenario
from .runner import EXIT_CODES, format_value, run_scenario, sweep

__all__ = ["main", "build_parser"]


def _parse_param(text: str) -> tuple[str, list[str]]:
    key, sep, values = text.partition("=")
    if not sep or not key.strip() or not values.strip():
        raise argparse.ArgumentTypeError(f"expected section.key=v1,v2,..., got {text!r}")
    return key.strip(), [v.strip() for v in values.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quadnls", description="NLS with quadratic potentials: "
                                "scenario runner, sweeps and invariant checks.")
    sub = p.add_subparsers(dest="verb", required=True)

    r = sub.add_parser("run", help="run one scenario file")
    r.add_argument("file")
    r.add_argument("--out", default=None, help="output directory (default: [output] dir)")

    s = sub.add_parser("sweep", help="cartesian parameter sweep over a scenario file")
    s.add_argument("file")
    s.add_argument("--param", action="append", type=_parse_param, required=True,
                   help="section.key=v1,v2,... (repeatable; use .name for the top-level key)")
    s.add_argument("--out", default=None)
    s.add_argument("--workers", type=int, default=None,
                   help="pool size (default: NLSP_THREADS or the CPU count)")

    sub.add_parser("check", help="run the built-in invariant suite")

    c = sub.add_parser("criteria", help="print the blow-up criteria report for the initial datum")
    c.add_argument("file")

    from .drivers import DRIVERS
    d = sub.add_parser("driver", help="run a pre-parameterized scenario family")
    d.add_argument("name", choices=sorted(DRIVERS))
    d.add_argument("--out", default=None)
    return p


def _cmd_run(args) -> int:
    spec = load_scenario(args.file)
    try:
        rep = run_scenario(spec, args.out)
    except QuadNLSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CODES["error"]
    for key, val in rep.verdicts.items():
        print(f"{key} = {format_value(val)}")
    return rep.exit_code


def _cmd_sweep(args) -> int:
    spec = load_scenario(args.file)
    grid = dict(args.param)
    reports = sweep(spec, grid, args.out, args.workers)
    for rep in reports:
        v = rep.verdicts
        print(f"{v.get('scenario')}: {v.get('status')}")
    out = Path(args.out if args.out is not None else spec.out_dir)
    print(f"summary: {out / (spec.name + '.sweep.csv')}")
    return 1 if any(r.status == "error" for r in reports) else 0


def _cmd_check(args) -> int:
    from .checks import run_checks

    results = run_checks()
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def _cmd_criteria(args) -> int:
    from ..observables import blowup_criteria_report
    from .config import build_initial

    spec = load_scenario(args.file)
    rep = blowup_criteria_report(build_initial(spec), spec.potential, spec.nonlinearity)
    for key, val in rep.as_dict().items():
        print(f"{key} = {format_value(val)}")
    print(f"criteria_holding = {','.join(rep.holds()) or 'none'}")
    return 0


def _cmd_driver(args) -> int:
    from .drivers import DRIVERS

    rep = DRIVERS[args.name](out_dir=args.out)
    print(rep.table(), end="")
    for key, val in rep.verdicts.items():
        print(f"{key} = {format_value(val)}")
    return 0 if rep.passed else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "sweep": _cmd_sweep, "check": _cmd_check,
               "criteria": _cmd_criteria, "driver": _cmd_driver}[args.verb]
    try:
        return handler(args)
    except (QuadNLSError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES["error"]


if __name__ == "__main__":
    sys.exit(main())
