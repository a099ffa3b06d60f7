"""Sectioned ``key = value`` scenario files.

Example::

    name = glassey
    [grid]
    dim = 1
    points = 2048
    half_width = 16
    [potential]
    kind = free
    [nonlinearity]
    lambda = -1
    sigma = 2
    [initial]
    kind = gaussian
    amplitude = 1.4
    width = 0.7071067811865476
    [time]
    t_end = 1
    record_every = 0.01
    [observables]
    [output]
    dir = out

Lists are comma separated, matrix rows are separated by ``;``, numbers are
plain decimals, ``#`` starts a comment.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import DomainError, ScenarioError
from ..grid import Grid, WaveFunction
from ..nonlinearity import Nonlinearity
from ..potential import QuadraticPotential, canonicalize

__all__ = ["ScenarioSpec", "parse_scenario", "load_scenario", "build_initial", "format_scenario"]

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
SECTIONS = ("grid", "potential", "nonlinearity", "initial", "time", "observables", "output")
REQUIRED = ("grid", "potential", "nonlinearity", "initial", "time")
ORACLES = ("none", "avron_herbst", "harmonic_lens", "repulsive_lens", "plane_oscillation")


def _num(text: str) -> float:
    text = text.strip()
    if not _NUMBER.match(text):
        raise ValueError(f"not a decimal number: {text!r}")
    return float(text)


def _int(text: str) -> int:
    x = _num(text)
    if x != int(x):
        raise ValueError(f"not an integer: {text!r}")
    return int(x)


def _nums(text: str) -> tuple[float, ...]:
    return tuple(_num(p) for p in text.split(",") if p.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(_int(p) for p in text.split(",") if p.strip())


def _matrix(text: str) -> tuple[tuple[float, ...], ...]:
    return tuple(_nums(row) for row in text.split(";") if row.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        t = text.strip().lower()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return t
    return parse


def _str(text: str) -> str:
    return text.strip()


SCHEMA: dict[str, dict[str, Callable[[str], object]]] = {
    "": {"name": _str},
    "grid": {"dim": _int, "points": _ints, "half_width": _nums},
    "potential": {"kind": _choice("free", "canonical", "matrix"), "delta": _ints,
                  "omega": _nums, "matrix": _matrix, "linear": _nums, "constant": _num},
    "nonlinearity": {"lambda": _num, "sigma": _num, "epsilon": _num, "lambda_power": _num},
    "initial": {"kind": _choice("gaussian", "ground_state", "concentrating"),
                "amplitude": _num, "width": _nums, "center": _nums, "chirp": _num,
                "xi0": _nums},
    "time": {"t_end": _num, "dt": _num, "dt_min": _num, "record_every": _num,
             "checkpoints": _nums, "frame": _choice("lab", "lens"),
             "gradient_ratio_max": _num, "spectral_tail_max": _num},
    "observables": {"lp": _nums, "oracle": _choice(*ORACLES), "scattering": _bool,
                    "scattering_tol": _num, "criteria": _bool},
    "output": {"dir": _str, "csv": _bool},
}


@dataclass(frozen=True)
class ScenarioSpec:
    """Validated scenario. ``values`` keeps the raw parsed sections."""

    name: str
    grid: Grid
    potential: QuadraticPotential
    basis: np.ndarray = field(repr=False)
    origin: np.ndarray = field(repr=False)
    nonlinearity: Nonlinearity = None
    epsilon: float = 1.0
    initial: dict = field(default_factory=dict)
    t_end: float = 0.0
    dt: float = 1e-3
    dt_min: float | None = None
    record_every: float = 0.0
    checkpoints: tuple[float, ...] = ()
    frame: str = "lab"
    gradient_ratio_max: float = 1e3
    spectral_tail_max: float = 1e-6
    lp: tuple[float, ...] = ()
    oracle: str = "none"
    scattering: bool = False
    scattering_tol: float = 1e-4
    criteria: bool = True
    out_dir: str = "."
    csv: bool = True
    values: dict = field(default_factory=dict, repr=False, compare=False)

    def with_overrides(self, overrides: dict[str, str]) -> "ScenarioSpec":
        """Re-validate with ``section.key = text`` overrides applied."""
        values = {sec: dict(kv) for sec, kv in self.values.items()}
        for dotted, text in overrides.items():
            sec, _, key = dotted.rpartition(".")
            if sec not in SCHEMA or key not in SCHEMA[sec]:
                raise ScenarioError(f"unknown parameter {dotted!r}")
            try:
                values.setdefault(sec, {})[key] = (SCHEMA[sec][key](str(text)), None)
            except ValueError as exc:
                raise ScenarioError(f"{dotted}: {exc}") from None
        return _build(values)


def parse_scenario(text: str) -> ScenarioSpec:
    """Parse and validate a scenario file's text."""
    values: dict[str, dict[str, tuple[object, int | None]]] = {"": {}}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioError(f"malformed section header {line!r}", lineno)
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ScenarioError(f"unknown section [{section}]", lineno)
            if section in values:
                raise ScenarioError(f"duplicate section [{section}]", lineno)
            values[section] = {}
            continue
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value', got {line!r}", lineno)
        key, _, text_value = line.partition("=")
        key = key.strip().lower()
        if key not in SCHEMA[section]:
            where = f"section [{section}]" if section else "the preamble"
            raise ScenarioError(f"unknown key {key!r} in {where}", lineno)
        if key in values[section]:
            raise ScenarioError(f"duplicate key {key!r}", lineno)
        try:
            values[section][key] = (SCHEMA[section][key](text_value), lineno)
        except ValueError as exc:
            raise ScenarioError(str(exc), lineno) from None
    for sec in REQUIRED:
        if sec not in values:
            raise ScenarioError(f"missing section [{sec}]")
    return _build(values)


def load_scenario(path) -> ScenarioSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def _build(values) -> ScenarioSpec:
    def get(sec, key, default=None):
        return values.get(sec, {}).get(key, (default, None))[0]

    def line(sec, key):
        return values.get(sec, {}).get(key, (None, None))[1]

    def check(cond, message, sec, key):
        if not cond:
            raise ScenarioError(message, line(sec, key))

    # grid
    dim = get("grid", "dim", 1)
    check(1 <= dim <= 3, "dim must be 1, 2 or 3", "grid", "dim")
    default_points = {1: 2048, 2: 256, 3: 64}[dim]
    points = get("grid", "points", (default_points,))
    half = get("grid", "half_width", (16.0,))
    check(len(points) in (1, dim), "points needs 1 or dim entries", "grid", "points")
    check(len(half) in (1, dim), "half_width needs 1 or dim entries", "grid", "half_width")
    try:
        grid = Grid.create(dim, points if len(points) == dim else points * dim,
                           half if len(half) == dim else half * dim)
    except DomainError as exc:
        raise ScenarioError(str(exc), line("grid", "points")) from None

    # potential
    kind = get("potential", "kind", "free")
    basis, origin = np.eye(dim), np.zeros(dim)
    try:
        if kind == "free":
            lin = get("potential", "linear", (0.0,) * dim)
            check(len(lin) == dim, "linear needs dim entries", "potential", "linear")
            pot = QuadraticPotential((0,) * dim, (0.0,) * dim, lin,
                                     get("potential", "constant", 0.0))
        elif kind == "canonical":
            delta = get("potential", "delta")
            omega = get("potential", "omega")
            check(delta is not None and omega is not None, "canonical potential needs delta and omega",
                  "potential", "kind")
            delta = delta * dim if len(delta) == 1 else delta
            omega = omega * dim if len(omega) == 1 else omega
            check(len(delta) == dim and len(omega) == dim, "delta/omega need dim entries",
                  "potential", "delta")
            lin = get("potential", "linear", (0.0,) * dim)
            pot = QuadraticPotential(delta, omega, lin, get("potential", "constant", 0.0))
        else:
            a = get("potential", "matrix")
            check(a is not None, "matrix potential needs a matrix", "potential", "kind")
            check(len(a) == dim and all(len(r) == dim for r in a), "matrix must be dim x dim",
                  "potential", "matrix")
            pot, basis, origin = canonicalize(np.array(a), get("potential", "linear", (0.0,) * dim),
                                              get("potential", "constant", 0.0))
    except DomainError as exc:
        raise ScenarioError(str(exc), line("potential", "kind")) from None

    # nonlinearity
    eps = get("nonlinearity", "epsilon", 1.0)
    check(0 < eps <= 1, "epsilon must lie in (0, 1]", "nonlinearity", "epsilon")
    lam = get("nonlinearity", "lambda", 0.0) * eps ** get("nonlinearity", "lambda_power", 0.0)
    try:
        nl = Nonlinearity(lam, get("nonlinearity", "sigma", 1.0), dim)
    except DomainError as exc:
        raise ScenarioError(str(exc), line("nonlinearity", "sigma")) from None

    # initial datum
    init_kind = get("initial", "kind", "gaussian")
    initial = {
        "kind": init_kind,
        "amplitude": get("initial", "amplitude", 1.0),
        "width": _per_axis(get("initial", "width", (1.0,)), dim, "width", line("initial", "width")),
        "center": _per_axis(get("initial", "center", (0.0,)), dim, "center", line("initial", "center")),
        "chirp": get("initial", "chirp", 0.0),
        "xi0": _per_axis(get("initial", "xi0", (0.0,)), dim, "xi0", line("initial", "xi0")),
    }
    check(all(w > 0 for w in initial["width"]), "width must be positive", "initial", "width")
    if init_kind == "ground_state":
        check(nl.lam < 0, "ground_state datum needs lambda < 0", "initial", "kind")

    # time
    t_end = get("time", "t_end")
    check(t_end is not None, "t_end is required", "time", "t_end")
    check(t_end >= 0 and math.isfinite(t_end), "t_end must be finite and >= 0", "time", "t_end")
    dt = get("time", "dt", 1e-3)
    dt_min = get("time", "dt_min")
    check(dt > 0, "dt must be positive", "time", "dt")
    check(dt_min is None or 0 < dt_min < dt, "need 0 < dt_min < dt", "time", "dt_min")
    frame = get("time", "frame", "lab")
    if frame == "lens":
        check(pot.isotropic_signature is not None and pot.is_gauge_free,
              "lens frame needs an isotropic harmonic or repulsive potential", "time", "frame")
    checkpoints = tuple(sorted(get("time", "checkpoints", ())))
    check(all(0 <= c <= t_end for c in checkpoints), "checkpoints must lie in [0, t_end]",
          "time", "checkpoints")

    oracle = get("observables", "oracle", "none")
    if oracle in ("harmonic_lens", "repulsive_lens"):
        want = 1 if oracle == "harmonic_lens" else -1
        sig = pot.isotropic_signature
        check(sig is not None and sig[0] == want and pot.is_gauge_free,
              f"{oracle} oracle needs a matching isotropic potential", "observables", "oracle")
        check(nl.is_linear or nl.l2_critical, f"{oracle} oracle needs sigma = 2/n",
              "observables", "oracle")
        if want == 1:
            check(sig[1] * t_end < 0.5 * math.pi, "harmonic lens covers t < pi/(2 omega) only",
                  "observables", "oracle")
    elif oracle == "avron_herbst":
        check(pot.is_free, "avron_herbst oracle needs a free potential with a linear term",
              "observables", "oracle")
    elif oracle == "plane_oscillation":
        check(pot.delta == (1,) * dim and pot.omega == (1.0,) * dim and pot.is_gauge_free,
              "plane_oscillation oracle needs the harmonic potential with omega = 1",
              "observables", "oracle")
    scattering = get("observables", "scattering", False)
    if scattering:
        cls = pot.classification()
        check(pot.is_free or cls.has_repulsive_axis, "scattering needs a repulsive axis or V = 0",
              "observables", "scattering")
        check(bool(checkpoints), "scattering needs checkpoints", "observables", "scattering")

    return ScenarioSpec(
        name=get("", "name", "scenario"), grid=grid, potential=pot, basis=basis, origin=origin,
        nonlinearity=nl, epsilon=eps, initial=initial, t_end=t_end, dt=dt, dt_min=dt_min,
        record_every=get("time", "record_every", 0.0), checkpoints=checkpoints, frame=frame,
        gradient_ratio_max=get("time", "gradient_ratio_max", 1e3),
        spectral_tail_max=get("time", "spectral_tail_max", 1e-6),
        lp=get("observables", "lp", ()), oracle=oracle, scattering=scattering,
        scattering_tol=get("observables", "scattering_tol", 1e-4),
        criteria=get("observables", "criteria", True),
        out_dir=get("output", "dir", "."), csv=get("output", "csv", True),
        values=values,
    )


def _per_axis(vals, dim, name, lineno):
    if len(vals) == 1:
        return tuple(vals) * dim
    if len(vals) != dim:
        raise ScenarioError(f"{name} needs 1 or {dim} entries", lineno)
    return tuple(vals)


def build_initial(spec: ScenarioSpec, with_plane_phase: bool = True) -> WaveFunction:
    """Sample the initial datum on the scenario grid (canonical coordinates)."""
    from ..solver import ground_state_proxy

    grid, eps, init = spec.grid, spec.epsilon, spec.initial
    # canonical z -> original x = origin + basis z
    x = [spec.origin[j] + sum(spec.basis[j, k] * grid.mesh[k] for k in range(grid.dim))
         for j in range(grid.dim)]
    if init["kind"] == "ground_state":
        r = ground_state_proxy(grid, spec.nonlinearity)
        vals = init["amplitude"] * r.values
        if any(init["center"]):
            from ..grid import shift
            vals = init["amplitude"] * shift(r, [-c for c in init["center"]])
    else:
        scale = eps if init["kind"] == "concentrating" else 1.0
        arg = [xj / scale for xj in x]
        r2 = sum(((a - c) / w) ** 2 for a, c, w in zip(arg, init["center"], init["width"]))
        vals = init["amplitude"] * np.exp(-0.5 * r2) * scale ** (-grid.dim / 2.0)
    if init["chirp"]:
        vals = vals * np.exp(0.5j * init["chirp"] * sum(a * a for a in x) / eps)
    if with_plane_phase and any(init["xi0"]):
        vals = vals * np.exp(1j * sum(k * a for k, a in zip(init["xi0"], x)) / eps)
    return WaveFunction(grid, vals, 0.0, eps)


def format_scenario(spec: ScenarioSpec) -> str:
    """Echo of the parsed values in scenario-file syntax."""
    out = []
    for sec in ("",) + SECTIONS:
        kv = spec.values.get(sec)
        if kv is None:
            continue
        if sec:
            out.append(f"[{sec}]")
        for key, (val, _) in kv.items():
            out.append(f"{key} = {_fmt(val)}")
    return "\n".join(out) + "\n"


def _fmt(val) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return f"{val:.17g}"
    if isinstance(val, tuple):
        if val and isinstance(val[0], tuple):
            return "; ".join(_fmt(r) for r in val)
        return ", ".join(_fmt(v) for v in val)
    return str(val)
