"""Exact gauge and lens transforms between solutions of different equations.

All maps act on a single :class:`WaveFunction` or on a sequence of them
(a "series"); each element is transformed at its own time stamp. Spatial
rescalings use the chirp-z resampler of :mod:`quadnls.grid`, spatial shifts a
spectral phase shift.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, ResolutionError
from .grid import WaveFunction, affine_resample, norm_L2, shift
from .nonlinearity import Nonlinearity

__all__ = [
    "TransformSpec",
    "avron_herbst",
    "harmonic_lens",
    "repulsive_lens",
    "lens_inverse",
    "lens_time",
    "plane_oscillation_gauge",
    "semiclassical_rescale",
    "MASS_LOSS_TOL",
]

MASS_LOSS_TOL = 1e-8
CRITICAL_TOL = 1e-12
KINDS = ("avron_herbst", "harmonic_lens", "repulsive_lens", "plane_oscillation", "semiclassical_rescale")


def _series(x):
    if isinstance(x, WaveFunction):
        return [x], True
    return list(x), False


def _unwrap(out, single):
    return out[0] if single else out


def _check_eps(w: WaveFunction, eps):
    if eps is not None and not math.isclose(eps, w.epsilon, rel_tol=1e-14):
        raise DomainError(f"epsilon {eps} does not match the wavefunction's {w.epsilon}")


def _check_conformal(nl: Nonlinearity | None):
    if nl is None or nl.is_linear:
        return
    if abs(nl.sigma - 2.0 / nl.dim) > CRITICAL_TOL:
        raise DomainError(f"lens transforms need sigma = 2/n, got sigma={nl.sigma}, n={nl.dim}")


def _check_mass(before: float, after: float, what: str):
    if before > 0 and abs(before - after) > MASS_LOSS_TOL * before:
        raise ResolutionError(f"{what}: relative mass change {abs(before - after) / before:.2e}")


def _check_chirp(w: WaveFunction, beta: float, what: str):
    # phase beta |x|^2 / (2 eps) must advance by less than pi per cell where w lives
    if beta == 0.0:
        return
    rho = np.abs(w.values) ** 2
    mask = rho > 1e-14 * rho.max()
    for x, h in zip(w.grid.mesh, w.grid.spacing):
        if mask.any() and abs(beta) * np.abs(x[mask]).max() * h / w.epsilon >= np.pi:
            raise ResolutionError(f"{what}: chirp is aliased on this grid")


# --- lens geometry ---------------------------------------------------------

def lens_time(t: float, omega: float, delta: int) -> float:
    """Warped time ``tan(w t)/w`` (delta=+1) or ``tanh(w t)/w`` (delta=-1)."""
    if delta == 1:
        if abs(omega * t) >= 0.5 * math.pi:
            raise DomainError(f"t={t} is beyond the first focus pi/(2w)={0.5 * math.pi / omega}")
        return math.tan(omega * t) / omega
    if delta == -1:
        return math.tanh(omega * t) / omega
    raise DomainError("lens transforms need delta = +1 or -1")


def _lab_time(s: float, omega: float, delta: int) -> float:
    if delta == 1:
        return math.atan(omega * s) / omega
    if abs(omega * s) >= 1.0:
        raise DomainError(f"warped time {s} is outside the repulsive range |s| < 1/w")
    return math.atanh(omega * s) / omega


def _scale_and_chirp(t: float, omega: float, delta: int) -> tuple[float, float]:
    # x = a y and beta in exp(i beta |x|^2 / 2 eps)
    if delta == 1:
        return math.cos(omega * t), -omega * math.tan(omega * t)
    return math.cosh(omega * t), omega * math.tanh(omega * t)


def _to_lab(v: WaveFunction, omega: float, delta: int, check: bool = True) -> WaveFunction:
    t = _lab_time(v.time, omega, delta)
    a, beta = _scale_and_chirp(t, omega, delta)
    n = v.grid.dim
    vals = affine_resample(v, 1.0 / a) * a ** (-n / 2.0)
    out = v.with_values(vals * np.exp(0.5j * beta * v.grid.r2 / v.epsilon), time=t)
    if check:
        _check_mass(norm_L2(v) ** 2, norm_L2(out) ** 2, "lens rescaling")
        _check_chirp(out, beta, "lens chirp")
    return out


def _from_lab(u: WaveFunction, omega: float, delta: int, check: bool = True) -> WaveFunction:
    s = lens_time(u.time, omega, delta)
    a, beta = _scale_and_chirp(u.time, omega, delta)
    n = u.grid.dim
    if check:
        _check_chirp(u, beta, "lens chirp")
    unchirped = u.with_values(u.values * np.exp(-0.5j * beta * u.grid.r2 / u.epsilon))
    out = u.with_values(affine_resample(unchirped, a) * a ** (n / 2.0), time=s)
    if check:
        _check_mass(norm_L2(u) ** 2, norm_L2(out) ** 2, "lens rescaling")
    return out


def harmonic_lens(v, omega: float, eps: float | None = None, nl: Nonlinearity | None = None):
    """Free solution ``v(s)`` to the solution of the ``+w^2|x|^2/2`` problem.

    ``u(t,x) = cos(wt)^(-n/2) exp(-i w |x|^2 tan(wt) / 2 eps) v(tan(wt)/w, x/cos(wt))``;
    each element of ``v`` is stamped with its warped time ``s`` and the result
    with ``t = arctan(w s)/w``.
    """
    _check_conformal(nl)
    vs, single = _series(v)
    for w in vs:
        _check_eps(w, eps)
    return _unwrap([_to_lab(w, omega, 1) for w in vs], single)


def repulsive_lens(v, omega: float, eps: float | None = None, nl: Nonlinearity | None = None):
    """Free solution ``v(s)`` to the solution of the ``-w^2|x|^2/2`` problem.

    ``u(t,x) = cosh(wt)^(-n/2) exp(i w |x|^2 tanh(wt) / 2 eps) v(tanh(wt)/w, x/cosh(wt))``,
    with ``t = artanh(w s)/w``; ``|s| < 1/w`` is required.
    """
    _check_conformal(nl)
    vs, single = _series(v)
    for w in vs:
        _check_eps(w, eps)
    return _unwrap([_to_lab(w, omega, -1) for w in vs], single)


def lens_inverse(u, omega: float, delta: int, eps: float | None = None,
                 nl: Nonlinearity | None = None):
    """Inverse of :func:`harmonic_lens` (delta=+1) or :func:`repulsive_lens` (delta=-1)."""
    _check_conformal(nl)
    us, single = _series(u)
    for w in us:
        _check_eps(w, eps)
    return _unwrap([_from_lab(w, omega, delta) for w in us], single)


# --- gauges ----------------------------------------------------------------

def avron_herbst(v, E: Sequence[float], eps: float | None = None,
                 max_boundary_mass: float = 1e-8):
    """Free solution ``v`` to the solution with Stark potential ``E.x``.

    ``u(t,x) = v(t, x + t^2 E/2) exp(-i (t E.x + t^3 |E|^2 / 6) / eps)``.
    """
    vs, single = _series(v)
    E = np.asarray(E, dtype=float).reshape(-1)
    out = []
    for w in vs:
        _check_eps(w, eps)
        if E.size != w.grid.dim:
            raise DomainError("field dimension does not match the grid")
        t = w.time
        if t == 0.0 or not E.any():
            out.append(w.copy())
            continue
        vals = shift(w, 0.5 * t * t * E, max_boundary_mass)
        ex = sum(e * x for e, x in zip(E, w.grid.mesh))
        phase = (t * ex + t ** 3 * float(E @ E) / 6.0) / w.epsilon
        out.append(w.with_values(vals * np.exp(-1j * phase)))
    return _unwrap(out, single)


def plane_oscillation_gauge(u, xi0: Sequence[float], eps: float | None = None,
                            max_boundary_mass: float = 1e-8):
    """Map the run with datum ``f`` to the run with datum ``f exp(i x.xi0 / eps)``.

    For the harmonic potential with ``w = 1``:
    ``u(t, x - xi0 sin t) exp(i (x - xi0 sin(t)/2).xi0 cos(t) / eps)``.
    """
    us, single = _series(u)
    xi0 = np.asarray(xi0, dtype=float).reshape(-1)
    out = []
    for w in us:
        _check_eps(w, eps)
        if xi0.size != w.grid.dim:
            raise DomainError("xi0 dimension does not match the grid")
        if not xi0.any():
            out.append(w.copy())
            continue
        st, ct = math.sin(w.time), math.cos(w.time)
        vals = shift(w, -xi0 * st, max_boundary_mass) if st != 0.0 else w.values.copy()
        phase = sum((x - 0.5 * k * st) * k * ct for x, k in zip(w.grid.mesh, xi0)) / w.epsilon
        out.append(w.with_values(vals * np.exp(1j * phase)))
    return _unwrap(out, single)


def semiclassical_rescale(u, eps: float, t0: float = 0.0, inverse: bool = False,
                          min_cells: float = 8.0):
    """``u(t, x) = eps^(-n/2) psi((t - t0)/eps, x/eps)`` in either direction.

    Forward maps ``u`` (epsilon ``eps``) to ``psi`` (epsilon 1) on the grid
    scaled by ``1/eps``; ``inverse=True`` maps ``psi`` back. The grid points
    correspond one to one, so the map is exact and mass-preserving.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    ws, single = _series(u)
    out = []
    for w in ws:
        n = w.grid.dim
        if not inverse:
            _check_eps(w, eps)
            if max(w.grid.spacing) * min_cells > eps:
                raise ResolutionError(
                    f"grid spacing {max(w.grid.spacing):.3g} resolves fewer than "
                    f"{min_cells:g} cells per eps={eps}")
            out.append(WaveFunction(w.grid.scaled(1.0 / eps), w.values * eps ** (n / 2.0),
                                    (w.time - t0) / eps, 1.0))
        else:
            if w.epsilon != 1.0:
                raise DomainError("the rescaled frame has epsilon = 1")
            out.append(WaveFunction(w.grid.scaled(eps), w.values * eps ** (-n / 2.0),
                                    t0 + eps * w.time, eps))
    return _unwrap(out, single)


@dataclass(frozen=True)
class TransformSpec:
    """A transform kind with its parameters, applied by :meth:`apply`.

    params: ``E`` (avron_herbst), ``omega`` (lenses), ``xi0``
    (plane_oscillation), ``eps`` and optional ``t0`` / ``inverse``
    (semiclassical_rescale).
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown transform kind {self.kind!r}")

    def validate(self, nl: Nonlinearity | None):
        if self.kind in ("harmonic_lens", "repulsive_lens"):
            _check_conformal(nl)

    def apply(self, series, nl: Nonlinearity | None = None):
        self.validate(nl)
        p = self.params
        if self.kind == "avron_herbst":
            return avron_herbst(series, p["E"])
        if self.kind == "harmonic_lens":
            return harmonic_lens(series, p["omega"], nl=nl)
        if self.kind == "repulsive_lens":
            return repulsive_lens(series, p["omega"], nl=nl)
        if self.kind == "plane_oscillation":
            return plane_oscillation_gauge(series, p["xi0"])
        return semiclassical_rescale(series, p["eps"], p.get("t0", 0.0), p.get("inverse", False))
