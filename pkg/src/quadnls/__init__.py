"""Numerical laboratory for Schrodinger equations with quadratic potentials.

``i eps u_t + eps^2/2 Lap u = V(x) u + lam |u|^(2 sigma) u`` with ``V`` a
polynomial of degree at most two: exact Mehler propagation, split-step
nonlinear integration with blow-up detection, Heisenberg-observable
diagnostics and exact gauge/lens transforms used as oracles.
"""
from .errors import (BoundaryMassError, ConvergenceError, DomainError, NumericalCorruptionError,
                     QuadNLSError, ResolutionError, ScenarioError, SingularTimeError)
from .grid import (Grid, WaveFunction, affine_resample, boundary_mass, norm_grad_L2, norm_L2,
                   norm_Lp, norm_Sigma, norm_x_L2, shift, spectral_tail)
from .nonlinearity import Nonlinearity
from .observables import (BlowupCriteriaReport, ObservableRecord, ScatteringResult, E1_E2,
                          apply_H, apply_J, blowup_criteria_report, energy, gn_constant,
                          pseudo_conformal_functional, record, scattering_monitor, virial,
                          weighted_GN_check)
from .potential import QuadraticPotential, canonicalize, classical_trajectory, phase_functions
from .propagator import (MehlerKernel, dispersion_bound, inverse_propagate, mehler_kernel,
                         mehler_propagate)
from .solver import (LensFrame, RunOutcome, SolverConfig, evolve, ground_state_proxy,
                     ground_state_residual, step)
from .transforms import (TransformSpec, avron_herbst, harmonic_lens, lens_inverse, lens_time,
                         plane_oscillation_gauge, repulsive_lens, semiclassical_rescale)

__version__ = "0.1.0"
