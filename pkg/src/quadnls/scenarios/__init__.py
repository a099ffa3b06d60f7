"""Scenario files, experiment runner, parameter sweeps, drivers and CLI."""
from .config import ScenarioSpec, build_initial, format_scenario, load_scenario, parse_scenario
from .drivers import (DRIVERS, DriverReport, driver_blowup_harmonic, driver_boundary_layer,
                      driver_chirped_blowup, driver_global_repulsive, driver_quad_anisotropic,
                      driver_refocusing, driver_scattering)
from .runner import EXIT_CODES, ExperimentReport, run_scenario, sweep

__all__ = [
    "ScenarioSpec", "parse_scenario", "load_scenario", "format_scenario", "build_initial",
    "ExperimentReport", "run_scenario", "sweep", "EXIT_CODES",
    "DriverReport", "DRIVERS", "driver_blowup_harmonic", "driver_global_repulsive",
    "driver_scattering", "driver_refocusing", "driver_chirped_blowup",
    "driver_quad_anisotropic", "driver_boundary_layer",
]
