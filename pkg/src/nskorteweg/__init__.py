"""Pseudo-spectral Navier-Stokes-Korteweg simulator with energy, Orlicz and gain-of-derivative diagnostics."""

from .config import RunConfig, load_config, parse_config
from .experiments import ExperimentSpec, parse_experiment, run_experiment
from .grid import Grid, PhysParams, State, build_grid
from .initial import InitKind, InitSpec
from .solver import CapillaryForm, DiagnosticsConfig, RunReport, TimeControls, rk4_step, run_simulation

__all__ = [
    "CapillaryForm",
    "DiagnosticsConfig",
    "ExperimentSpec",
    "Grid",
    "InitKind",
    "InitSpec",
    "PhysParams",
    "RunConfig",
    "RunReport",
    "State",
    "TimeControls",
    "build_grid",
    "load_config",
    "parse_config",
    "parse_experiment",
    "rk4_step",
    "run_experiment",
    "run_simulation",
]

__version__ = "0.1.0"
