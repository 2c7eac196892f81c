"""Spectral laboratory for energy budgets of Leray-mollified Navier-Stokes flows on the torus."""

from .budget import DefectEstimate, WindowBudget, build_defect_estimate, weight, weight_derivative
from .config import ConfigError, ExperimentPlan, RunConfig, load_config, load_plan
from .excursions import ExcursionSet, Interval, extract_excursions, limsup_excursions, measure
from .solver import BlowUpError, LeraySolver, run, step
from .spectral import GridSpec, MollifierSpec, SpectralField
from .trajectory import SchemaError, TrajectoryRecord

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "ConfigError",
    "DefectEstimate",
    "ExcursionSet",
    "ExperimentPlan",
    "GridSpec",
    "Interval",
    "LeraySolver",
    "MollifierSpec",
    "RunConfig",
    "SchemaError",
    "SpectralField",
    "TrajectoryRecord",
    "WindowBudget",
    "build_defect_estimate",
    "extract_excursions",
    "limsup_excursions",
    "load_config",
    "load_plan",
    "measure",
    "run",
    "step",
    "weight",
    "weight_derivative",
]
