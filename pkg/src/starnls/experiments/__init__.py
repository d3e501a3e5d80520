"""Scenario-driven experiment runner and command-line interface."""

from .scenario import Scenario, build_initial_data, load_scenario, validate_config
from .runner import run_scenario, sweep

__all__ = [
    "Scenario",
    "build_initial_data",
    "load_scenario",
    "validate_config",
    "run_scenario",
    "sweep",
]
