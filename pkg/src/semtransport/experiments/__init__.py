"""Scenario runs, published reference values and acceptance checks."""

from .runner import Row, run_scenario, scenario_rows
from .scenario import Scenario, load_scenario, shipped_scenarios

__all__ = ["Row", "Scenario", "load_scenario", "run_scenario", "scenario_rows", "shipped_scenarios"]
