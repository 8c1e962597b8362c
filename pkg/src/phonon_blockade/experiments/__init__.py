"""Scenario runner, configuration files and command line interface."""
from .pipelines import PIPELINES, SolverSettings, evaluate_point
from .scenarios import (Scenario, ScenarioError, SweepResult, builtin_scenarios, emit_csv,
                        get_scenario, run)

__all__ = ["PIPELINES", "SolverSettings", "evaluate_point", "Scenario", "ScenarioError",
           "SweepResult", "builtin_scenarios", "emit_csv", "get_scenario", "run"]
