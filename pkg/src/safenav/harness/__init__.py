"""Scenario loading, closed-loop simulation, metrics and report emission."""

from safenav.harness.metrics import metrics
from safenav.harness.scenario import RobotSetup, Scenario, load_scenario, parse_scenario
from safenav.harness.sim import Trace, run

__all__ = ["RobotSetup", "Scenario", "Trace", "load_scenario", "metrics", "parse_scenario", "run"]
