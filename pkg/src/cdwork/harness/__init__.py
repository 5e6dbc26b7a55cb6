"""Scenario configuration, execution and CSV/SVG output."""

from .config import PRESETS, ScenarioConfig, Sweep, apply_overrides, preset
from .output import Table, emit_csv
from .runner import RunResult, run_scenario

__all__ = ["PRESETS", "ScenarioConfig", "Sweep", "apply_overrides", "preset", "Table",
           "emit_csv", "RunResult", "run_scenario"]
