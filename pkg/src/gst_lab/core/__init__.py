from .config import parse_scenario_text, read_scenario, scenario_hash, scenario_to_text, write_scenario
from .gates import GATE_NAMES, GateResult
from .pipeline import RunReport, ScenarioRun, harmonic_oracle
from .runner import exit_status, load_report, main, resolve_scenario, run_scenario, summary_text
from .scenarios import (
    SCENARIO_REGISTRY,
    SUPPORTED_SCENARIOS,
    AnalysisSpec,
    FractalSpec,
    LevySpec,
    PotentialSpec,
    Scenario,
    list_scenarios,
    load_scenario,
)

__all__ = [
    "AnalysisSpec",
    "FractalSpec",
    "GATE_NAMES",
    "GateResult",
    "LevySpec",
    "PotentialSpec",
    "RunReport",
    "SCENARIO_REGISTRY",
    "SUPPORTED_SCENARIOS",
    "Scenario",
    "ScenarioRun",
    "exit_status",
    "harmonic_oracle",
    "list_scenarios",
    "load_report",
    "load_scenario",
    "main",
    "parse_scenario_text",
    "read_scenario",
    "resolve_scenario",
    "run_scenario",
    "scenario_hash",
    "scenario_to_text",
    "summary_text",
    "write_scenario",
]
