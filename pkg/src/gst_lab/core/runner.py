import json
import logging
import os
from typing import Optional, Union

from ..create_configs import write_scenario_configs
from ..errors import ConfigurationError, GstLabError
from ..parser import parse_arguments
from ..reporter import (
    Reporter,
    display_scenarios,
    print_configs_written,
    print_error,
    print_run_start,
    print_validation,
)
from ..setup_env import setup_logging, setup_quiet_environment
from .config import override_seed, read_scenario, scenario_hash
from .pipeline import FAILED_MARKER, SUMMARY_FILE, RunReport, ScenarioRun, summary_text
from .scenarios import SUPPORTED_SCENARIOS, Scenario, list_scenarios, load_scenario

logger = logging.getLogger(__name__)

STRICTNESS = ("hard", "report-only")


def resolve_scenario(source: str, seed: Optional[int] = None) -> Scenario:
    """A config file path, or the name of a built-in scenario; --seed wins over the configured seed."""
    if os.path.isfile(source):
        scenario = read_scenario(source)
    elif source.strip().lower() in SUPPORTED_SCENARIOS:
        scenario = load_scenario(source)
    else:
        raise ConfigurationError(f"no config file or built-in scenario named {source!r}")
    return override_seed(scenario, seed).validate()


def run_directory(scenario: Scenario, out_dir: str) -> str:
    return os.path.join(out_dir, f"{scenario.name}-seed{scenario.seed}")


def run_scenario(
    scenario: Union[Scenario, str],
    out_dir: str = "runs",
    threads: int = 1,
    seed: Optional[int] = None,
) -> RunReport:
    """
    Run every pipeline stage of a scenario and write its run directory.

    Validation happens before any compute. The run directory holds the scenario
    config, the CSV artifacts and summary.json; a FAILED marker lists the failed
    gates (or the aborting stage) when the run did not pass.

    Args:
        scenario: A Scenario, a config path or a built-in scenario name
        out_dir (str): Parent of the run directory `<name>-seed<seed>`
        threads (int): Worker threads for ensemble simulation; results do not depend on it
        seed (int): Optional master seed override

    Returns:
        RunReport: The report that was written to summary.json

    Raises:
        ConfigurationError: The scenario does not validate; nothing is computed
    """
    if isinstance(scenario, str):
        scenario = resolve_scenario(scenario, seed)
    else:
        scenario = override_seed(scenario, seed).validate()
    run_dir = run_directory(scenario, out_dir)
    os.makedirs(run_dir, exist_ok=True)
    marker = os.path.join(run_dir, FAILED_MARKER)
    if os.path.exists(marker):
        os.remove(marker)

    report = ScenarioRun(scenario, run_dir, threads).execute()
    with open(os.path.join(run_dir, SUMMARY_FILE), "w", encoding="utf-8") as handle:
        handle.write(summary_text(report))

    if not report.passed or report.failed_gates:
        lines = [gate.name for gate in report.failed_gates]
        if report.error:
            lines.insert(0, f"error: {report.error}")
        with open(marker, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")
    logger.info("run %s finished: %s", run_dir, "passed" if report.passed else "FAILED")
    return report


def load_report(run_dir: str) -> RunReport:
    path = os.path.join(run_dir, SUMMARY_FILE)
    if not os.path.isfile(path):
        raise ConfigurationError(f"no {SUMMARY_FILE} in {run_dir}")
    with open(path, encoding="utf-8") as handle:
        return RunReport.from_dict(json.load(handle))


def exit_status(report: RunReport, strictness: str = "hard") -> int:
    if strictness not in STRICTNESS:
        raise ConfigurationError(f"gate strictness must be one of {STRICTNESS}, got {strictness!r}")
    if report.error is not None:
        return 1
    if strictness == "hard" and not report.passed:
        return 1
    return 0


def main(argv=None) -> int:
    """
    Command-line entry point: run, list, validate and report.

    Exit status 2 for configuration errors, 1 for numerical failures or
    (with hard strictness) failed gates, 0 otherwise.
    """
    args = parse_arguments(argv)
    setup_quiet_environment()
    setup_logging(args.log_level)

    try:
        if args.command == "list":
            display_scenarios(list_scenarios())
            if args.write_configs:
                print_configs_written(write_scenario_configs(args.write_configs))
            return 0

        if args.command == "validate":
            scenario = resolve_scenario(args.config, args.seed)
            print_validation(scenario, scenario_hash(scenario))
            return 0

        if args.command == "report":
            Reporter().print(load_report(args.run_dir), args.run_dir)
            return 0

        scenario = resolve_scenario(args.config, args.seed)
        run_dir = run_directory(scenario, args.out_dir)
        print_run_start(scenario, run_dir)
        report = run_scenario(scenario, args.out_dir, args.threads)
        Reporter().print(report, run_dir)
        return exit_status(report, args.gate_strictness)
    except ConfigurationError as exc:
        print_error(str(exc), "Configuration error")
        return 2
    except GstLabError as exc:
        print_error(str(exc), type(exc).__name__)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
