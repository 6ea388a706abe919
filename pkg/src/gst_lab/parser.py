import argparse

from .core.scenarios import SUPPORTED_SCENARIOS

LOG_LEVELS = ("debug", "info", "warning", "error")
STRICTNESS = ("hard", "report-only")


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--log-level",
        type=str,
        choices=LOG_LEVELS,
        default="info",
        help="Logging level of the gst_lab loggers (default: info)",
    )


def parse_arguments(argv=None):
    parser = argparse.ArgumentParser(
        prog="gst-lab",
        description="Ground-state-transformed jump processes: solve, simulate and analyse scenarios",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a scenario end to end")
    run.add_argument(
        "config",
        type=str,
        help=f"Scenario config file, or a built-in name ({', '.join(sorted(SUPPORTED_SCENARIOS))})",
    )
    run.add_argument("--seed", type=int, default=None, help="Master seed; overrides the config seed")
    run.add_argument("--threads", type=int, default=1, help="Worker threads for ensemble simulation (default: 1)")
    run.add_argument("--out-dir", type=str, default="runs", help="Parent directory of run directories (default: runs)")
    run.add_argument(
        "--gate-strictness",
        type=str,
        choices=STRICTNESS,
        default="hard",
        help="'hard' exits nonzero on a failed gate; 'report-only' never does (default: hard)",
    )
    _add_common(run)

    listing = commands.add_parser("list", help="Show the built-in scenario registry")
    listing.add_argument(
        "--write-configs",
        type=str,
        metavar="DIR",
        default=None,
        help="Also write every registered scenario as a config file into DIR",
    )
    _add_common(listing)

    validate = commands.add_parser("validate", help="Run every config validation without computing")
    validate.add_argument("config", type=str, help="Scenario config file or built-in name")
    validate.add_argument("--seed", type=int, default=None, help="Master seed; overrides the config seed")
    _add_common(validate)

    report = commands.add_parser("report", help="Render the summary of a finished run directory")
    report.add_argument("run_dir", type=str, help="Run directory holding summary.json")
    _add_common(report)

    return parser.parse_args(argv)
