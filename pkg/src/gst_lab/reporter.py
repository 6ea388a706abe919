from typing import Dict, Optional

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

console = Console()

STATUS_STYLE = {"PASS": "green", "FAIL": "bold red", "SKIP": "dim"}


def _number(value, digits: int = 6) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, float)):
        return f"{value:.{digits}g}"
    return str(value)


def display_scenarios(scenarios: Dict):
    """
    Display the scenario registry using a Rich table.

    Args:
        scenarios (dict): Scenario name -> Scenario
    """
    table = Table(title="SCENARIO REGISTRY", box=box.ROUNDED)
    table.add_column("Name", style="cyan")
    table.add_column("sigma", justify="right")
    table.add_column("Jump density")
    table.add_column("Potential")
    table.add_column("Grid (R, n)", justify="right")
    table.add_column("Reference")
    table.add_column("Gating")

    for name, scenario in scenarios.items():
        params = ", ".join(f"{k}={_number(v, 4)}" for k, v in scenario.levy.params if k not in ("points", "values"))
        potential = ", ".join(f"{k}={_number(v, 4)}" for k, v in scenario.potential.params)
        table.add_row(
            name,
            _number(scenario.levy.sigma, 4),
            f"{scenario.levy.density}({params})" if params else scenario.levy.density,
            f"{scenario.potential.kind}({potential})",
            f"{scenario.grid.half_width:g}, {scenario.grid.points}",
            scenario.reference,
            "[yellow]exploratory[/yellow]" if scenario.exploratory else "gating",
        )
    console.print(table)


def print_validation(scenario, config_hash: str):
    console.print(
        f"[green]✓[/green] [bold]{scenario.name}[/bold] is valid "
        f"(seed {scenario.seed}, config hash {config_hash})"
    )


def print_run_start(scenario, run_dir: str):
    console.print(f"[bold]Running scenario:[/bold] {scenario.name} (seed {scenario.seed})")
    console.print(f"Writing to {run_dir}")
    console.print()


def print_configs_written(paths):
    for path in paths:
        console.print(f"  wrote {path}")


def print_error(message: str, kind: str = "Error"):
    console.print(f"[red]✗ {kind}: {message}[/red]")


def _block_table(rows) -> Table:
    table = Table(box=box.SIMPLE, show_header=False, expand=True)
    table.add_column("Key", style="cyan", ratio=1)
    table.add_column("Value", style="bold white", ratio=2)
    for key, value in rows:
        table.add_row(key, value)
    return table


class Reporter:
    """Reporter for a finished run: one panel per pipeline stage and the gate table."""

    def __init__(self, digits: int = 6):
        self.digits = digits

    def _fmt(self, value) -> str:
        return _number(value, self.digits)

    def gate_table(self, gates) -> Table:
        table = Table(title="ACCEPTANCE GATES", box=box.ROUNDED)
        table.add_column("#", justify="right")
        table.add_column("Gate", style="cyan")
        table.add_column("Status")
        table.add_column("Value", justify="right")
        table.add_column("Threshold")
        table.add_column("Note", style="dim")
        for gate in sorted(gates, key=lambda item: item.number):
            style = STATUS_STYLE.get(gate.status, "white")
            table.add_row(
                str(gate.number),
                gate.name,
                f"[{style}]{gate.status}[/{style}]",
                self._fmt(gate.value),
                gate.threshold,
                gate.note,
            )
        return table

    def print(self, report, run_dir: Optional[str] = None) -> None:
        """
        Display a RunReport using Rich panels.

        Args:
            report (RunReport): Report of a finished or aborted run
            run_dir (str): Optional location shown in the header
        """
        grid = Table.grid(expand=True)
        grid.add_column()

        title = f"[bold cyan]GST LAB RUN REPORT: {report.scenario}[/bold cyan]"
        if report.exploratory:
            title += " [yellow](exploratory)[/yellow]"
        grid.add_row(Panel(title, box=box.DOUBLE, expand=False))

        run_rows = [("Seed", str(report.seed)), ("Config Hash", report.config_hash), ("Reference", report.reference)]
        if run_dir:
            run_rows.append(("Run Directory", run_dir))
        grid.add_row(Panel(_block_table(run_rows), title="[bold]RUN[/bold]", border_style="blue", box=box.ROUNDED))

        eigen = report.eigen
        if eigen:
            rows = [
                ("lambda0", self._fmt(eigen.get("lambda0"))),
                ("Eigen Residual", self._fmt(eigen.get("residual"))),
                ("Grid-Doubling Drift", self._fmt(eigen.get("grid_doubling_drift"))),
                ("Spectral Gap", self._fmt(eigen.get("spectral_gap"))),
                (f"Tail Exponent ({eigen.get('tail_kind', '?')})", self._fmt(eigen.get("tail_exponent"))),
            ]
            grid.add_row(
                Panel(_block_table(rows), title="[bold]GROUND STATE[/bold]", border_style="green", box=box.ROUNDED)
            )

        generator = report.generator
        if generator:
            rows = [
                ("Cross-Oracle Error", self._fmt(generator.get("cross_oracle_error"))),
                ("Pull-Back Radius", self._fmt(generator.get("pullback_radius"))),
                ("BG Index (numeric)", self._fmt(generator.get("bg_index_numeric"))),
            ]
            for window, bound in sorted(generator.get("envelopes", {}).items(), key=lambda item: float(item[0])):
                rows.append((f"Envelope c(K={window})", self._fmt(bound)))
            grid.add_row(
                Panel(_block_table(rows), title="[bold]GENERATOR[/bold]", border_style="yellow", box=box.ROUNDED)
            )

        simulation = report.simulation
        if simulation:
            ensemble = simulation.get("ensemble", {})
            stationarity = simulation.get("stationarity", {})
            martingale = simulation.get("martingale", [])
            rows = [
                ("Paths", str(ensemble.get("n_paths", "-"))),
                ("Exit Fraction", self._fmt(ensemble.get("exit_fraction"))),
                ("KS Statistic", self._fmt(stationarity.get("ks_statistic"))),
                ("Max |z| (martingale)", self._fmt(max((abs(m["z_score"]) for m in martingale), default=None))),
            ]
            thinning = simulation.get("thinning")
            if thinning:
                rows.append(("Thinning p-value", self._fmt(thinning.get("p_value"))))
            rows.append(("Kato Ratio", self._fmt(simulation.get("kato", {}).get("ratio"))))
            grid.add_row(
                Panel(_block_table(rows), title="[bold]SIMULATION[/bold]", border_style="magenta", box=box.ROUNDED)
            )

        fractal = report.fractal
        if fractal:
            spectrum = fractal.get("spectrum", {})
            table = Table(box=box.SIMPLE, expand=True)
            table.add_column("h", justify="right", style="cyan")
            table.add_column("D_hat", justify="right")
            table.add_column("reference", justify="right")
            table.add_column("samples", justify="right")
            baseline = (fractal.get("baseline") or {}).get("D_hat")
            if baseline is not None:
                table.add_column("baseline", justify="right")
            for k, h in enumerate(spectrum.get("h", [])):
                row = [
                    f"{h:.3g}",
                    self._fmt(spectrum["D_hat"][k]),
                    self._fmt(spectrum["reference_D"][k]),
                    str(spectrum["count"][k]),
                ]
                if baseline is not None:
                    row.append(self._fmt(baseline[k]))
                table.add_row(*row)
            title = f"[bold]SPECTRUM[/bold] (median Holder {self._fmt(fractal.get('holder_median'))}"
            scales = fractal.get("holder_scale_window")
            if scales:
                title += f" on [{scales[0]:.2g}, {scales[1]:.2g}]"
            grid.add_row(
                Panel(
                    table,
                    title=title + ")",
                    border_style="white",
                    box=box.ROUNDED,
                )
            )

        console.print(grid)
        console.print(self.gate_table(report.gates))
        if report.error:
            console.print(f"[bold red]Run aborted:[/bold red] {report.error}")
        elif report.passed:
            console.print("[green]✓ all gating checks passed[/green]")
        else:
            names = ", ".join(gate.name for gate in report.failed_gates)
            console.print(f"[bold red]✗ failed gates:[/bold red] {names}")
