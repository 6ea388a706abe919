import itertools
import os
from dataclasses import replace

import pytest

from gst_lab.core import gates as g
from gst_lab.core.config import parse_scenario_text, read_scenario, scenario_hash, scenario_to_text
from gst_lab.core.pipeline import SUMMARY_FILE, RunReport, ScenarioRun
from gst_lab.core.runner import exit_status, load_report, main, run_scenario, summary_text
from gst_lab.core.scenarios import SUPPORTED_SCENARIOS, load_scenario
from gst_lab.errors import ConfigurationError


def run_cli(capsys, argv):
    exit_code = main(argv)
    captured = capsys.readouterr()
    return exit_code, captured.out + captured.err


def _report(statuses, exploratory=False, error=None):
    gates = [g.GateResult(number, status) for number, status in zip(sorted(g.GATE_NAMES), statuses)]
    return RunReport(
        scenario="harmonic-brownian",
        seed=0,
        config_hash="0" * 16,
        exploratory=exploratory,
        gates=gates,
        error=error,
    )


def _all(status):
    return [status] * len(g.GATE_NAMES)


class TestCommands:
    def test_list(self, capsys):
        exit_code, output = run_cli(capsys, ["list"])
        assert exit_code == 0
        assert "SCENARIO REGISTRY" in output

    def test_list_writes_configs(self, capsys, tmp_path):
        exit_code, _ = run_cli(capsys, ["list", "--write-configs", str(tmp_path)])
        assert exit_code == 0
        written = sorted(os.listdir(tmp_path))
        assert written == sorted(f"{name}.ini" for name in SUPPORTED_SCENARIOS)
        scenario = read_scenario(str(tmp_path / "stable15-poly.ini"))
        assert scenario_hash(scenario) == scenario_hash(load_scenario("stable15-poly"))

    @pytest.mark.parametrize("name", sorted(SUPPORTED_SCENARIOS))
    def test_validate_builtin(self, capsys, name):
        exit_code, output = run_cli(capsys, ["validate", name])
        assert exit_code == 0
        assert "is valid" in output

    def test_validate_file_with_seed_override(self, capsys, tmp_path):
        path = tmp_path / "scenario.ini"
        path.write_text(scenario_to_text(load_scenario("harmonic-brownian")))
        exit_code, output = run_cli(capsys, ["validate", str(path), "--seed", "42"])
        assert exit_code == 0
        assert "seed 42" in output

    @pytest.mark.parametrize(
        "old, new",
        [
            pytest.param("time_step = 0.005", "time_step = 50.0", id="step-above-horizon"),
            pytest.param("[grid]\n", "[grid]\nspacing = 0.1\n", id="unknown-key"),
            pytest.param("grid_points = 2048", "grid_points = 2000", id="grid-not-power-of-two"),
        ],
    )
    def test_invalid_config_exits_with_two(self, capsys, tmp_path, old, new):
        text = scenario_to_text(load_scenario("harmonic-brownian"))
        assert old in text
        path = tmp_path / "bad.ini"
        path.write_text(text.replace(old, new, 1))
        exit_code, output = run_cli(capsys, ["validate", str(path)])
        assert exit_code == 2
        assert "Configuration error" in output

    def test_unknown_scenario(self, capsys):
        exit_code, output = run_cli(capsys, ["run", "no-such-scenario"])
        assert exit_code == 2
        assert "Configuration error" in output

    def test_report_of_missing_run(self, capsys, tmp_path):
        exit_code, _ = run_cli(capsys, ["report", str(tmp_path / "missing")])
        assert exit_code == 2

    def test_report_of_written_summary(self, capsys, tmp_path):
        (tmp_path / SUMMARY_FILE).write_text(summary_text(_report(_all(g.PASS))))
        exit_code, output = run_cli(capsys, ["report", str(tmp_path)])
        assert exit_code == 0
        assert "GST LAB RUN REPORT" in output


class TestScenarioConfig:
    @pytest.mark.parametrize("name", sorted(SUPPORTED_SCENARIOS))
    def test_canonical_text_is_stable(self, name):
        scenario = load_scenario(name)
        text = scenario_to_text(scenario)
        assert scenario_to_text(parse_scenario_text(text)) == text
        assert scenario_hash(parse_scenario_text(text)) == scenario_hash(scenario)
        assert len(scenario_hash(scenario)) == 16

    def test_seed_changes_the_hash(self):
        scenario = load_scenario("stable12-poly")
        assert scenario_hash(scenario) != scenario_hash(scenario.with_seed(1))

    def test_unknown_section(self):
        text = scenario_to_text(load_scenario("stable08-poly")) + "\n[plots]\ndpi = 100\n"
        with pytest.raises(ConfigurationError, match="unknown section"):
            parse_scenario_text(text)

    def test_check_ensemble_starts_stationary(self):
        scenario = load_scenario("stable08-poly")
        bad = replace(scenario, simulation=scenario.simulation.with_(initial_law="point"))
        with pytest.raises(ConfigurationError):
            bad.validate()


class TestExitStatus:
    def test_passing_run(self):
        report = _report(_all(g.PASS))
        assert report.passed
        assert exit_status(report) == 0

    def test_failed_gate(self):
        report = _report([g.FAIL] + _all(g.PASS)[1:])
        assert [gate.name for gate in report.failed_gates] == ["eigensolver_oracle"]
        assert exit_status(report, "hard") == 1
        assert exit_status(report, "report-only") == 0

    def test_exploratory_run_never_fails_on_gates(self):
        report = _report(_all(g.FAIL), exploratory=True)
        assert report.passed
        assert exit_status(report) == 0

    def test_aborted_stage(self):
        report = _report(_all(g.SKIP), error="eigen: no bound state")
        assert not report.passed
        assert exit_status(report, "report-only") == 1

    def test_unknown_strictness(self):
        with pytest.raises(ConfigurationError):
            exit_status(_report(_all(g.PASS)), "lenient")

    def test_gate_table_is_complete(self):
        assert len(g.GATE_NAMES) == 15
        assert g.complete(_report(_all(g.PASS)).gates)
        assert not g.complete(_report(_all(g.PASS)).gates[:-1])


class TestSummary:
    def test_summary_is_null_safe_and_reloadable(self, tmp_path):
        report = _report(_all(g.PASS))
        report.eigen = {"lambda0": 0.5, "tail_exponent": float("-inf"), "residual": float("nan")}
        text = summary_text(report)
        assert text == summary_text(report)
        assert "Infinity" not in text and "NaN" not in text
        (tmp_path / SUMMARY_FILE).write_text(text)
        loaded = load_report(str(tmp_path))
        assert loaded.eigen["tail_exponent"] is None
        assert loaded.config_hash == report.config_hash
        assert [gate.status for gate in loaded.gates] == _all(g.PASS)


@pytest.mark.slow
@pytest.mark.integration
def test_small_harmonic_run_is_deterministic(tmp_path):
    base = load_scenario("harmonic-brownian")
    scenario = replace(
        base,
        simulation=base.simulation.with_(horizon=1.0, n_paths=300),
        fractal=replace(base.fractal, n_paths=10, baseline_paths=4, holder_probes=50),
        analysis=replace(
            base.analysis,
            stationarity_time=1.0,
            kato_paths=100,
            thinning_proposals=20_000,
            grid_doubling=False,
        ),
    )
    first = run_scenario(scenario, str(tmp_path / "a"), threads=1)
    second = run_scenario(scenario, str(tmp_path / "b"), threads=2)

    assert g.complete(first.gates)
    summaries = [
        (tmp_path / out / f"harmonic-brownian-seed{scenario.seed}" / SUMMARY_FILE).read_bytes() for out in ("a", "b")
    ]
    assert summaries[0] == summaries[1]
    assert next(gate for gate in first.gates if gate.number == 15).status == g.PASS
    assert first.artifacts == second.artifacts
    run_dir = tmp_path / "a" / f"harmonic-brownian-seed{scenario.seed}"
    for name in first.artifacts:
        assert (run_dir / name).is_file()


class TestDeterminismGate:
    def _gate(self, tmp_path, monkeypatch, stage, scenario=None):
        def stages(run):
            return (("table", lambda: stage(run)),)

        monkeypatch.setattr(ScenarioRun, "stages", stages)
        run = ScenarioRun(scenario or load_scenario("harmonic-brownian"), str(tmp_path))
        run.write_scenario()
        assert run.run_stages(run.stages())
        run.check_determinism()
        return run._gates[15]

    @staticmethod
    def _write(run, text):
        with open(run._path("table.csv"), "w", encoding="utf-8") as handle:
            handle.write(text)

    def test_identical_rerun_passes(self, tmp_path, monkeypatch):
        gate = self._gate(tmp_path, monkeypatch, lambda run: self._write(run, "x,y\n1,2\n"))
        assert gate.status == g.PASS

    def test_changed_artifact_fails(self, tmp_path, monkeypatch):
        counter = itertools.count()
        gate = self._gate(tmp_path, monkeypatch, lambda run: self._write(run, f"{next(counter)}\n"))
        assert gate.status == g.FAIL
        assert "table.csv" in gate.note

    def test_changed_summary_fails(self, tmp_path, monkeypatch):
        counter = itertools.count()

        def stage(run):
            run.report.eigen = {"lambda0": 0.5 + next(counter)}

        gate = self._gate(tmp_path, monkeypatch, stage)
        assert gate.status == g.FAIL
        assert "summary differs" in gate.note

    def test_rerun_can_be_disabled(self, tmp_path, monkeypatch):
        base = load_scenario("harmonic-brownian")
        scenario = replace(base, analysis=replace(base.analysis, determinism_rerun=False))
        gate = self._gate(tmp_path, monkeypatch, lambda run: self._write(run, "x\n"), scenario)
        assert gate.status == g.SKIP
