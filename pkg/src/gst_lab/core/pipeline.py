import filecmp
import json
import logging
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from ..errors import GstLabError
from ..fractal import (
    CoveringTable,
    ProbeTable,
    collision_mask,
    covering_measure,
    dyadic_jump_counts,
    holder_probes,
    jaffard_baseline,
    monotone_residual,
    point_systems,
    resolved_band_limit,
    scale_window,
    spectrum_estimate,
)
from ..gst import SHIPPED_BUMPS, GstModel, check_unitary_equivalence, martingale_bumps
from ..levy import BandSampler, sample_levy_path
from ..sim import (
    acceptance_reproducible,
    ensemble_summary,
    martingale_check,
    simulate_ensemble,
    stationarity_check,
    thinning_law_check,
)
from ..spectral import discretize_H, feynman_kac_decay, ground_state, kato_diagnostic
from ..utils import SAMPLE_TIME_STREAM, derive_rng, save_csv
from . import gates as g
from .config import scenario_hash, scenario_to_text
from .scenarios import Scenario

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"
FAILED_MARKER = "FAILED"
SCENARIO_FILE = "scenario.ini"
ORACLE_WINDOW = 4.0


@dataclass
class RunReport:
    """
    Everything a run produced, grouped per pipeline stage.

    The blocks hold plain JSON-ready values; `gates` carries one verdict per
    acceptance gate.
    """

    scenario: str
    seed: int
    config_hash: str
    exploratory: bool = False
    reference: str = "D2"
    eigen: Dict = field(default_factory=dict)
    generator: Dict = field(default_factory=dict)
    simulation: Dict = field(default_factory=dict)
    fractal: Dict = field(default_factory=dict)
    gates: List[g.GateResult] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def failed_gates(self) -> List[g.GateResult]:
        return g.failed_gates(self.gates)

    @property
    def passed(self) -> bool:
        """Exploratory runs never fail on gates; an aborted stage always fails."""
        if self.error is not None:
            return False
        return self.exploratory or not self.failed_gates

    def to_dict(self) -> Dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "exploratory": self.exploratory,
            "reference": self.reference,
            "eigen": self.eigen,
            "generator": self.generator,
            "simulation": self.simulation,
            "fractal": self.fractal,
            "gates": [gate.to_dict() for gate in sorted(self.gates, key=lambda gate: gate.number)],
            "artifacts": sorted(self.artifacts),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "RunReport":
        gates = [
            g.GateResult(
                number=int(item["number"]),
                status=item["status"],
                value=item.get("value"),
                threshold=item.get("threshold", ""),
                note=item.get("note", ""),
            )
            for item in data.get("gates", [])
        ]
        return cls(
            scenario=data["scenario"],
            seed=int(data["seed"]),
            config_hash=data["config_hash"],
            exploratory=bool(data.get("exploratory", False)),
            reference=data.get("reference", "D2"),
            eigen=data.get("eigen", {}),
            generator=data.get("generator", {}),
            simulation=data.get("simulation", {}),
            fractal=data.get("fractal", {}),
            gates=gates,
            artifacts=list(data.get("artifacts", [])),
            error=data.get("error"),
        )


def _plain(value):
    """JSON-ready copy: numpy scalars and arrays unwrapped, non-finite floats as null."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def summary_text(report: RunReport) -> str:
    """Sorted keys, repr floats, no timestamps: equal reports give equal bytes."""
    return json.dumps(_plain(report.to_dict()), sort_keys=True, indent=2, allow_nan=False) + "\n"


def harmonic_oracle(sigma: float, scale: float):
    """
    Exact ground state of -(sigma^2 / 2) d^2/dx^2 + scale x^2.

    Returns:
        (lambda0, phi0) with phi0 normalised in L2.
    """
    kappa = math.sqrt(2.0 * scale) / sigma
    eigenvalue = sigma * math.sqrt(0.5 * scale)

    def phi(x):
        return (kappa / math.pi) ** 0.25 * np.exp(-0.5 * kappa * np.asarray(x, dtype=float) ** 2)

    return eigenvalue, phi


def _stable_alpha(scenario: Scenario) -> Optional[float]:
    if scenario.levy.density != "stable":
        return None
    return float(dict(scenario.levy.params)["alpha"])


def _is_stable15(scenario: Scenario) -> bool:
    alpha = _stable_alpha(scenario)
    return alpha is not None and math.isclose(alpha, 1.5)


def _finite(value) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


class ScenarioRun:
    """
    One pass of the pipeline for one scenario: solve, build the generator,
    simulate, analyse, then judge every gate.

    Stages run in order and share state through the instance. Artifacts go to
    `run_dir` as they are produced, so a failing stage leaves the earlier files
    in place.
    """

    def __init__(self, scenario: Scenario, run_dir: str, threads: int = 1):
        self.scenario = scenario
        self.run_dir = run_dir
        self.threads = max(1, int(threads))
        self.seed = scenario.seed
        self.model = scenario.levy.build()
        self.potential = scenario.potential.build()
        self.report = RunReport(
            scenario=scenario.name,
            seed=self.seed,
            config_hash=scenario_hash(scenario),
            exploratory=scenario.exploratory,
            reference=scenario.reference,
        )
        self.header = (
            f"scenario={scenario.name}",
            f"seed={self.seed}",
            f"config_hash={self.report.config_hash}",
        )
        self._gates: Dict[int, g.GateResult] = {}
        self.gs = None
        self.H = None
        self.gst: Optional[GstModel] = None
        self.ensemble = None
        self.beta = self.model.bg_index() if self.model.has_jumps else 0.0

    def _path(self, name: str) -> str:
        self.report.artifacts.append(name)
        return os.path.join(self.run_dir, name)

    def _gate(self, result: g.GateResult):
        self._gates[result.number] = result
        logger.info("gate %2d %-20s %s %s", result.number, result.name, result.status, result.note)

    # -- stages -------------------------------------------------------------

    def solve_eigenproblem(self):
        scenario = self.scenario
        self.H = discretize_H(self.model, self.potential, scenario.grid)
        self.gs = ground_state(self.H)
        self.gs.to_csv(self._path("ground_state.csv"), self.header)
        eigen = {
            "lambda0": self.gs.eigenvalue,
            "residual": self.gs.residual,
            "tail_kind": self.gs.tail.kind,
            "tail_exponent": self.gs.tail_exponent,
            "tail_r_squared": _finite(self.gs.tail.r_squared),
            "spectral_gap": self.gs.spectral_gap,
            "iterations": self.gs.iterations,
            "grid_points": scenario.grid.points,
            "grid_halfwidth": scenario.grid.half_width,
        }

        drift = None
        if scenario.analysis.grid_doubling:
            coarse = scenario.grid.coarsened()
            coarse_gs = ground_state(discretize_H(self.model, self.potential, coarse))
            drift = abs(self.gs.eigenvalue - coarse_gs.eigenvalue)
            eigen["lambda0_half_grid"] = coarse_gs.eigenvalue
            eigen["grid_doubling_drift"] = drift
        self.report.eigen = eigen
        logger.info("lambda0 = %.10g (residual %.3g)", self.gs.eigenvalue, self.gs.residual)

        self._gate(self._oracle_gate())
        residual_ok = self.gs.residual <= 1e-8
        if drift is None:
            self._gate(g.verdict(2, residual_ok, self.gs.residual, "residual <= 1e-8", "grid doubling disabled"))
        else:
            self._gate(
                g.verdict(
                    2,
                    residual_ok and drift <= 1e-6,
                    drift,
                    "residual <= 1e-8 and drift <= 1e-6",
                    f"residual {self.gs.residual:.3g}",
                )
            )
        self._gate(self._tail_gate())

    def _oracle_gate(self) -> g.GateResult:
        params = dict(self.scenario.potential.params)
        quadratic = self.scenario.potential.kind == "polynomial" and int(params.get("degree_half", 1)) == 1
        if self.model.has_jumps or not quadratic:
            return g.skipped(1, "needs a Brownian triplet with a quadratic potential")
        eigenvalue, phi = harmonic_oracle(self.model.sigma, float(params.get("scale", 1.0)))
        x = self.scenario.grid.nodes
        inside = np.abs(x) <= ORACLE_WINDOW
        exact = phi(x[inside])
        phi_error = float(np.max(np.abs(self.gs.phi[inside] - exact) / exact))
        lambda_error = abs(self.gs.eigenvalue - eigenvalue)
        self.report.eigen["oracle_lambda0"] = eigenvalue
        self.report.eigen["oracle_phi_error"] = phi_error
        return g.verdict(
            1,
            lambda_error <= 1e-6 and phi_error < 1e-4,
            lambda_error,
            "|lambda0 error| <= 1e-6, phi0 rel. error < 1e-4",
            f"phi0 error {phi_error:.3g}",
        )

    def _tail_gate(self) -> g.GateResult:
        alpha = _stable_alpha(self.scenario)
        if alpha is None or self.model.sigma != 0 or self.scenario.potential.kind != "polynomial":
            return g.skipped(3, "needs a pure stable triplet with a polynomial potential")
        m = int(dict(self.scenario.potential.params).get("degree_half", 1))
        expected = -(1.0 + alpha + 2.0 * m)
        deviation = abs(self.gs.tail_exponent - expected)
        self.report.eigen["tail_expected"] = expected
        return g.verdict(3, deviation <= 0.15, deviation, f"|p - ({expected:g})| <= 0.15")

    def build_generator(self):
        analysis = self.scenario.analysis
        self.gst = GstModel(self.model, self.gs, self.H, eps_s=self.scenario.simulation.eps_s)
        field_ = self.gst.drift_field()
        field_.to_csv(self._path("drift_field.csv"), self.header)
        window = self.scenario.simulation.window
        functions = dict(list(SHIPPED_BUMPS.items())[: analysis.unitary_functions])
        error = check_unitary_equivalence(self.gst, functions)
        self.report.generator = {
            "cross_oracle_error": error,
            "pullback_radius": _finite(self.gst.pullback_radius(window)),
            "envelopes": self.gst.envelope_report(sorted({2.0, 4.0, window})),
            "big_jump_envelope": self.gst.big_jump_envelope(window),
            "test_functions": sorted(functions),
        }
        self._gate(g.verdict(4, error <= 1e-5, error, "max relative discrepancy <= 1e-5"))

        if not self.model.has_jumps:
            self._gate(g.skipped(5, "no jump part"))
            return
        try:
            numeric = self.model.bg_index("numeric")
        except GstLabError as exc:
            self._gate(g.GateResult(5, g.FAIL, note=str(exc)))
            return
        tolerance = 0.1 if self.scenario.levy.density == "logpert" else 0.05
        deviation = abs(numeric - self.beta)
        self.report.generator["bg_index_numeric"] = numeric
        self.report.generator["bg_index"] = self.beta
        self._gate(g.verdict(5, deviation <= tolerance, deviation, f"|beta_hat - {self.beta:g}| <= {tolerance:g}"))

    def run_checks(self):
        """Martingale, stationarity, thinning and Kato diagnostics."""
        scenario, analysis = self.scenario, self.scenario.analysis
        cfg = scenario.simulation
        self.ensemble = simulate_ensemble(self.gst, cfg, threads=self.threads)
        summary = ensemble_summary(self.ensemble)

        martingales = []
        for t in analysis.martingale_times:
            for name, bump in martingale_bumps(analysis.martingale_functions).items():
                martingales.append(martingale_check(self.gst, cfg, bump, t, paths=self.ensemble, name=name))
        worst = max(abs(m.z_score) for m in martingales)
        reliable = all(m.reliable for m in martingales)
        self._gate(
            g.verdict(6, worst < 3 and reliable, worst, "|z| < 3", "" if reliable else "exit fraction above 20%")
        )

        stationarity = stationarity_check(self.gst, cfg, analysis.stationarity_time, paths=self.ensemble)
        self._gate(g.verdict(7, stationarity.ks_statistic < 0.05, stationarity.ks_statistic, "KS < 0.05"))

        thinning = None
        if self.model.has_jumps:
            x_bar = min(analysis.thinning_state, cfg.window)
            thinning = thinning_law_check(
                self.gst,
                x_bar=x_bar,
                window=cfg.window,
                n_proposals=analysis.thinning_proposals,
                bins=analysis.thinning_bins,
                seed=self.seed,
            )
            self._gate(g.verdict(8, thinning.p_value > 1e-3, thinning.p_value, "p > 0.001"))
        else:
            self._gate(g.skipped(8, "no jump part"))

        kato = kato_diagnostic(
            self.model, self.potential, times=analysis.kato_times, n_paths=analysis.kato_paths, seed=self.seed
        )
        kato.to_csv(self._path("kato.csv"), self.header)
        ratio = kato.ratio(min(analysis.kato_times), max(analysis.kato_times))
        self._gate(g.verdict(14, ratio <= 0.5, ratio, "estimate(t_small) / estimate(t_large) <= 0.5"))

        decay = feynman_kac_decay(self.model, self.potential, seed=self.seed)
        self.report.simulation = {
            "ensemble": summary,
            "martingale": [m.to_dict() for m in martingales],
            "stationarity": stationarity.to_dict(),
            "thinning": None if thinning is None else {**asdict(thinning), "acceptance_rate": thinning.acceptance_rate},
            "kato": {
                "times": kato.times.tolist(),
                "sup_estimates": kato.sup_estimates.tolist(),
                "ratio": ratio,
            },
            "feynman_kac": {
                "times": decay.times.tolist(),
                "decay_rates": [_finite(v) for v in decay.decay_rates],
                "lambda0": self.gs.eigenvalue,
            },
        }

    def run_fractal(self):
        """Spectrum, Holder estimates, covering tables and dyadic counts from a point-start ensemble."""
        scenario, settings = self.scenario, self.scenario.fractal
        cfg = scenario.fractal_config()
        paths = simulate_ensemble(self.gst, cfg, threads=self.threads) if settings.n_paths > 0 else []
        sigma = self.model.sigma
        block: Dict = {"n_paths": len(paths), "beta": self.beta}
        j_max = resolved_band_limit(settings.eps_s)
        systems = point_systems(paths)

        if paths:
            paths[0].to_csv(self._path("path_states.csv"), self._path("path_jumps.csv"), self.header)
            block["acceptance_reproducible"] = all(acceptance_reproducible(p, self.gst) for p in paths[:8])

        spectrum = spectrum_estimate(
            paths,
            self.beta,
            sigma,
            settings.h_grid,
            settings.eps_s,
            delta_max=settings.delta_max,
            min_count=settings.min_bin_count,
            seed=self.seed,
        )
        spectrum.to_csv(self._path("spectrum.csv"), self.header)
        block["spectrum"] = spectrum.to_dict()
        block["spectrum_csv"] = "spectrum.csv"
        if self.beta > 0:
            block["monotone_residual"] = monotone_residual(spectrum, self.beta)

        table = self._holder_probes(paths, systems, cfg, j_max)
        table.to_csv(self._path("holder_probes.csv"), self.header)
        median = table.median()
        block["holder_median"] = _finite(median)
        block["holder_probes"] = len(table.estimates)
        block["holder_scale_window"] = list(scale_window(settings.eps_s, self.beta, cfg.dt, cfg.horizon))

        baseline = self._baseline()
        if baseline is not None:
            baseline.to_csv(self._path("baseline_spectrum.csv"), self.header)
            block["baseline"] = baseline.to_dict()

        covering = self._covering(systems, j_max)
        block["covering"] = {f"{delta:g}": table.fractions.tolist() for delta, table in covering.items()}
        if covering:
            block["covering_epsilons"] = next(iter(covering.values())).epsilons.tolist()

        counts = None
        if self.model.has_jumps and systems:
            envelope = self.gst.local_ratio_bound(cfg.window)
            counts = dyadic_jump_counts(systems, self.model, envelope, j_max)
            counts.to_csv(self._path("dyadic_counts.csv"), self.header)
            self.model.band_mass_table(j_max).to_csv(self._path("band_masses.csv"), self.header)
            block["dyadic_counts"] = counts.to_dict()
        self.report.fractal = block

        self._gate(self._baseline_gate(baseline))
        self._gate(self._pure_jump_gate(spectrum, median))
        self._gate(self._diffusive_gate(spectrum, median))
        self._gate(self._covering_gate(covering))
        self._gate(self._counts_gate(counts))

    def _holder_probes(self, paths, systems, cfg, j_max) -> ProbeTable:
        settings = self.scenario.fractal
        if not paths:
            return ProbeTable(())
        per_path = math.ceil(settings.holder_probes / len(paths))
        window = scale_window(settings.eps_s, self.beta, cfg.dt, cfg.horizon)
        estimates = []
        for index, (path, ps) in enumerate(zip(paths, systems)):
            rng = derive_rng(self.seed, SAMPLE_TIME_STREAM, index, 1)
            times = np.sort(rng.uniform(0.0, path.analyzable_horizon, size=per_path))
            times = times[~collision_mask(ps, times, path.dt)]
            table = holder_probes(path, ps, times, window, self.beta, self.model.sigma, j_max)
            estimates.extend(table.estimates)
        return ProbeTable(tuple(estimates[: settings.holder_probes]))

    def _baseline(self):
        settings = self.scenario.fractal
        if settings.baseline_paths <= 0:
            return None
        sampler = BandSampler.build(self.model, settings.baseline_eps_s) if self.model.has_jumps else None
        levy_paths = [
            sample_levy_path(
                self.model,
                settings.horizon,
                settings.baseline_dt,
                settings.baseline_eps_s,
                self.seed,
                index,
                sampler=sampler,
            )
            for index in range(settings.baseline_paths)
        ]
        return jaffard_baseline(
            levy_paths,
            self.beta,
            self.model.sigma,
            settings.h_grid,
            settings.baseline_eps_s,
            delta_max=settings.delta_max,
            min_count=settings.min_bin_count,
            seed=self.seed,
        )

    def _covering(self, systems, j_max):
        if not self.model.has_jumps or not systems:
            return {}
        epsilons = 2.0 ** -np.arange(j_max + 1, dtype=float)
        tables = {}
        for delta in self.scenario.fractal.covering_deltas:
            per_path = [covering_measure(ps, delta, self.beta, epsilons) for ps in systems]
            fractions = np.mean([t.fractions for t in per_path], axis=0)
            tables[float(delta)] = CoveringTable(float(delta), per_path[0].epsilons, fractions)
        rows = np.vstack([table.rows() for table in tables.values()])
        save_csv(self._path("covering.csv"), ["epsilon", "delta", "measure_fraction"], rows, self.header)
        return tables

    def _spectrum_deviation(self, spectrum, hs) -> float:
        worst = 0.0
        for h in hs:
            if np.min(np.abs(spectrum.h_grid - h)) > 1e-9:
                return float("inf")
            value = spectrum.value_at(h)
            if not np.isfinite(value):
                return float("inf")
            worst = max(worst, abs(value - self.beta * h))
        return worst

    def _baseline_gate(self, baseline) -> g.GateResult:
        if self.model.sigma != 0 or not _is_stable15(self.scenario):
            return g.skipped(9, "calibration gate of the pure alpha = 1.5 stable ensemble")
        if baseline is None:
            return g.GateResult(9, g.FAIL, note="baseline disabled")
        hs = [h for h in baseline.h_grid if h <= 0.6 + 1e-9]
        deviation = self._spectrum_deviation(baseline, hs)
        ok = deviation <= 0.15
        note = ""
        top = 1.0 / self.beta
        if np.min(np.abs(baseline.h_grid - top)) < 1e-9:
            at_top = baseline.value_at(top)
            ok = ok and np.isfinite(at_top) and abs(at_top - 1.0) <= 0.1
            note = f"D(1/beta) = {at_top:.3g}"
        return g.verdict(9, ok, deviation, "|D - beta h| <= 0.15, D(1/beta) = 1 +- 0.1", note)

    def _pure_jump_gate(self, spectrum, median) -> g.GateResult:
        if self.model.sigma != 0 or not _is_stable15(self.scenario):
            return g.skipped(10, "applies to the pure alpha = 1.5 stable scenario")
        deviation = self._spectrum_deviation(spectrum, (0.2, 0.3, 0.4, 0.5))
        holder = abs(median - 1.0 / self.beta) if np.isfinite(median) else float("inf")
        return g.verdict(
            10,
            deviation <= 0.2 and holder <= 0.1,
            deviation,
            "|D - beta h| <= 0.2 on 0.2..0.5, |median H - 1/beta| <= 0.1",
            f"median H {median:.3g}",
        )

    def _diffusive_gate(self, spectrum, median) -> g.GateResult:
        if self.model.sigma == 0 or not _is_stable15(self.scenario):
            return g.skipped(11, "applies to the mixed alpha = 1.5 stable scenario")
        deviation = self._spectrum_deviation(spectrum, (0.2, 0.3))
        half = spectrum.value_at(0.5)
        holder = abs(median - 0.5) if np.isfinite(median) else float("inf")
        ok = deviation <= 0.2 and holder <= 0.1 and np.isfinite(half) and abs(half - 1.0) <= 0.1
        return g.verdict(
            11,
            ok,
            deviation,
            "|D - beta h| <= 0.2 on 0.2, 0.3; D(1/2) = 1 +- 0.1; |median H - 1/2| <= 0.1",
            f"median H {median:.3g}, D(1/2) {half:.3g}",
        )

    def _covering_gate(self, covering) -> g.GateResult:
        if self.model.sigma != 0 or not _is_stable15(self.scenario):
            return g.skipped(12, "applies to the pure alpha = 1.5 stable scenario")
        if 0.8 not in covering or 1.5 not in covering:
            return g.GateResult(12, g.FAIL, note="covering deltas 0.8 and 1.5 are required")
        full = float(covering[0.8].fractions[0])
        partial = covering[1.5].fractions
        # fractions are listed by increasing epsilon, so shrinking epsilon never adds cover
        shrinking = bool(np.all(np.diff(partial) >= 0))
        ok = full >= 0.99 and partial[0] < 1.0 and shrinking
        return g.verdict(
            12,
            ok,
            full,
            "fraction(0.8) >= 0.99 at the smallest eps; fraction(1.5) < 1 and monotone",
            f"fraction(1.5) at smallest eps {partial[0]:.3g}",
        )

    def _counts_gate(self, counts) -> g.GateResult:
        if counts is None:
            return g.skipped(13, "no jump part")
        resolved = counts.inside[1:]
        if self.scenario.levy.density == "stable":
            growth_ok = np.isfinite(counts.growth) and abs(counts.growth - self.beta) <= 0.2
            threshold = f"|r - {self.beta:g}| <= 0.2, every N_j in band"
        else:
            growth_ok = counts.growth_ok
            threshold = f"r <= {self.beta:g} + 0.2, every N_j in band"
        return g.verdict(13, bool(growth_ok and np.all(resolved)), counts.growth, threshold)

    def check_determinism(self):
        """
        Rerun every stage in a scratch directory with another thread count and
        compare the serialized summary and every artifact byte for byte.
        """
        if not self.scenario.analysis.determinism_rerun:
            self._gate(g.skipped(15, "rerun disabled by the scenario"))
            return
        threads = 1 if self.threads > 1 else 2
        logger.info("[%s] determinism rerun with %d threads", self.scenario.name, threads)
        with tempfile.TemporaryDirectory(prefix="gst-lab-rerun-") as scratch:
            rerun = ScenarioRun(self.scenario, scratch, threads)
            rerun.write_scenario()
            if not rerun.run_stages(rerun.stages()):
                self._gate(g.GateResult(15, g.FAIL, note=f"rerun aborted: {rerun.report.error}"))
                return
            names = sorted(set(self.report.artifacts) | set(rerun.report.artifacts))
            differing = [name for name in names if not _same_bytes(self.run_dir, scratch, name)]
            same_summary = self.summary_snapshot() == rerun.summary_snapshot()
        note = "summary differs" if not same_summary else ""
        if differing:
            note = ", ".join(filter(None, [note, "artifacts differ: " + " ".join(differing)]))
        self._gate(
            g.verdict(
                15,
                same_summary and not differing,
                float(len(differing) + (not same_summary)),
                "rerun reproduces summary and artifacts byte for byte",
                note,
            )
        )

    # -- driver -------------------------------------------------------------

    def stages(self):
        return (
            ("eigen", self.solve_eigenproblem),
            ("generator", self.build_generator),
            ("checks", self.run_checks),
            ("fractal", self.run_fractal),
        )

    def run_stages(self, stages) -> bool:
        """Run stages in order; the first GstLabError is recorded in the report and stops the run."""
        for name, stage in stages:
            logger.info("[%s] stage %s", self.scenario.name, name)
            try:
                stage()
            except GstLabError as exc:
                logger.error("stage %s failed: %s", name, exc)
                self.report.error = f"{name}: {exc}"
                return False
        return True

    def write_scenario(self):
        with open(self._path(SCENARIO_FILE), "w", encoding="utf-8") as handle:
            handle.write(scenario_to_text(self.scenario))

    def summary_snapshot(self) -> str:
        """summary.json bytes for the gates judged so far."""
        gates = [self._gates[number] for number in sorted(self._gates)]
        return summary_text(replace(self.report, gates=gates))

    def execute(self) -> RunReport:
        self.write_scenario()
        self.run_stages(self.stages() + (("determinism", self.check_determinism),))
        for number in g.GATE_NAMES:
            if number not in self._gates:
                reason = "not reached" if self.report.error else "not evaluated"
                self._gates[number] = g.GateResult(number, g.FAIL, note=reason)
        self.report.gates = [self._gates[number] for number in sorted(self._gates)]
        return self.report


def _same_bytes(left_dir: str, right_dir: str, name: str) -> bool:
    left, right = os.path.join(left_dir, name), os.path.join(right_dir, name)
    return os.path.isfile(left) and os.path.isfile(right) and filecmp.cmp(left, right, shallow=False)
