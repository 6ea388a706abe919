from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Tuple

from ..errors import ConfigurationError
from ..levy import build_density
from ..levy.model import LevyModel
from ..sim.config import SimConfig
from ..spectral.grid import Grid1D, Potential, build_potential

# Reference spectrum ids: "D1" with a Brownian part, "D2" for pure jumps.
REFERENCE_CURVES = ("D1", "D2")


@dataclass(frozen=True)
class LevySpec:
    sigma: float = 0.0
    density: str = "none"
    params: Tuple[Tuple[str, object], ...] = ()

    def build(self) -> LevyModel:
        return LevyModel(sigma=self.sigma, density=build_density(self.density, **dict(self.params)))


@dataclass(frozen=True)
class PotentialSpec:
    kind: str = "polynomial"
    params: Tuple[Tuple[str, object], ...] = ()

    def build(self) -> Potential:
        return build_potential(self.kind, **dict(self.params))


@dataclass(frozen=True)
class FractalSpec:
    """Ensembles and estimator settings of the path-regularity stage."""

    n_paths: int = 200
    horizon: float = 1.0
    dt: float = 1e-4
    eps_s: float = 0.005
    h_grid: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    delta_max: float = 4.0
    min_bin_count: int = 50
    holder_probes: int = 1000
    covering_deltas: Tuple[float, ...] = (0.8, 1.5)
    baseline_paths: int = 200
    baseline_dt: float = 1e-5
    baseline_eps_s: float = 1e-3


@dataclass(frozen=True)
class AnalysisSpec:
    """Diagnostics settings; the check ensemble itself is the scenario's SimConfig."""

    martingale_times: Tuple[float, ...] = (0.5, 1.0)
    martingale_functions: int = 3
    stationarity_time: float = 5.0
    thinning_proposals: int = 100_000
    thinning_bins: int = 20
    thinning_state: float = 0.5
    unitary_functions: int = 5
    kato_times: Tuple[float, ...] = (0.01, 0.1)
    kato_paths: int = 400
    determinism_rerun: bool = True
    grid_doubling: bool = True


@dataclass(frozen=True)
class Scenario:
    """
    Everything one run needs: the triplet, the potential, the grid, the check
    ensemble, the fractal stage and the reference curve.

    Args:
        name (str): Registry name, also used for the run directory
        exploratory (bool): Gates are reported but never fail the run
        reference (str): "D1" (Brownian part present) or "D2" (pure jump)
    """

    name: str
    levy: LevySpec
    potential: PotentialSpec
    grid: Grid1D
    simulation: SimConfig
    fractal: FractalSpec = field(default_factory=FractalSpec)
    analysis: AnalysisSpec = field(default_factory=AnalysisSpec)
    exploratory: bool = False
    reference: str = "D2"

    @property
    def seed(self) -> int:
        return self.simulation.seed

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, simulation=self.simulation.with_(seed=int(seed)))

    def validate(self) -> "Scenario":
        """
        Run every component validation; nothing is computed.

        Raises:
            ConfigurationError: On the first failing component
        """
        if not self.name:
            raise ConfigurationError("scenario name must not be empty")
        if self.reference not in REFERENCE_CURVES:
            raise ConfigurationError(f"reference must be one of {REFERENCE_CURVES}, got {self.reference!r}")
        model = self.levy.build()
        if model.sigma < 0:
            raise ConfigurationError(f"sigma must be non-negative, got {model.sigma}")
        if not model.has_jumps and model.sigma == 0:
            raise ConfigurationError("the Levy triplet is zero; set sigma > 0 or a jump density")
        self.potential.build()
        self.simulation.validate(self.grid)
        if self.simulation.initial_law != "stationary":
            raise ConfigurationError("the check ensemble must start from the stationary law")
        if self.analysis.stationarity_time > self.simulation.horizon:
            raise ConfigurationError("stationarity_time exceeds horizon_time")
        if max(self.analysis.martingale_times) > self.simulation.horizon:
            raise ConfigurationError("a martingale time exceeds horizon_time")
        fractal_cfg = self.fractal_config()
        fractal_cfg.validate(self.grid)
        if not 1.0 <= self.fractal.delta_max:
            raise ConfigurationError(f"delta_max must be at least 1, got {self.fractal.delta_max}")
        if not 0 < self.fractal.baseline_eps_s <= 1:
            raise ConfigurationError("baseline_eps_s must lie in (0, 1]")
        if self.fractal.baseline_dt <= 0 or self.fractal.baseline_dt > self.fractal.horizon:
            raise ConfigurationError("baseline_dt must lie in (0, fractal horizon]")
        return self

    def fractal_config(self) -> SimConfig:
        """Point-start ensemble with full jump marks for the fractal stage."""
        return self.simulation.with_(
            horizon=self.fractal.horizon,
            dt=self.fractal.dt,
            eps_s=self.fractal.eps_s,
            n_paths=self.fractal.n_paths,
            initial_law="point",
            x0=0.0,
            record_jumps=True,
            record_rejected=False,
        )


def _check_ensemble(seed: int = 0, window: float = 6.0) -> SimConfig:
    return SimConfig(
        horizon=5.0,
        dt=5e-3,
        eps_s=0.05,
        window=window,
        seed=seed,
        n_paths=10_000,
        initial_law="stationary",
        record_jumps=False,
    )


def _stable_poly(name: str, alpha: float, sigma: float = 0.0, **changes) -> Scenario:
    return Scenario(
        name=name,
        levy=LevySpec(sigma=sigma, density="stable", params=(("alpha", alpha), ("scale", 1.0))),
        potential=PotentialSpec("polynomial", (("degree_half", 2), ("scale", 1.0))),
        grid=Grid1D(half_width=8.0, points=4096),
        simulation=_check_ensemble(),
        reference="D1" if sigma else "D2",
        **changes,
    )


def harmonic_brownian() -> Scenario:
    return Scenario(
        name="harmonic-brownian",
        levy=LevySpec(sigma=1.0),
        potential=PotentialSpec("polynomial", (("degree_half", 1), ("scale", 0.5))),
        grid=Grid1D(half_width=12.0, points=2048),
        simulation=_check_ensemble(window=8.0),
        fractal=FractalSpec(h_grid=(0.1, 0.2, 0.3, 0.4, 0.5), eps_s=0.05),
        reference="D1",
    )


def logpert_poly() -> Scenario:
    return Scenario(
        name="logpert-poly",
        levy=LevySpec(density="logpert", params=(("a", 2.0),)),
        potential=PotentialSpec("polynomial", (("degree_half", 2), ("scale", 1.0))),
        grid=Grid1D(half_width=8.0, points=4096),
        simulation=_check_ensemble(),
        fractal=FractalSpec(h_grid=(0.1, 0.2, 0.3, 0.4, 0.5)),
    )


def well_stable15() -> Scenario:
    return Scenario(
        name="well-stable15",
        levy=LevySpec(density="stable", params=(("alpha", 1.5), ("scale", 1.0))),
        potential=PotentialSpec("square_well", (("depth", 4.0), ("half_width", 1.0))),
        grid=Grid1D(half_width=16.0, points=4096),
        simulation=_check_ensemble(window=12.0),
        fractal=FractalSpec(eps_s=0.01, h_grid=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 2.0 / 3.0)),
        exploratory=True,
    )


# Mapping from scenario name to its builder
SCENARIO_REGISTRY: Dict[str, Callable[[], Scenario]] = {
    "harmonic-brownian": harmonic_brownian,
    "stable08-poly": lambda: _stable_poly("stable08-poly", 0.8),
    "stable12-poly": lambda: _stable_poly("stable12-poly", 1.2),
    "stable15-poly": lambda: _stable_poly(
        "stable15-poly", 1.5, fractal=FractalSpec(h_grid=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 2.0 / 3.0))
    ),
    "stable15-bm-poly": lambda: _stable_poly("stable15-bm-poly", 1.5, sigma=1.0),
    "logpert-poly": logpert_poly,
    "well-stable15": well_stable15,
}

SUPPORTED_SCENARIOS: set[str] = set(SCENARIO_REGISTRY.keys())


def load_scenario(name: str) -> Scenario:
    """Factory that builds a registered scenario by name.

    Raises:
        ConfigurationError: Unknown name
    """
    key = name.strip().lower()
    if key not in SCENARIO_REGISTRY:
        raise ConfigurationError(f"Unknown scenario: {name} (known: {', '.join(sorted(SCENARIO_REGISTRY))})")
    return SCENARIO_REGISTRY[key]()


def list_scenarios() -> Dict[str, Scenario]:
    """The built-in registry, in name order."""
    return {name: SCENARIO_REGISTRY[name]() for name in sorted(SCENARIO_REGISTRY)}
