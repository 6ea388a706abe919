from .checks import (
    MartingaleResult,
    StationarityResult,
    ThinningResult,
    acceptance_reproducible,
    ensemble_summary,
    exit_fractions,
    lag_autocorrelation,
    martingale_check,
    quantile_standard_errors,
    sample_stationary_init,
    stationarity_check,
    terminal_quantiles,
    thinning_law_check,
)
from .config import INITIAL_LAWS, SimConfig
from .simulator import EnsembleSimulator, accept_proposals, exit_fraction, simulate_ensemble, simulate_path

__all__ = [
    "EnsembleSimulator",
    "INITIAL_LAWS",
    "MartingaleResult",
    "SimConfig",
    "StationarityResult",
    "ThinningResult",
    "accept_proposals",
    "acceptance_reproducible",
    "ensemble_summary",
    "exit_fraction",
    "exit_fractions",
    "lag_autocorrelation",
    "martingale_check",
    "quantile_standard_errors",
    "sample_stationary_init",
    "simulate_ensemble",
    "simulate_path",
    "stationarity_check",
    "terminal_quantiles",
    "thinning_law_check",
]
