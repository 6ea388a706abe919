import logging
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate, stats

from ..errors import ConfigurationError
from ..gst.generator import GstModel
from ..levy.sampler import BandSampler
from ..levy.tools import panel_nodes
from ..paths import PathRecord
from ..spectral.ground_state import GroundState, stationary_cdf
from ..utils import GST_PATH_STREAM, THINNING_STREAM, as_generator, ensemble_moments
from .config import SimConfig
from .simulator import EXIT_WARNING_FRACTION, accept_proposals, exit_fraction, simulate_ensemble

logger = logging.getLogger(__name__)

QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)


def sample_stationary_init(gs: GroundState, seed=0, size: Optional[int] = None):
    """
    Draw from the grid law phi0^2 h by inverse-CDF sampling.

    Args:
        gs (GroundState): Ground state whose square is the stationary density
        seed: Master seed or a ready np.random.Generator
        size (int): Number of draws; None returns a float

    Returns:
        float or np.ndarray: Samples
    """
    edges, cumulative = stationary_cdf(gs)
    rng = as_generator(seed, GST_PATH_STREAM, 0, 2)
    u = rng.uniform(size=size)
    draws = np.interp(u, cumulative, edges)
    return float(draws) if size is None else draws


def stationary_law_cdf(gs: GroundState) -> Callable:
    edges, cumulative = stationary_cdf(gs)
    return lambda y: np.interp(y, edges, cumulative)


def _surviving_states(paths: Sequence[PathRecord], t: float):
    """States at time t of paths that have not exited by t, and the fraction that did."""
    values, exited = [], 0
    for path in paths:
        if path.exited and path.exit_time <= t:
            exited += 1
            continue
        values.append(path.state_at(t))
    fraction = exited / len(paths) if paths else 0.0
    return np.array(values), fraction


def _ensemble_for(gst: GstModel, cfg: SimConfig, t: float, paths, threads: int):
    if paths is not None:
        return paths
    if t > cfg.horizon:
        cfg = cfg.with_(horizon=t)
    return simulate_ensemble(gst, cfg.with_(record_jumps=False), threads=threads)


@dataclass(frozen=True)
class MartingaleResult:
    """Ensemble test of E[f(M_t) - f(M_0) - int_0^t Lf(M_r) dr] = 0."""

    function: str
    time: float
    z_score: float
    mean: float
    standard_error: float
    n_paths: int
    exit_fraction: float

    @property
    def reliable(self) -> bool:
        return self.exit_fraction <= EXIT_WARNING_FRACTION

    def to_dict(self) -> Dict:
        return {**asdict(self), "reliable": self.reliable}


def martingale_functional(gst: GstModel, values: np.ndarray, path: PathRecord, t: float) -> float:
    """X^f_t along one path; `values` is the pair (f on the nodes, generator field on the nodes)."""
    f_nodes, generator = values
    nodes = gst.grid.nodes
    end = int(np.searchsorted(path.times, t + 0.5 * path.dt, side="right")) if path.dt > 0 else 1
    states = path.states[:end]
    along = np.interp(states, nodes, generator)
    integral = float(integrate.trapezoid(along, path.times[:end])) if end > 1 else 0.0
    f_end, f_start = np.interp([states[-1], states[0]], nodes, f_nodes)
    return float(f_end - f_start - integral)


def martingale_check(
    gst: GstModel,
    cfg: SimConfig,
    f: Callable,
    t: float,
    paths: Optional[List[PathRecord]] = None,
    name: Optional[str] = None,
    threads: int = 1,
) -> MartingaleResult:
    """
    z-score of the martingale functional X^f_t over an ensemble.

    The generator term is the GST generator evaluated on the grid and interpolated
    along each path, integrated with the trapezoid rule. Paths that exit before t
    are excluded; the result is flagged unreliable when more than 20% do.
    """
    name = name or getattr(f, "name", getattr(f, "__name__", "f"))
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if t == 0:
        return MartingaleResult(name, 0.0, 0.0, 0.0, 0.0, 0, 0.0)
    paths = _ensemble_for(gst, cfg, t, paths, threads)
    f_nodes = np.asarray(f(gst.grid.nodes), dtype=float)
    values = (f_nodes, gst.generator_field(f_nodes))
    # NaN marks a path that exited before t
    samples = np.full(len(paths), np.nan)
    for k, path in enumerate(paths):
        if not (path.exited and path.exit_time <= t):
            samples[k] = martingale_functional(gst, values, path, t)
    fraction = float(np.mean(np.isnan(samples))) if paths else 0.0
    moments = ensemble_moments(samples)
    se = moments.standard_error
    z_score = moments.mean / se if se > 0 else 0.0
    result = MartingaleResult(name, float(t), float(z_score), moments.mean, se, moments.count, fraction)
    if not result.reliable:
        logger.warning("martingale check %s at t=%g: %.1f%% of paths exited", name, t, 100 * fraction)
    return result


@dataclass(frozen=True)
class StationarityResult:
    time: float
    ks_statistic: float
    p_value: float
    n_paths: int
    exit_fraction: float

    @property
    def reliable(self) -> bool:
        return self.exit_fraction <= EXIT_WARNING_FRACTION

    def to_dict(self) -> Dict:
        return {**asdict(self), "reliable": self.reliable}


def stationarity_check(
    gst: GstModel, cfg: SimConfig, t: float, paths: Optional[List[PathRecord]] = None, threads: int = 1
) -> StationarityResult:
    """Two-sided KS distance between the empirical law of M_t and the grid law phi0^2 h."""
    if cfg.initial_law != "stationary":
        raise ConfigurationError("stationarity_check needs initial_law = 'stationary'")
    paths = _ensemble_for(gst, cfg, t, paths, threads)
    samples, fraction = _surviving_states(paths, t)
    if samples.size == 0:
        return StationarityResult(float(t), 1.0, 0.0, 0, fraction)
    result = stats.kstest(samples, stationary_law_cdf(gst.gs))
    return StationarityResult(float(t), float(result.statistic), float(result.pvalue), int(samples.size), fraction)


@dataclass(frozen=True)
class ThinningResult:
    band: int
    x_bar: float
    chi_square: float
    p_value: float
    accepted: int
    proposals: int

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else 0.0


def thinning_law_check(
    gst: GstModel,
    x_bar: float = 0.0,
    band: int = 0,
    window: Optional[float] = None,
    eps_s: Optional[float] = None,
    n_proposals: int = 100_000,
    bins: int = 20,
    seed=0,
) -> ThinningResult:
    """
    Chi-square test that thinned proposals at a frozen state follow ratio(x_bar, z) nu(z).

    Proposals of one dyadic band are drawn with the simulator's sampler and envelope
    and accepted by the simulator's rule; the expected bin weights are Gauss-Legendre
    integrals of ratio * nu over signed bins of the band.
    """
    eps_s = gst.eps_s if eps_s is None else eps_s
    window = gst.domain_radius if window is None else window
    sampler = BandSampler.build(gst.levy, eps_s)
    if not 0 <= band < sampler.band_count:
        raise ValueError(f"band must lie in [0, {sampler.band_count}), got {band}")
    if bins % 2:
        raise ValueError(f"bins must be even (half per sign), got {bins}")
    lo, hi = float(sampler.edges[band + 1]), float(sampler.edges[band])
    envelope = gst.local_ratio_bound(window, z_max=hi)
    rng = as_generator(seed, THINNING_STREAM, band)
    z = sampler.sample_band(rng, band, n_proposals)
    v = rng.uniform(size=n_proposals) / envelope
    accepted = accept_proposals(v, gst.ratio(np.full(n_proposals, x_bar), z))

    positive = np.linspace(lo, hi, bins // 2 + 1)
    bin_edges = np.concatenate([-positive[::-1], positive])
    observed, _ = np.histogram(z[accepted], bins=bin_edges)
    keep = np.r_[np.ones(bins // 2, dtype=bool), False, np.ones(bins // 2, dtype=bool)]
    observed = observed[keep]
    lower, upper = bin_edges[:-1][keep], bin_edges[1:][keep]
    nodes, weights = panel_nodes(lower, upper)
    kernel = gst.ratio(np.full_like(nodes, x_bar), nodes) * gst.levy.density._radial(np.abs(nodes))
    mass = np.sum(weights * kernel, axis=-1)
    expected = observed.sum() * mass / mass.sum()
    chi2, p_value = stats.chisquare(observed, expected)
    return ThinningResult(band, float(x_bar), float(chi2), float(p_value), int(accepted.sum()), n_proposals)


def acceptance_reproducible(path: PathRecord, gst: Optional[GstModel] = None) -> bool:
    """Re-evaluate v <= ratio(pre_state, z) for every recorded proposal."""
    jumps = path.jumps
    if len(jumps) == 0:
        return True
    ratio = np.ones(len(jumps)) if gst is None else gst.ratio(jumps.pre_state, jumps.z)
    return bool(np.array_equal(accept_proposals(jumps.v, ratio), jumps.accepted))


def terminal_quantiles(paths: Sequence[PathRecord], probs: Sequence[float] = QUANTILES) -> np.ndarray:
    """Quantiles of M_T over paths that did not exit."""
    finals = np.array([p.states[-1] for p in paths if not p.exited])
    if finals.size == 0:
        return np.full(len(probs), np.nan)
    return np.quantile(finals, probs)


def quantile_standard_errors(samples: np.ndarray, probs: Sequence[float] = QUANTILES) -> np.ndarray:
    """Asymptotic standard errors sqrt(p(1-p)/n) / f(q_p) with a Gaussian-kernel density estimate."""
    samples = np.asarray(samples, dtype=float)
    q = np.quantile(samples, probs)
    density = stats.gaussian_kde(samples)(q)
    p = np.asarray(probs)
    return np.sqrt(p * (1.0 - p) / samples.size) / density


def lag_autocorrelation(paths: Sequence[PathRecord], lag_steps: int = 1) -> float:
    """Pooled correlation of (M_t, M_{t + lag}) over all grid times of all non-exited paths."""
    left, right = [], []
    for path in paths:
        if path.exited or len(path.states) <= lag_steps:
            continue
        left.append(path.states[:-lag_steps])
        right.append(path.states[lag_steps:])
    if not left:
        return float("nan")
    return float(np.corrcoef(np.concatenate(left), np.concatenate(right))[0, 1])


def exit_fractions(gst: GstModel, cfg: SimConfig, windows: Sequence[float], threads: int = 1) -> Dict[float, float]:
    """Exit fraction per window bound K, same seeds for every K."""
    return {
        float(k): exit_fraction(simulate_ensemble(gst, cfg.with_(window=k, record_jumps=False), threads=threads))
        for k in windows
    }


def ensemble_summary(paths: Sequence[PathRecord]) -> Dict:
    """Moments of M_T, exit fraction and mean per-band accepted counts."""
    finals = ensemble_moments([np.nan if p.exited else p.states[-1] for p in paths])
    counts = [p.band_counts for p in paths if len(p.band_counts)]
    return {
        "n_paths": len(paths),
        "exit_fraction": exit_fraction(paths),
        "terminal_mean": finals.mean,
        "terminal_stdev": finals.stdev,
        "terminal_standard_error": finals.standard_error,
        "mean_band_counts": np.mean(counts, axis=0).tolist() if counts else [],
    }
