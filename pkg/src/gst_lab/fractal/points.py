import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from ..levy.model import LevyModel
from ..paths import PathRecord
from ..utils import save_csv

logger = logging.getLogger(__name__)

DELTA_MAX = 4.0


@dataclass(frozen=True)
class PointSystem:
    """
    Accepted jumps (t_n, r_n) with r_n = |z| in (0, 1], strictly ordered in time.

    Band j holds the jumps with 2^-j-1 <= r < 2^-j, i.e. j = ceil(-log2 r) - 1;
    a jump of size exactly 1 falls in no band (index -1).
    """

    times: np.ndarray
    sizes: np.ndarray
    horizon: float

    def __post_init__(self):
        if len(self.times) != len(self.sizes):
            raise ValueError("times and sizes must have the same length")
        if np.any((self.sizes <= 0) | (self.sizes > 1)):
            raise ValueError("jump sizes must lie in (0, 1]")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("jump times must be strictly increasing")

    @classmethod
    def from_path(cls, path: PathRecord) -> "PointSystem":
        """Accepted jumps with |z| <= 1 inside the analyzable part of the path."""
        jumps = path.accepted_jumps(max_size=1.0)
        return cls.from_arrays(jumps.s, np.abs(jumps.z), path.analyzable_horizon)

    @classmethod
    def from_arrays(cls, times, sizes, horizon: float) -> "PointSystem":
        """Sort, drop repeated times (first occurrence wins) and restrict to [0, horizon]."""
        times = np.asarray(times, dtype=float)
        sizes = np.asarray(sizes, dtype=float)
        keep = (times >= 0) & (times <= horizon) & (sizes > 0) & (sizes <= 1)
        times, sizes = times[keep], sizes[keep]
        order = np.argsort(times, kind="stable")
        times, sizes = times[order], sizes[order]
        if len(times):
            fresh = np.r_[True, np.diff(times) > 0]
            times, sizes = times[fresh], sizes[fresh]
        return cls(times=times, sizes=sizes, horizon=float(horizon))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def bands(self) -> np.ndarray:
        return (np.ceil(-np.log2(self.sizes)) - 1).astype(int)

    def band_times(self, j: int) -> np.ndarray:
        return self.times[self.bands == j]


def resolved_band_limit(eps_s: float) -> int:
    """Deepest band j whose whole range [2^-j-1, 2^-j) lies at or above the small-jump cutoff."""
    return max(int(math.floor(-math.log2(eps_s))) - 1, 0)


def nearest_distance(sorted_times: np.ndarray, sample_times: np.ndarray) -> np.ndarray:
    if sorted_times.size == 0:
        return np.full(sample_times.shape, np.inf)
    idx = np.searchsorted(sorted_times, sample_times)
    left = sorted_times[np.clip(idx - 1, 0, sorted_times.size - 1)]
    right = sorted_times[np.clip(idx, 0, sorted_times.size - 1)]
    return np.minimum(np.abs(sample_times - left), np.abs(right - sample_times))


def approximation_rates(
    ps: PointSystem,
    sample_times,
    beta: float,
    j_max: int,
    delta_max: float = DELTA_MAX,
) -> np.ndarray:
    """
    Approximation rate estimate for every sample time; NaN where undefined.

    Uses the top half of the bands 1..j_max: per band, d_j is the distance to the
    nearest band-j jump and the band value is log2(1/d_j) / (beta j); bands with
    d_j > 1 are ignored and d_j = 0 gives delta_max. The maximum over bands is
    clipped to [1, delta_max].
    """
    sample_times = np.atleast_1d(np.asarray(sample_times, dtype=float))
    if beta <= 0 or j_max < 1:
        return np.full(sample_times.shape, np.nan)
    lowest = max(1, math.ceil((j_max + 1) / 2))
    bands = ps.bands
    best = np.full(sample_times.shape, -np.inf)
    for j in range(lowest, j_max + 1):
        d = nearest_distance(ps.times[bands == j], sample_times)
        with np.errstate(divide="ignore"):
            value = np.where(d > 0, np.log2(1.0 / np.where(d > 0, d, 1.0)) / (beta * j), delta_max)
        value = np.where(d <= 1.0, value, -np.inf)
        best = np.maximum(best, value)
    return np.where(np.isfinite(best), np.clip(best, 1.0, delta_max), np.nan)


def approximation_rate(
    ps: PointSystem, t: float, beta: float, j_max: int, delta_max: float = DELTA_MAX
) -> Optional[float]:
    """Single-time form of approximation_rates; None when no resolved band has a jump within distance 1."""
    value = approximation_rates(ps, [t], beta, j_max, delta_max)[0]
    return None if np.isnan(value) else float(value)


def interval_union_measure(starts: np.ndarray, ends: np.ndarray, lower: float, upper: float) -> float:
    """Lebesgue measure of a union of intervals, clipped to [lower, upper]."""
    starts = np.clip(starts, lower, upper)
    ends = np.clip(ends, lower, upper)
    if starts.size == 0:
        return 0.0
    order = np.argsort(starts, kind="stable")
    starts, ends = starts[order], ends[order]
    reach = np.maximum.accumulate(ends)
    previous = np.r_[lower, reach[:-1]]
    return float(np.sum(np.clip(ends - np.maximum(starts, previous), 0.0, None)))


@dataclass(frozen=True)
class CoveringTable:
    """|A(eps, delta) intersected with [0, T]| / T for a grid of eps."""

    delta: float
    epsilons: np.ndarray
    fractions: np.ndarray

    def rows(self) -> np.ndarray:
        return np.column_stack([self.epsilons, np.full(len(self.epsilons), self.delta), self.fractions])

    def to_csv(self, path: str, header_lines=()):
        save_csv(path, ["epsilon", "delta", "measure_fraction"], self.rows(), header_lines)


def covering_measure(ps: PointSystem, delta: float, beta: float, epsilons: Sequence[float]) -> CoveringTable:
    """
    Exact measure fraction of A(eps, delta) = union over r_n <= eps of (t_n - r_n^(beta delta), t_n + r_n^(beta delta)).

    The sets grow with eps, so fractions are non-decreasing in eps and non-increasing in delta.
    """
    if ps.horizon <= 0:
        raise ValueError("point system has an empty horizon")
    epsilons = np.sort(np.asarray(epsilons, dtype=float))
    radii = ps.sizes ** (beta * delta)
    fractions = np.empty(len(epsilons))
    for k, eps in enumerate(epsilons):
        small = ps.sizes <= eps
        centers, reach = ps.times[small], radii[small]
        fractions[k] = interval_union_measure(centers - reach, centers + reach, 0.0, ps.horizon) / ps.horizon
    return CoveringTable(delta=float(delta), epsilons=epsilons, fractions=fractions)


@dataclass(frozen=True)
class DyadicCounts:
    """
    Accepted jumps per band and unit time, with the thinned-Poisson band of every j.

    `lower` and `upper` are c C_j - 3 sqrt(C_j / c) and C_j / c + 3 sqrt(C_j / c).
    """

    bands: np.ndarray
    counts: np.ndarray
    masses: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    growth: float
    beta: float

    @property
    def inside(self) -> np.ndarray:
        return (self.counts >= self.lower) & (self.counts <= self.upper)

    @property
    def growth_ok(self) -> bool:
        return bool(np.isfinite(self.growth) and self.growth <= self.beta + 0.2)

    def to_dict(self) -> Dict:
        return {
            "bands": self.bands.tolist(),
            "counts": self.counts.tolist(),
            "C_j": self.masses.tolist(),
            "growth": self.growth,
            "all_inside": bool(np.all(self.inside)),
        }

    def to_csv(self, path: str, header_lines=()):
        rows = np.column_stack([self.bands, self.counts, self.masses, self.lower, self.upper])
        save_csv(path, ["j", "N_j", "C_j", "lower", "upper"], rows, header_lines)


def dyadic_jump_counts(
    systems: Sequence[PointSystem], model: LevyModel, envelope: float, j_max: int
) -> DyadicCounts:
    """
    Mean accepted-jump count per band over unit windows, pooled over point systems.

    The growth exponent is the least-squares slope of log2 N_j against j over bands
    1..j_max with N_j > 0; a zero density gives all-zero counts and growth 0.
    """
    bands = np.arange(j_max + 1)
    total_time = float(sum(ps.horizon for ps in systems))
    counts = np.zeros(j_max + 1)
    for ps in systems:
        seen = ps.bands
        counts += np.bincount(np.minimum(seen[seen >= 0], j_max + 1), minlength=j_max + 2)[: j_max + 1]
    counts = counts / total_time if total_time > 0 else counts
    masses = model.band_mass_table(j_max).masses
    spread = 3.0 * np.sqrt(masses / envelope)
    lower, upper = envelope * masses - spread, masses / envelope + spread
    fit = (bands >= 1) & (counts > 0)
    if not model.has_jumps:
        growth = 0.0
    elif np.count_nonzero(fit) >= 2:
        growth = float(stats.linregress(bands[fit], np.log2(counts[fit])).slope)
    else:
        growth = float("nan")
    beta = model.bg_index() if model.has_jumps else 0.0
    return DyadicCounts(bands, counts, masses, lower, upper, growth, beta)


def point_systems(paths: Sequence[PathRecord]) -> List[PointSystem]:
    return [PointSystem.from_path(path) for path in paths]
