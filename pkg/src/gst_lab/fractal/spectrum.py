import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
from scipy import optimize, stats

from ..paths import PathRecord
from ..utils import SAMPLE_TIME_STREAM, derive_rng, dyadic_scales, save_csv
from .holder import collision_mask, scale_window
from .points import DELTA_MAX, PointSystem, approximation_rates, resolved_band_limit

logger = logging.getLogger(__name__)

MIN_BIN_COUNT = 50


@dataclass(frozen=True)
class BoxDimension:
    dimension: float
    r_squared: float
    scales: np.ndarray
    counts: np.ndarray


def box_counts(times: np.ndarray, scales: Sequence[float]) -> np.ndarray:
    """Number of boxes [k rho, (k + 1) rho) holding at least one time, per scale."""
    times = np.asarray(times, dtype=float)
    return np.array([np.unique(np.floor(times / rho)).size if times.size else 0 for rho in scales], dtype=float)


def _slope(scales: np.ndarray, counts: np.ndarray):
    keep = counts > 0
    if np.count_nonzero(keep) < 2:
        return float("nan"), float("nan")
    fit = stats.linregress(np.log(1.0 / scales[keep]), np.log(counts[keep]))
    return float(np.clip(fit.slope, 0.0, 1.0)), float(fit.rvalue**2)


def box_dimension(times, horizon: float, scales: Sequence[float]) -> BoxDimension:
    """
    Box-counting dimension of a set of times in [0, horizon].

    Slope of log N(rho) against log(1 / rho), clamped to [0, 1].
    """
    times = np.asarray(times, dtype=float)
    times = times[(times >= 0) & (times <= horizon)]
    scales = np.asarray(scales, dtype=float)
    counts = box_counts(times, scales)
    dimension, r_squared = _slope(scales, counts)
    return BoxDimension(dimension, r_squared, scales, counts)


def reference_spectrum(h, beta: float, sigma: float) -> np.ndarray:
    """
    Spectrum of the underlying Levy process: beta h on [0, 1/beta] for pure jumps;
    with a Brownian part beta h below 1/2 and 1 at h = 1/2. -inf elsewhere.
    """
    h = np.asarray(h, dtype=float)
    out = np.full(h.shape, -np.inf)
    if sigma == 0:
        inside = (h >= 0) & (h <= 1.0 / beta + 1e-12)
        out[inside] = beta * h[inside]
        return out
    below = (h >= 0) & (h < 0.5) & ~np.isclose(h, 0.5)
    out[below] = beta * h[below]
    out[np.isclose(h, 0.5)] = 1.0
    return out


def _bin_edges(h_grid: np.ndarray) -> np.ndarray:
    if h_grid.size == 1:
        return np.array([h_grid[0] - 0.05, h_grid[0] + 0.05])
    middle = 0.5 * (h_grid[1:] + h_grid[:-1])
    first = h_grid[0] - (middle[0] - h_grid[0])
    last = h_grid[-1] + (h_grid[-1] - middle[-1])
    return np.concatenate([[first], middle, [last]])


@dataclass(frozen=True)
class SpectrumEstimate:
    """
    Box-counting estimate of D(h) on an h-grid.

    `d_hat` is NaN for bins with fewer than `min_count` sample times; `reference` is
    -inf where the reference spectrum is not defined.
    """

    label: str
    h_grid: np.ndarray
    d_hat: np.ndarray
    counts: np.ndarray
    reference: np.ndarray
    scales: np.ndarray
    min_count: int = MIN_BIN_COUNT

    def value_at(self, h: float) -> float:
        return float(self.d_hat[int(np.argmin(np.abs(self.h_grid - h)))])

    def to_csv(self, path: str, header_lines=()):
        rows = np.column_stack([self.h_grid, self.d_hat, self.counts, self.reference])
        save_csv(path, ["h", "D_hat", "count", "reference_D"], rows, header_lines)

    def to_dict(self) -> Dict:
        def finite(values):
            return [float(v) if np.isfinite(v) else None for v in values]

        return {
            "label": self.label,
            "h": self.h_grid.tolist(),
            "D_hat": finite(self.d_hat),
            "count": self.counts.astype(int).tolist(),
            "reference_D": finite(self.reference),
        }


def pointwise_exponents(deltas: np.ndarray, beta: float, sigma: float) -> np.ndarray:
    """
    h = 1 / (delta beta) per sample time, capped at 1/2 when sigma != 0.

    With a Brownian part an undefined rate (no resolved jump nearby) still gives
    h = 1/2; for pure jumps it stays NaN.
    """
    deltas = np.asarray(deltas, dtype=float)
    if beta <= 0:
        return np.full(deltas.shape, 0.5 if sigma != 0 else np.nan)
    h = 1.0 / (deltas * beta)
    if sigma != 0:
        h = np.where(np.isfinite(h), np.minimum(h, 0.5), 0.5)
    return h


def stratified_times(rng: np.random.Generator, horizon: float, spacing: float) -> np.ndarray:
    """One uniform time in each cell [k spacing, (k + 1) spacing) inside [0, horizon)."""
    cells = int(math.floor(horizon / spacing))
    return (np.arange(cells) + rng.uniform(size=cells)) * spacing


def spectrum_estimate(
    paths: Sequence[PathRecord],
    beta: float,
    sigma: float,
    h_grid: Sequence[float],
    eps_s: float,
    delta_max: float = DELTA_MAX,
    min_count: int = MIN_BIN_COUNT,
    seed: int = 0,
    label: str = "gst",
) -> SpectrumEstimate:
    """
    Multifractal spectrum estimate from an ensemble with full jump marks.

    Sample times are stratified uniformly with spacing half the smallest resolved
    scale; times within dt/2 of an accepted jump are dropped. Each time gets
    h = 1 / (delta_hat beta) (capped at 1/2 when sigma != 0) and falls in the
    nearest h-grid bin. Per bin, box counts are averaged over paths and D is
    the slope of log N(rho) against log(1 / rho) on the resolved dyadic scales.
    """
    h_grid = np.asarray(sorted(h_grid), dtype=float)
    edges = _bin_edges(h_grid)
    reference = reference_spectrum(h_grid, beta, sigma)
    counts = np.zeros(len(h_grid))
    if not paths:
        return SpectrumEstimate(label, h_grid, np.full(len(h_grid), np.nan), counts, reference, np.empty(0), min_count)

    horizon = max(path.horizon for path in paths)
    dt = paths[0].dt
    scales = dyadic_scales(*scale_window(eps_s, beta, dt, horizon))
    if scales.size < 2:
        logger.warning("spectrum %s: fewer than two resolved scales, estimate undefined", label)
        return SpectrumEstimate(label, h_grid, np.full(len(h_grid), np.nan), counts, reference, scales, min_count)
    j_max = resolved_band_limit(eps_s)
    spacing = 0.5 * float(scales.min())
    boxes = np.zeros((len(h_grid), len(scales)))

    for index, path in enumerate(paths):
        ps = PointSystem.from_path(path)
        sample_times = stratified_times(derive_rng(seed, SAMPLE_TIME_STREAM, index), path.analyzable_horizon, spacing)
        sample_times = sample_times[~collision_mask(ps, sample_times, path.dt)]
        deltas = approximation_rates(ps, sample_times, beta, j_max, delta_max)
        h = pointwise_exponents(deltas, beta, sigma)
        defined = np.isfinite(h)
        sample_times, h = sample_times[defined], h[defined]
        which = np.searchsorted(edges, h, side="right") - 1
        # the outer top edge belongs to the last bin
        which[np.isclose(h, edges[-1])] = len(h_grid) - 1
        for b in range(len(h_grid)):
            members = sample_times[which == b]
            counts[b] += members.size
            boxes[b] += box_counts(members, scales)

    boxes /= len(paths)
    d_hat = np.full(len(h_grid), np.nan)
    for b in range(len(h_grid)):
        if counts[b] >= min_count:
            d_hat[b] = _slope(scales, boxes[b])[0]
    logger.info("spectrum %s: %d sample times binned over %d scales", label, int(counts.sum()), len(scales))
    return SpectrumEstimate(label, h_grid, d_hat, counts, reference, scales, min_count)


def jaffard_baseline(
    levy_paths: Sequence[PathRecord],
    beta: float,
    sigma: float,
    h_grid: Sequence[float],
    eps_s: float,
    **options,
) -> SpectrumEstimate:
    """The spectrum pipeline applied to Levy paths (ratio = 1), the calibration run for GST ensembles."""
    return spectrum_estimate(levy_paths, beta, sigma, h_grid, eps_s, label="jaffard", **options)


def monotone_residual(estimate: SpectrumEstimate, beta: float) -> float:
    """Largest deviation of D_hat from its non-decreasing fit on the defined bins with h <= 1/beta."""
    keep = np.isfinite(estimate.d_hat) & (estimate.h_grid <= 1.0 / beta + 1e-12)
    values = estimate.d_hat[keep]
    if values.size < 2:
        return 0.0
    fit = optimize.isotonic_regression(values, increasing=True)
    return float(np.max(np.abs(values - fit.x)))
