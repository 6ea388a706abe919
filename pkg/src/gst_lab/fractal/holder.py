import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..paths import PathRecord
from ..utils import dyadic_scales, save_csv
from .points import PointSystem, approximation_rates, nearest_distance

logger = logging.getLogger(__name__)

MIN_SCALES = 4
HOLDER_CLAMP = (0.0, 1.0)


def scale_window(eps_s: float, beta: float, dt: float, horizon: float) -> Tuple[float, float]:
    """Resolved regression scales [max(eps_s^beta, 4 dt), T / 100]."""
    lower = max(eps_s**beta if beta > 0 else 0.0, 4.0 * dt)
    return lower, horizon / 100.0


@dataclass(frozen=True)
class HolderEstimate:
    """Oscillation-regression exponent at one time, None when fewer than 4 scales were usable."""

    t: float
    exponent: Optional[float]
    r_squared: float
    scales: np.ndarray
    delta_hat: Optional[float] = None
    theoretical: Optional[float] = None

    @property
    def defined(self) -> bool:
        return self.exponent is not None


def oscillations(path: PathRecord, t: float, radii: Sequence[float]) -> np.ndarray:
    """sup_{|s - t| <= rho} |M_s - M_t| from the grid samples (jumps are part of the samples)."""
    times, states = path.times, path.states
    center = path.state_at(t)
    out = np.empty(len(radii))
    for k, rho in enumerate(radii):
        lo = np.searchsorted(times, t - rho, side="left")
        hi = np.searchsorted(times, t + rho, side="right")
        window = states[lo:hi]
        out[k] = float(np.max(np.abs(window - center))) if window.size else 0.0
    return out


def holder_empirical(path: PathRecord, t: float, scale_range: Tuple[float, float]) -> HolderEstimate:
    """
    Slope of log osc(rho) against log rho over the dyadic radii of scale_range.

    Radii that reach outside the analyzable part of the path or give a zero
    oscillation are dropped; the slope is clamped to [0, 1].
    """
    lower, upper = scale_range
    radii = dyadic_scales(lower, upper)
    room = min(t, path.analyzable_horizon - t)
    radii = radii[radii <= room]
    osc = oscillations(path, t, radii)
    usable = osc > 0
    radii, osc = radii[usable], osc[usable]
    if radii.size < MIN_SCALES:
        return HolderEstimate(float(t), None, float("nan"), radii)
    fit = stats.linregress(np.log(radii), np.log(osc))
    exponent = float(np.clip(fit.slope, *HOLDER_CLAMP))
    return HolderEstimate(float(t), exponent, float(fit.rvalue**2), radii)


def holder_theoretical(delta: float, beta: float, sigma: float) -> float:
    """1 / (delta beta), capped at 1/2 when a Brownian part is present."""
    h = 1.0 / (delta * beta)
    return min(h, 0.5) if sigma != 0 else h


def holder_upper_bound(ps: PointSystem, t: float, j_range: Tuple[int, int]) -> float:
    """
    min over bands j in j_range of log r_n / log |t - t_n| for the nearest band-j jump.

    Only jumps with 0 < |t - t_n| < 1 contribute; returns inf when none does.
    """
    bands = ps.bands
    bound = np.inf
    for j in range(j_range[0], j_range[1] + 1):
        mask = bands == j
        if not np.any(mask):
            continue
        times, sizes = ps.times[mask], ps.sizes[mask]
        idx = np.searchsorted(times, t)
        for n in (idx - 1, idx):
            if 0 <= n < times.size:
                d = abs(t - times[n])
                if 0 < d < 1:
                    bound = min(bound, float(np.log(sizes[n]) / np.log(d)))
    return float(bound)


@dataclass(frozen=True)
class ProbeTable:
    """Holder estimates of one path: t, H_hat, delta_hat, R2."""

    estimates: Tuple[HolderEstimate, ...]

    @property
    def exponents(self) -> np.ndarray:
        return np.array([e.exponent for e in self.estimates if e.defined], dtype=float)

    def median(self) -> float:
        values = self.exponents
        return float(np.median(values)) if values.size else float("nan")

    def to_csv(self, path: str, header_lines=()):
        rows = np.array(
            [
                [
                    e.t,
                    np.nan if e.exponent is None else e.exponent,
                    np.nan if e.delta_hat is None else e.delta_hat,
                    e.r_squared,
                ]
                for e in self.estimates
            ]
        )
        save_csv(path, ["t", "H_hat", "delta_hat", "R2"], rows.reshape(-1, 4), header_lines)


def holder_probes(
    path: PathRecord,
    ps: PointSystem,
    sample_times: Sequence[float],
    scale_range: Tuple[float, float],
    beta: float,
    sigma: float,
    j_max: int,
) -> ProbeTable:
    """Empirical and theoretical exponents at the given sample times of one path."""
    deltas = approximation_rates(ps, sample_times, beta, j_max)
    estimates = []
    for t, delta in zip(sample_times, deltas):
        estimate = holder_empirical(path, t, scale_range)
        defined = bool(np.isfinite(delta))
        estimates.append(
            HolderEstimate(
                t=estimate.t,
                exponent=estimate.exponent,
                r_squared=estimate.r_squared,
                scales=estimate.scales,
                delta_hat=float(delta) if defined else None,
                theoretical=holder_theoretical(delta, beta, sigma) if defined else None,
            )
        )
    return ProbeTable(tuple(estimates))


def collision_mask(ps: PointSystem, sample_times: np.ndarray, dt: float) -> np.ndarray:
    """True for sample times within dt / 2 of a recorded jump."""
    return nearest_distance(ps.times, np.asarray(sample_times, dtype=float)) <= 0.5 * dt
