import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..levy.model import LevyModel
from ..levy.sampler import BandSampler, levy_increments
from ..utils import FEYNMAN_KAC_STREAM, KATO_STREAM, as_generator, save_csv
from .grid import Potential

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KatoTable:
    """sup_x E^x int_0^t |V(X_s)| ds over a coarse x-grid, one row per t."""

    times: np.ndarray
    sup_estimates: np.ndarray
    argmax_points: np.ndarray

    def ratio(self, small: float, large: float) -> float:
        """Estimate at t = small divided by the estimate at t = large."""
        a = self.sup_estimates[np.argmin(np.abs(self.times - small))]
        b = self.sup_estimates[np.argmin(np.abs(self.times - large))]
        return float(a / b) if b > 0 else 0.0

    def to_csv(self, path: str, header_lines=()):
        rows = np.column_stack([self.times, self.sup_estimates, self.argmax_points])
        save_csv(path, ["t", "sup_estimate", "argmax_x"], rows, header_lines)


def _running_integrals(values: np.ndarray, step: float) -> np.ndarray:
    """Trapezoid integrals int_0^{t_k} along axis 1, including t_0 = 0."""
    pieces = 0.5 * step * (values[:, 1:] + values[:, :-1])
    return np.concatenate([np.zeros((len(values), 1)), np.cumsum(pieces, axis=1)], axis=1)


def kato_diagnostic(
    model: LevyModel,
    potential: Potential,
    times: Sequence[float] = (0.01, 0.1),
    starts: Sequence[float] = tuple(np.linspace(-2.0, 2.0, 9)),
    n_paths: int = 400,
    steps_per_unit: int = 10,
    eps_s: float = 0.05,
    seed=0,
) -> KatoTable:
    """
    Monte Carlo estimate of sup_x E^x int_0^t |V(X_s)| ds.

    All t share the same paths per start point, so each estimate is pathwise
    non-decreasing in t. The step is the smallest t divided by steps_per_unit.
    """
    times = np.sort(np.asarray(times, dtype=float))
    step = times[0] / steps_per_unit
    n_steps = int(np.ceil(times[-1] / step))
    sampler = BandSampler.build(model, eps_s)
    estimates = np.zeros((len(starts), len(times)))
    for ix, x0 in enumerate(starts):
        rng = as_generator(seed, KATO_STREAM, ix)
        paths = x0 + np.concatenate(
            [np.zeros((n_paths, 1)), np.cumsum(levy_increments(model, sampler, rng, n_paths, n_steps, step), axis=1)],
            axis=1,
        )
        running = _running_integrals(np.abs(potential(paths)), step)
        columns = np.minimum(np.round(times / step).astype(int), n_steps)
        estimates[ix] = running[:, columns].mean(axis=0)
    best = np.argmax(estimates, axis=0)
    starts = np.asarray(starts, dtype=float)
    table = KatoTable(times=times, sup_estimates=estimates.max(axis=0), argmax_points=starts[best])
    logger.debug("kato diagnostic: %s", dict(zip(times.tolist(), table.sup_estimates.tolist())))
    return table


@dataclass(frozen=True)
class FeynmanKacDecay:
    """T_t 1(x) = E^x exp(-int_0^t V(X_s) ds) and the decay rate -log(T_t 1) / t."""

    times: np.ndarray
    semigroup: np.ndarray
    standard_errors: np.ndarray
    start: float

    @property
    def decay_rates(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return -np.log(self.semigroup) / self.times


def feynman_kac_decay(
    model: LevyModel,
    potential: Potential,
    times: Sequence[float] = (1.0, 2.0, 4.0),
    start: float = 0.0,
    n_paths: int = 4000,
    dt: float = 0.01,
    eps_s: float = 0.05,
    seed=0,
) -> FeynmanKacDecay:
    """
    Monte Carlo Feynman-Kac semigroup of H = -L + V applied to 1.

    For large t, T_t 1(x) ~ exp(-lambda0 t) phi0(x) int phi0, so the decay rate tends to lambda0.
    """
    times = np.sort(np.asarray(times, dtype=float))
    n_steps = int(np.ceil(times[-1] / dt))
    sampler = BandSampler.build(model, eps_s)
    rng = as_generator(seed, FEYNMAN_KAC_STREAM, 0)
    paths = start + np.concatenate(
        [np.zeros((n_paths, 1)), np.cumsum(levy_increments(model, sampler, rng, n_paths, n_steps, dt), axis=1)], axis=1
    )
    weights = np.exp(-_running_integrals(potential(paths), dt))
    columns = np.minimum(np.round(times / dt).astype(int), n_steps)
    samples = weights[:, columns]
    return FeynmanKacDecay(
        times=times,
        semigroup=samples.mean(axis=0),
        standard_errors=samples.std(axis=0, ddof=1) / np.sqrt(n_paths),
        start=float(start),
    )
