import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from ..paths import JumpTable, PathRecord
from ..utils import LEVY_PATH_STREAM, as_generator
from .model import LevyModel
from .tools import dyadic_edges, integrate_panels

logger = logging.getLogger(__name__)

# Nodes of the per-band inverse-CDF tables.
TABLE_NODES = 257
# Band index used for jumps with |z| > 1.
BIG_BAND = -1


@dataclass(frozen=True)
class BandSampler:
    """
    Jump-size sampler for nu restricted to eps_s < |z|, split into dyadic bands.

    Band b covers (edges[b+1], edges[b]] with edges[0] = 1 and carries the dyadic
    index j = b, so band b is the j-th band of the band-mass table (the last band
    may be cut at eps_s). Jumps with |z| > 1 form one extra band.
    """

    edges: np.ndarray
    masses: np.ndarray
    big_mass: float
    nodes: np.ndarray
    cdfs: np.ndarray
    model: LevyModel

    @classmethod
    def build(cls, model: LevyModel, eps_s: float) -> "BandSampler":
        if not 0 < eps_s <= 1:
            raise ConfigurationError(f"small-jump cutoff must lie in (0, 1], got {eps_s}")
        if not model.has_jumps or eps_s == 1.0:
            empty = np.empty((0, TABLE_NODES))
            big = model.density.tail_mass(1.0) if model.has_jumps else 0.0
            return cls(np.array([1.0]), np.empty(0), big, empty, empty, model)
        edges = dyadic_edges(eps_s, 1.0)
        radial = model.density._radial
        nodes = np.geomspace(edges[1:], edges[:-1], TABLE_NODES, axis=-1)
        pieces = integrate_panels(radial, nodes[:, :-1], nodes[:, 1:])
        cumulative = np.concatenate([np.zeros((len(nodes), 1)), np.cumsum(pieces, axis=1)], axis=1)
        masses = 2.0 * cumulative[:, -1]
        with np.errstate(invalid="ignore", divide="ignore"):
            cdfs = np.where(cumulative[:, -1:] > 0, cumulative / cumulative[:, -1:], 0.0)
        return cls(edges, masses, model.density.tail_mass(1.0), nodes, cdfs, model)

    @property
    def cutoff(self) -> float:
        """Small-jump cutoff eps_s (the lowest band edge)."""
        return float(self.edges[-1])

    @property
    def band_count(self) -> int:
        return len(self.masses)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses) + self.big_mass)

    def sample_band(self, rng: np.random.Generator, band: int, size: int) -> np.ndarray:
        """Signed jump sizes from nu normalised on the band (BIG_BAND for |z| > 1)."""
        if band == BIG_BAND:
            magnitude = self.model.density.sample_tail(rng, size)
        else:
            magnitude = np.interp(rng.uniform(size=size), self.cdfs[band], self.nodes[band])
        return np.where(rng.uniform(size=size) < 0.5, -magnitude, magnitude)

    def draw(self, rng: np.random.Generator, horizon: float, intensity_scale: float = 1.0):
        """
        Poisson point process of proposals on [0, horizon) for all bands.

        Returns:
            tuple: (times, sizes, bands), unsorted
        """
        times, sizes, bands = [], [], []
        rates = [*self.masses, self.big_mass]
        labels = [*range(self.band_count), BIG_BAND]
        for band, mass in zip(labels, rates):
            if mass <= 0:
                continue
            count = rng.poisson(mass * horizon * intensity_scale)
            times.append(rng.uniform(0.0, horizon, size=count))
            sizes.append(self.sample_band(rng, band, count))
            bands.append(np.full(count, band, dtype=int))
        if not times:
            return np.empty(0), np.empty(0), np.empty(0, dtype=int)
        return np.concatenate(times), np.concatenate(sizes), np.concatenate(bands)


def step_grid(horizon: float, dt: float):
    """Number of Euler steps and the effective step for a horizon."""
    if dt <= 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    if horizon < 0:
        raise ConfigurationError(f"horizon must be non-negative, got {horizon}")
    if horizon == 0:
        return 0, dt
    n_steps = max(1, int(round(horizon / dt)))
    return n_steps, horizon / n_steps


def levy_increments(
    model: LevyModel, sampler: BandSampler, rng: np.random.Generator, n_paths: int, n_steps: int, step: float
) -> np.ndarray:
    """
    Grid increments of n_paths independent copies of X, shape (n_paths, n_steps).

    Used by the Monte Carlo diagnostics, where paths share one stream and no jump marks are kept.
    """
    s2 = model.small_jump_variance(sampler.cutoff)
    increments = model.sigma * math.sqrt(step) * rng.standard_normal((n_paths, n_steps))
    if s2 > 0:
        increments += math.sqrt(step * s2) * rng.standard_normal((n_paths, n_steps))
    horizon = n_steps * step
    for band, mass in zip([*range(sampler.band_count), BIG_BAND], [*sampler.masses, sampler.big_mass]):
        if mass <= 0:
            continue
        counts = rng.poisson(mass * horizon, size=n_paths)
        total = int(counts.sum())
        owners = np.repeat(np.arange(n_paths), counts)
        slots = np.minimum((rng.uniform(size=total) * n_steps).astype(int), n_steps - 1)
        np.add.at(increments, (owners, slots), sampler.sample_band(rng, band, total))
    return increments


def sample_levy_path(
    model: LevyModel,
    horizon: float,
    dt: float,
    eps_s: float = 1e-3,
    seed=0,
    path_index: int = 0,
    x0: float = 0.0,
    sampler: BandSampler = None,
) -> PathRecord:
    """
    Sample X on [0, horizon] with the small-jump Gaussian substitution.

    Jumps with eps_s < |z| <= 1 come from a compound Poisson process (the compensator
    vanishes because nu is symmetric), jumps with |z| > 1 are added as they are, and
    jumps below eps_s are replaced by a Gaussian of variance dt * int_{|z|<=eps_s} z^2 nu.

    Args:
        model (LevyModel): Triplet to sample
        horizon (float): Time horizon T >= 0
        dt (float): Grid step
        eps_s (float): Small-jump cutoff in (0, 1]
        seed: Master seed or a ready np.random.Generator
        path_index (int): Counter for the derived stream
        x0 (float): Starting point
        sampler (BandSampler): Prebuilt sampler to reuse across an ensemble

    Returns:
        PathRecord: Grid states and the jump point system (every jump accepted)
    """
    n_steps, step = step_grid(horizon, dt)
    if not 0 < eps_s <= 1:
        raise ConfigurationError(f"small-jump cutoff must lie in (0, 1], got {eps_s}")
    if model.has_jumps and horizon > 0:
        beta = model.bg_index()
        if eps_s**beta >= horizon / 100:
            logger.warning(
                "small-jump cutoff %.3g leaves no resolved scale: eps_s^beta = %.3g >= T/100 = %.3g",
                eps_s,
                eps_s**beta,
                horizon / 100,
            )
    rng = as_generator(seed, LEVY_PATH_STREAM, path_index)
    if n_steps == 0:
        return PathRecord(times=np.zeros(1), states=np.array([float(x0)]))

    sampler = sampler or BandSampler.build(model, eps_s)
    s2 = model.small_jump_variance(eps_s)
    increments = model.sigma * math.sqrt(step) * rng.standard_normal(n_steps)
    increments += math.sqrt(step * s2) * rng.standard_normal(n_steps)

    times, sizes, bands = sampler.draw(rng, horizon)
    order = np.argsort(times, kind="stable")
    times, sizes, bands = times[order], sizes[order], bands[order]
    index = np.clip(np.ceil(times / step).astype(int), 1, n_steps)
    increments += np.bincount(index - 1, weights=sizes, minlength=n_steps)

    grid = step * np.arange(n_steps + 1)
    states = np.concatenate([[float(x0)], x0 + np.cumsum(increments)])
    count = len(times)
    jumps = JumpTable(
        s=times,
        z=sizes,
        v=np.zeros(count),
        accepted=np.ones(count, dtype=bool),
        pre_state=states[index - 1],
        x_mark=rng.uniform(size=count),
        band=bands,
    )
    counts = np.bincount(bands[bands >= 0], minlength=sampler.band_count) if count else np.zeros(sampler.band_count, dtype=int)
    return PathRecord(times=grid, states=states, jumps=jumps, band_counts=counts)
