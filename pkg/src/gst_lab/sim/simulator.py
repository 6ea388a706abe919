import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..errors import ConfigurationError, ConsistencyError
from ..gst.generator import GstModel
from ..levy.model import LevyModel
from ..levy.sampler import BIG_BAND, BandSampler, step_grid
from ..paths import JumpTable, PathRecord
from ..utils import GST_PATH_STREAM, derive_rng
from .config import SimConfig

logger = logging.getLogger(__name__)

EXIT_WARNING_FRACTION = 0.2
CLOCK_BLOCK = 64
ENVELOPE_SLACK = 1e-9


def accept_proposals(v, ratio) -> np.ndarray:
    """Thinning rule: a proposal with mark v is accepted iff v <= ratio at the pre-jump state."""
    return np.asarray(v) <= np.asarray(ratio)


@dataclass
class _Clock:
    """Per-path exponential clock for |z| > 1 proposals with a state-dependent envelope."""

    rng: np.random.Generator
    sampler: BandSampler
    threshold: float = 0.0
    buffer: dict = field(default_factory=dict)
    cursor: int = CLOCK_BLOCK

    def __post_init__(self):
        self.threshold = float(self.rng.exponential())

    def pop(self):
        if self.cursor >= CLOCK_BLOCK:
            self.buffer = {
                "z": self.sampler.sample_band(self.rng, BIG_BAND, CLOCK_BLOCK),
                "u": self.rng.uniform(size=CLOCK_BLOCK),
                "frac": self.rng.uniform(size=CLOCK_BLOCK),
                "x_mark": self.rng.uniform(size=CLOCK_BLOCK),
                "wait": self.rng.exponential(size=CLOCK_BLOCK),
            }
            self.cursor = 0
        item = {key: float(values[self.cursor]) for key, values in self.buffer.items()}
        self.cursor += 1
        self.threshold += item["wait"]
        return item


class EnsembleSimulator:
    """
    Euler scheme with band-wise Poisson thinning for the ground state SDE.

    Paths of a batch are stepped together, but every random number of a path is
    drawn from its own derived streams, so a path depends only on
    (model, config, master seed, path index).

    With `gst=None` the ratio is forced to 1 and the scheme samples the Levy
    process itself through the same machinery.

    Args:
        gst (GstModel): Transformed model, or None for the unit-ratio baseline
        cfg (SimConfig): Ensemble settings
        levy (LevyModel): Required when gst is None
    """

    def __init__(self, gst: Optional[GstModel], cfg: SimConfig, levy: Optional[LevyModel] = None):
        if gst is None and levy is None:
            raise ConfigurationError("unit-ratio simulation needs a Levy model")
        if gst is None and cfg.initial_law == "stationary":
            raise ConfigurationError("a stationary start needs a ground state")
        self.gst = gst
        self.cfg = cfg.validate(gst.grid if gst is not None else None)
        self.levy = gst.levy if gst is not None else levy
        if gst is not None and abs(gst.eps_s - cfg.eps_s) > 0:
            logger.debug("drift cutoff %.3g differs from simulation cutoff %.3g; rebuilding", gst.eps_s, cfg.eps_s)
            gst = GstModel(gst.levy, gst.gs, gst.H, eps_s=cfg.eps_s)
            self.gst = gst
        self.sampler = BandSampler.build(self.levy, cfg.eps_s)
        self.s2 = self.levy.small_jump_variance(cfg.eps_s)
        self.n_steps, self.step = step_grid(cfg.horizon, cfg.dt)
        if gst is None:
            self.band_envelopes = np.ones(self.sampler.band_count)
            self.field = None
        else:
            self.band_envelopes = np.array(
                [gst.local_ratio_bound(cfg.window, z_max=hi) for hi in self.sampler.edges[:-1]]
            )
            self.field = gst.drift_field()
        self.big_mass = self.sampler.big_mass

    def ratio(self, x, z):
        if self.gst is None:
            return np.ones(np.broadcast(np.asarray(x), np.asarray(z)).shape)
        return self.gst.ratio(x, z)

    def _drift(self, x):
        return np.zeros_like(x) if self.field is None else self.field.effective(x)

    def _weight(self, x):
        return np.ones_like(x) if self.field is None else self.field.weight_at(x)

    def _big_bound(self, x):
        return np.ones_like(x) if self.gst is None else self.gst.big_jump_bound(x)

    def initial_state(self, path_index: int) -> float:
        if self.cfg.initial_law == "stationary":
            from .checks import sample_stationary_init

            return float(sample_stationary_init(self.gst.gs, derive_rng(self.cfg.seed, GST_PATH_STREAM, path_index, 2)))
        return float(self.cfg.x0)

    def _draw_chunk(self, rng: np.random.Generator, k0: int, length: int):
        """Gaussians and small-band proposals of one path for steps k0 .. k0 + length - 1."""
        gauss = rng.standard_normal((2, length))
        t0, span = k0 * self.step, length * self.step
        parts = []
        for band in range(self.sampler.band_count):
            mass = self.sampler.masses[band]
            if mass <= 0:
                continue
            count = rng.poisson(mass / self.band_envelopes[band] * span)
            s = t0 + rng.uniform(0.0, span, size=count)
            z = self.sampler.sample_band(rng, band, count)
            u = rng.uniform(size=count)
            x_mark = rng.uniform(size=count)
            parts.append((s, z, u, x_mark, np.full(count, band)))
        return gauss, parts

    def run(self, path_indices: Sequence[int]) -> List[PathRecord]:
        """Simulate the given paths together and return their records in the same order."""
        cfg = self.cfg
        size = len(path_indices)
        if size == 0:
            return []
        n_steps, step = self.n_steps, self.step
        times = step * np.arange(n_steps + 1)
        x = np.array([self.initial_state(p) for p in path_indices])
        states = np.empty((size, n_steps + 1))
        states[:, 0] = x
        alive = np.abs(x) <= cfg.window
        exit_step = np.where(alive, -1, 0)
        band_counts = np.zeros((size, self.sampler.band_count + 1), dtype=int)
        mains = [derive_rng(cfg.seed, GST_PATH_STREAM, p, 0) for p in path_indices]
        clocks = (
            [_Clock(derive_rng(cfg.seed, GST_PATH_STREAM, p, 1), self.sampler) for p in path_indices]
            if self.big_mass > 0
            else []
        )
        intensity = np.zeros(size)
        thresholds = np.array([clock.threshold for clock in clocks]) if clocks else np.zeros(size)
        recorded: List[tuple] = []
        sqrt_dt = math.sqrt(step)

        for k0 in range(0, n_steps, cfg.chunk_steps):
            length = min(cfg.chunk_steps, n_steps - k0)
            gauss = np.zeros((2, size, length))
            columns = {"owner": [], "s": [], "z": [], "u": [], "x_mark": [], "band": []}
            for local in np.flatnonzero(alive):
                g, parts = self._draw_chunk(mains[local], k0, length)
                gauss[:, local] = g
                for s, z, u, x_mark, band in parts:
                    columns["owner"].append(np.full(len(s), local))
                    for key, values in (("s", s), ("z", z), ("u", u), ("x_mark", x_mark), ("band", band)):
                        columns[key].append(values)
            props = {key: (np.concatenate(v) if v else np.empty(0)) for key, v in columns.items()}
            owner = props["owner"].astype(int)
            band = props["band"].astype(int)
            slot = np.clip(np.floor(props["s"] / step).astype(int), k0, k0 + length - 1)
            order = np.lexsort((props["s"], owner, slot))
            owner, band, slot = owner[order], band[order], slot[order]
            s_all, z_all, u_all, xm_all = (props[key][order] for key in ("s", "z", "u", "x_mark"))
            bounds = np.searchsorted(slot, np.arange(k0, k0 + length + 1))

            for k in range(k0, k0 + length):
                active = np.flatnonzero(alive)
                if active.size == 0:
                    break
                col = k - k0
                xa = x[active]
                increment = np.zeros(size)
                increment[active] = (
                    self._drift(xa) * step
                    + self.levy.sigma * sqrt_dt * gauss[0, active, col]
                    + np.sqrt(step * self.s2 * self._weight(xa)) * gauss[1, active, col]
                )
                lo, hi = bounds[col], bounds[col + 1]
                if hi > lo:
                    who = owner[lo:hi]
                    live = alive[who]
                    who = who[live]
                    z = z_all[lo:hi][live]
                    b = band[lo:hi][live]
                    pre = x[who]
                    r = self.ratio(pre, z)
                    cap = 1.0 / self.band_envelopes[b]
                    if np.any(r > cap * (1.0 + ENVELOPE_SLACK)):
                        worst = int(np.argmax(r / cap))
                        raise ConsistencyError(
                            f"thinning envelope exceeded: ratio {r[worst]:.6g} > 1/c = {cap[worst]:.6g} "
                            f"at x = {pre[worst]:.6g}, z = {z[worst]:.6g}"
                        )
                    v = u_all[lo:hi][live] * cap
                    accepted = accept_proposals(v, r)
                    np.add.at(increment, who, np.where(accepted, z, 0.0))
                    np.add.at(band_counts, (who, b), accepted.astype(int))
                    if cfg.record_jumps:
                        keep = accepted if not cfg.record_rejected else np.ones_like(accepted)
                        recorded.append(
                            (who[keep], s_all[lo:hi][live][keep], z[keep], v[keep], accepted[keep],
                             pre[keep], xm_all[lo:hi][live][keep], b[keep])
                        )
                if clocks:
                    intensity[active] += self.big_mass * self._big_bound(xa) * step
                    for local in active[intensity[active] >= thresholds[active]]:
                        self._big_jumps(local, k, x, increment, intensity, clocks, band_counts, recorded)
                        thresholds[local] = clocks[local].threshold
                x[active] += increment[active]
                states[active, k + 1] = x[active]
                out = active[np.abs(x[active]) > cfg.window]
                if out.size:
                    alive[out] = False
                    exit_step[out] = k + 1

        return [
            self._assemble(i, times, states, exit_step, band_counts, recorded) for i in range(size)
        ]

    def _big_jumps(self, local, k, x, increment, intensity, clocks, band_counts, recorded):
        clock = clocks[local]
        pre = x[local]
        bound = float(self._big_bound(np.array([pre]))[0])
        while intensity[local] >= clock.threshold:
            item = clock.pop()
            z = item["z"]
            r = float(self.ratio(np.array([pre]), np.array([z]))[0])
            if r > bound * (1.0 + ENVELOPE_SLACK):
                raise ConsistencyError(f"big-jump envelope exceeded: ratio {r:.6g} > {bound:.6g} at x = {pre:.6g}")
            v = item["u"] * bound
            accepted = bool(accept_proposals(v, r))
            if accepted:
                increment[local] += z
                band_counts[local, -1] += 1
            if self.cfg.record_jumps and (accepted or self.cfg.record_rejected):
                recorded.append(
                    (np.array([local]), np.array([(k + item["frac"]) * self.step]), np.array([z]), np.array([v]),
                     np.array([accepted]), np.array([pre]), np.array([item["x_mark"]]), np.array([BIG_BAND]))
                )

    def _assemble(self, i, times, states, exit_step, band_counts, recorded) -> PathRecord:
        end = int(exit_step[i])
        exited = end >= 0
        last = end if exited else len(times) - 1
        jumps = JumpTable()
        if recorded:
            pieces = []
            for who, s, z, v, acc, pre, xm, b in recorded:
                mine = who == i
                if np.any(mine):
                    pieces.append(
                        JumpTable(s=s[mine], z=z[mine], v=v[mine], accepted=acc[mine].astype(bool),
                                  pre_state=pre[mine], x_mark=xm[mine], band=b[mine].astype(int))
                    )
            jumps = JumpTable.concatenate(pieces)
        return PathRecord(
            times=times[: last + 1].copy(),
            states=states[i, : last + 1].copy(),
            jumps=jumps,
            exited=exited,
            exit_time=float(times[last]) if exited else None,
            band_counts=band_counts[i].copy(),
        )


def simulate_path(gst: GstModel, cfg: SimConfig, path_index: int = 0) -> PathRecord:
    """One path of the ensemble defined by cfg; identical to simulate_ensemble(gst, cfg)[path_index]."""
    return EnsembleSimulator(gst, cfg).run([path_index])[0]


def simulate_ensemble(
    gst: Optional[GstModel], cfg: SimConfig, threads: int = 1, levy: Optional[LevyModel] = None
) -> List[PathRecord]:
    """
    cfg.n_paths independent paths, merged by path index.

    Batches have a fixed composition (cfg.batch_size consecutive indices), so the
    result does not depend on the number of threads.
    """
    simulator = EnsembleSimulator(gst, cfg, levy=levy)
    batches = [range(lo, min(lo + cfg.batch_size, cfg.n_paths)) for lo in range(0, cfg.n_paths, cfg.batch_size)]
    if threads > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(simulator.run, batches))
    else:
        results = [simulator.run(batch) for batch in batches]
    paths = [path for batch in results for path in batch]
    fraction = exit_fraction(paths)
    if fraction > EXIT_WARNING_FRACTION:
        logger.warning("%.1f%% of paths left the window |x| <= %g; raise window_bound", 100 * fraction, cfg.window)
    return paths


def exit_fraction(paths: Sequence[PathRecord]) -> float:
    if not paths:
        return 0.0
    return float(np.mean([p.exited for p in paths]))
