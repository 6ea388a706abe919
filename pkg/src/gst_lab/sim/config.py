import logging
from dataclasses import asdict, dataclass, replace

from ..errors import ConfigurationError
from ..spectral.grid import Grid1D

logger = logging.getLogger(__name__)

INITIAL_LAWS = ("point", "stationary")


@dataclass(frozen=True)
class SimConfig:
    """
    Settings of one simulated ensemble.

    Args:
        horizon (float): Time horizon T
        dt (float): Euler step
        eps_s (float): Small-jump cutoff
        window (float): Localisation window K; paths leaving |x| <= K are truncated
        seed (int): Master seed
        n_paths (int): Ensemble size
        initial_law (str): "point" (start at x0) or "stationary" (phi0^2 dx)
        x0 (float): Starting point for the point law
        record_jumps (bool): Keep the marked point system of every path
        record_rejected (bool): Also keep rejected proposals
        chunk_steps (int): Steps whose randomness is drawn in one go per path
        batch_size (int): Paths stepped together
    """

    horizon: float = 1.0
    dt: float = 1e-3
    eps_s: float = 0.05
    window: float = 8.0
    seed: int = 0
    n_paths: int = 100
    initial_law: str = "point"
    x0: float = 0.0
    record_jumps: bool = True
    record_rejected: bool = False
    chunk_steps: int = 256
    batch_size: int = 256

    def validate(self, grid: Grid1D = None) -> "SimConfig":
        """
        Check the invariants; returns self so calls can be chained.

        Raises:
            ConfigurationError: On any violated invariant
        """
        if self.horizon < 0:
            raise ConfigurationError(f"horizon_time must be non-negative, got {self.horizon}")
        if self.dt <= 0:
            raise ConfigurationError(f"time_step must be positive, got {self.dt}")
        if self.dt > self.horizon and self.horizon > 0:
            raise ConfigurationError(f"time_step {self.dt} exceeds horizon_time {self.horizon}")
        if self.horizon > 0 and self.dt > 1e-3 * self.horizon:
            logger.warning("time_step %.3g is coarser than 1e-3 * horizon_time (%.3g)", self.dt, 1e-3 * self.horizon)
        if not 0 < self.eps_s <= 1:
            raise ConfigurationError(f"small_jump_cutoff must lie in (0, 1], got {self.eps_s}")
        if self.window <= 0:
            raise ConfigurationError(f"window_bound must be positive, got {self.window}")
        if self.n_paths < 0:
            raise ConfigurationError(f"n_paths must be non-negative, got {self.n_paths}")
        if self.initial_law not in INITIAL_LAWS:
            raise ConfigurationError(f"initial_law must be one of {INITIAL_LAWS}, got {self.initial_law!r}")
        if self.chunk_steps < 1 or self.batch_size < 1:
            raise ConfigurationError("chunk_steps and batch_size must be positive")
        if self.initial_law == "point" and abs(self.x0) > self.window:
            raise ConfigurationError(f"initial_point {self.x0} lies outside the window {self.window}")
        if grid is not None:
            if self.eps_s < grid.spacing:
                raise ConfigurationError(
                    f"small_jump_cutoff {self.eps_s:.3g} is below the grid spacing {grid.spacing:.3g}"
                )
            if self.window > grid.half_width - 1.0:
                raise ConfigurationError(
                    f"window_bound {self.window:g} exceeds grid_halfwidth - 1 = {grid.half_width - 1.0:g}"
                )
        return self

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)
