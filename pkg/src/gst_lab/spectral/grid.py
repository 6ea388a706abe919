from dataclasses import dataclass
from typing import Dict

import numpy as np

from ..errors import ConfigurationError
from ..utils import load_csv


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid x_i = -R + i h on [-R, R] with n points, h = 2R / (n - 1)."""

    half_width: float
    points: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise ConfigurationError(f"grid_halfwidth must be positive, got {self.half_width}")
        n = self.points
        if n < 256 or n & (n - 1):
            raise ConfigurationError(f"grid_points must be a power of two >= 256, got {n}")
        if self.spacing >= 1:
            raise ConfigurationError(
                f"grid spacing {self.spacing:.3g} must be < 1 so the |z| <= 1 band spans many cells"
            )

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.points)

    def refined(self) -> "Grid1D":
        return Grid1D(self.half_width, 2 * self.points)

    def coarsened(self) -> "Grid1D":
        return Grid1D(self.half_width, self.points // 2)

    def interior(self, reach: float = 1.0) -> np.ndarray:
        """Indices of nodes with |x| <= R - reach."""
        return np.flatnonzero(np.abs(self.nodes) <= self.half_width - reach + 1e-12)


class Potential:
    """Multiplication potential V(x), locally bounded."""

    name = "potential"
    is_even = True
    is_confining = False

    def __call__(self, x):
        raise NotImplementedError

    @property
    def bound(self):
        """sup |V| when V is bounded, otherwise None."""
        return None

    def params(self) -> Dict:
        raise NotImplementedError


class Polynomial(Potential):
    """V(x) = kappa * x^(2m)."""

    name = "polynomial"
    is_confining = True

    def __init__(self, degree_half: int = 1, scale: float = 1.0):
        if degree_half < 1 or int(degree_half) != degree_half:
            raise ConfigurationError(f"polynomial degree_half must be a positive integer, got {degree_half}")
        if scale <= 0:
            raise ConfigurationError(f"polynomial scale must be positive, got {scale}")
        self.m = int(degree_half)
        self.scale = float(scale)

    def __call__(self, x):
        return self.scale * np.asarray(x, dtype=float) ** (2 * self.m)

    def params(self):
        return {"degree_half": self.m, "scale": self.scale}


class SquareWell(Potential):
    """V(x) = -v on |x| <= a, 0 elsewhere (a decaying, finitely deep well)."""

    name = "square_well"

    def __init__(self, depth: float, half_width: float):
        if depth <= 0 or half_width <= 0:
            raise ConfigurationError("square well depth and half_width must be positive")
        self.depth = float(depth)
        self.half_width = float(half_width)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= self.half_width, -self.depth, 0.0)

    @property
    def bound(self):
        return self.depth

    def params(self):
        return {"depth": self.depth, "half_width": self.half_width}


class TabulatedPotential(Potential):
    """Piecewise-linear V from samples, held constant beyond the sampled range."""

    name = "tabulated"

    def __init__(self, points, values, source: str = ""):
        points = np.asarray(points, dtype=float)
        values = np.asarray(values, dtype=float)
        if points.ndim != 1 or points.shape != values.shape or points.size < 2:
            raise ConfigurationError("tabulated potential needs matching 1-D points and values")
        order = np.argsort(points)
        self.points = points[order]
        self.values = values[order]
        self.source = source
        mirrored = np.interp(-self.points, self.points, self.values)
        self.is_even = bool(np.allclose(mirrored, self.values, rtol=1e-10, atol=1e-12))
        self.is_confining = bool(self.values[0] > self.values.min() and self.values[-1] > self.values.min())

    @classmethod
    def from_csv(cls, path: str) -> "TabulatedPotential":
        data = load_csv(path)
        if data.shape[1] != 2:
            raise ConfigurationError(f"{path}: tabulated potential needs two columns (x, V)")
        return cls(data[:, 0], data[:, 1], source=path)

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.points, self.values)

    @property
    def bound(self):
        return float(np.max(np.abs(self.values)))

    def params(self):
        if self.source:
            return {"table_path": self.source}
        return {"points": self.points.tolist(), "values": self.values.tolist()}


POTENTIAL_REGISTRY = {
    "polynomial": lambda degree_half=1, scale=1.0: Polynomial(degree_half, scale),
    "square_well": lambda depth, half_width: SquareWell(depth, half_width),
    "tabulated": lambda table_path=None, points=None, values=None: (
        TabulatedPotential.from_csv(table_path) if table_path else TabulatedPotential(points, values)
    ),
}


def build_potential(kind: str, **params) -> Potential:
    key = kind.strip().lower()
    if key not in POTENTIAL_REGISTRY:
        raise ConfigurationError(f"Unsupported potential: {kind}")
    try:
        return POTENTIAL_REGISTRY[key](**params)
    except TypeError as exc:
        raise ConfigurationError(f"Bad parameters for potential {kind!r}: {exc}") from exc
