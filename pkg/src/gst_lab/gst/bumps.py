from dataclasses import dataclass
from typing import Dict

import numpy as np


@dataclass(frozen=True)
class BumpFunction:
    """Smooth compactly supported bump exp(1 - 1 / (1 - u^2)), u = (x - center) / width."""

    center: float
    width: float

    @property
    def name(self) -> str:
        return f"bump({self.center:g},{self.width:g})"

    def __call__(self, x):
        u = (np.asarray(x, dtype=float) - self.center) / self.width
        inside = np.abs(u) < 1.0
        out = np.zeros_like(u)
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return out

    @property
    def support(self):
        return self.center - self.width, self.center + self.width


SHIPPED_BUMPS: Dict[str, BumpFunction] = {
    bump.name: bump
    for bump in (
        BumpFunction(0.0, 1.5),
        BumpFunction(0.5, 1.0),
        BumpFunction(-0.5, 1.0),
        BumpFunction(1.0, 2.0),
        BumpFunction(-1.0, 2.0),
    )
}


def martingale_bumps(count: int = 3) -> Dict[str, BumpFunction]:
    """The first `count` shipped bumps, used as martingale-problem test functions."""
    return dict(list(SHIPPED_BUMPS.items())[:count])
