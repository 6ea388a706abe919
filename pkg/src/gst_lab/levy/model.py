import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from ..errors import DensityDomainError, NumericalError, PrecisionError
from ..utils import save_csv
from .density import LevyDensity, NoJumps, Tabulated
from .tools import dyadic_edges, integrate_dyadic, integrate_panels, oscillation_panels

logger = logging.getLogger(__name__)

# Bands of the small-jump part of psi stop once y * 2^-J falls below this.
TAYLOR_THRESHOLD = 1e-4
# Depth of the band sums used by the divergence ratio test.
MOMENT_BANDS = 120
RATIO_LAG = 10
BISECTION_WIDTH = 0.01


def nu_eval(density: LevyDensity, z):
    """Evaluate nu(z); raises DensityDomainError at z = 0."""
    if np.any(np.asarray(z) == 0):
        raise DensityDomainError("nu_eval: z must be non-zero (density singular at the origin)")
    return density(z)


@dataclass(frozen=True)
class BandMassTable:
    """Dyadic band masses C_j and the cumulative tails omega(2^-j-1) = sum_{i<=j} C_i."""

    masses: np.ndarray
    omegas: np.ndarray

    @property
    def j_max(self) -> int:
        return len(self.masses) - 1

    def to_csv(self, path: str, header_lines=()):
        rows = np.column_stack([np.arange(len(self.masses)), self.masses, self.omegas])
        save_csv(path, ["j", "C_j", "omega_j"], rows, header_lines)


@dataclass(frozen=True)
class LevyModel:
    """
    Symmetric Levy triplet (0, sigma^2 / 2, nu) in dimension one.

    Immutable; all derived quantities are recomputed on demand or cached
    on the density object, so instances can be shared between workers.
    """

    sigma: float = 0.0
    density: LevyDensity = field(default_factory=NoJumps)
    dimension: int = 1

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"diffusion coefficient must be >= 0, got {self.sigma}")
        if self.dimension != 1:
            raise ValueError("only dimension 1 is implemented")

    @property
    def has_jumps(self) -> bool:
        return not self.density.is_null

    def nu(self, z):
        return nu_eval(self.density, z)

    def char_exponent(self, y: float) -> float:
        """
        Characteristic exponent psi(y) = sigma^2 y^2 / 2 + int (1 - cos(yz)) nu(z) dz.

        The |z| <= 1 part is summed over dyadic bands with the integrand written as
        2 nu(z) sin^2(yz/2); the innermost remainder uses its Taylor form
        y^2 / 2 * int_{|z|<=eps} z^2 nu(z) dz.
        """
        y = abs(float(y))
        if y == 0.0:
            return 0.0
        value = 0.5 * self.sigma**2 * y * y
        if not self.has_jumps:
            return value
        return value + self._small_jump_exponent(y) + self._large_jump_exponent(y)

    def _small_jump_exponent(self, y: float) -> float:
        density = self.density
        upper = min(1.0, density.support_radius)
        cutoff = min(upper, 2.0 ** -max(0, math.ceil(math.log2(y / TAYLOR_THRESHOLD))))
        total = 0.5 * y * y * density.second_moment_below(cutoff)
        edges = dyadic_edges(cutoff, upper) if cutoff < upper else np.empty(0)
        for hi, lo in zip(edges[:-1], edges[1:]):
            panels = oscillation_panels(lo, hi, y)
            band = integrate_panels(
                lambda r: 4.0 * np.sin(0.5 * y * r) ** 2 * density._radial(r), panels[:-1], panels[1:]
            )
            total += float(np.sum(band))
        return total

    def _large_jump_exponent(self, y: float) -> float:
        density = self.density
        if density.support_radius <= 1.0:
            return 0.0
        mass = density.tail_mass(1.0)
        result = integrate.quad(
            density._radial, 1.0, density.support_radius, weight="cos", wvar=y, full_output=1, limit=200
        )
        if len(result) > 3:
            raise NumericalError("char_exponent: oscillatory tail quadrature did not converge", str(result[3]))
        return float(mass - 2.0 * result[0])

    def small_jump_moment(self, gamma: float, eps: float = 1.0) -> float:
        """
        int_{|z|<=eps} |z|^gamma nu(z) dz by dyadic band summation.

        Returns math.inf when the band sums fail the ratio test.
        """
        if not 0 < eps <= 1:
            raise ValueError(f"small_jump_moment: eps must lie in (0, 1], got {eps}")
        if not self.has_jumps:
            return 0.0
        if gamma == 2.0:
            return float(self.density.second_moment_below(eps))
        sums = self._band_moments(gamma, eps)
        recent, earlier = sums[-1], sums[-1 - RATIO_LAG]
        if recent == 0.0:
            return float(np.sum(sums))
        if earlier == 0.0 or not np.isfinite(recent):
            return math.inf
        rate = (recent / earlier) ** (1.0 / RATIO_LAG)
        if rate >= 1.0 - 1e-12:
            return math.inf
        return float(np.sum(sums) + recent * rate / (1.0 - rate))

    def _band_moments(self, gamma: float, eps: float) -> np.ndarray:
        density = self.density
        upper = eps * 2.0 ** -np.arange(MOMENT_BANDS, dtype=float)
        lower = 0.5 * upper
        with np.errstate(over="ignore", invalid="ignore"):
            return 2.0 * integrate_panels(lambda r: r**gamma * density._radial(r), lower, upper)

    def bg_index(self, mode: str = "analytic") -> float:
        """Blumenthal-Getoor index, closed form or by bisection on moment finiteness."""
        if mode == "analytic":
            return float(self.density.analytic_bg_index())
        if mode != "numeric":
            raise ValueError(f"bg_index mode must be 'analytic' or 'numeric', got {mode!r}")
        if not self.has_jumps:
            return 0.0
        if isinstance(self.density, Tabulated) and not self.density.resolution_ok():
            raise PrecisionError(
                "tabulated density is too coarse near the origin for a numeric index",
                f"smallest |z| = {self.density.points[0]:.3g}, needs <= 1e-4 and 8 points <= 0.1",
            )
        if math.isfinite(self.small_jump_moment(0.0, 1.0)):
            return 0.0
        lo, hi = 0.0, 2.0
        while hi - lo > BISECTION_WIDTH:
            mid = 0.5 * (lo + hi)
            if math.isfinite(self.small_jump_moment(mid, 1.0)):
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def dyadic_band_mass(self, j: int) -> float:
        """C_j = int_{2^-j-1 < |z| <= 2^-j} nu(z) dz."""
        if j < 0:
            raise ValueError(f"band index must be >= 0, got {j}")
        if not self.has_jumps:
            return 0.0
        hi = 2.0**-j
        return float(2.0 * integrate_panels(self.density._radial, 0.5 * hi, hi))

    def omega(self, u: float) -> float:
        """omega(u) = int_{u < |z| < 1} nu(z) dz."""
        if u >= 1.0 or not self.has_jumps:
            return 0.0
        return 2.0 * integrate_dyadic(self.density._radial, u, 1.0)

    def band_mass_table(self, j_max: int) -> BandMassTable:
        masses = np.array([self.dyadic_band_mass(j) for j in range(j_max + 1)])
        return BandMassTable(masses=masses, omegas=np.cumsum(masses))

    def small_jump_variance(self, eps: float) -> float:
        return float(self.density.second_moment_below(eps)) if self.has_jumps else 0.0

    def describe(self, beta: Optional[float] = None) -> str:
        beta = self.bg_index() if beta is None else beta
        return f"sigma={self.sigma:g}, nu={self.density!r}, beta={beta:g}"
