import math
from typing import Dict

import numpy as np
from scipy import integrate, special

from ..errors import ConfigurationError, DensityDomainError
from .tools import integrate_dyadic


class LevyDensity:
    """
    Symmetric Levy density on R minus the origin, evaluated through its radial profile.

    Subclasses implement `_radial(r)` for r > 0 and the closed-form quantities
    they know; everything else falls back to quadrature.
    """

    name: str = "levy-density"
    # Density vanishes for |z| beyond this radius.
    support_radius: float = math.inf

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z == 0):
            raise DensityDomainError("Levy density is singular at z = 0")
        return self._radial(np.abs(z))

    def _radial(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def is_null(self) -> bool:
        return False

    def analytic_bg_index(self) -> float:
        raise NotImplementedError

    def params(self) -> Dict[str, float]:
        """Parameters as written to the [levy] config section."""
        raise NotImplementedError

    def second_moment_below(self, eps: float) -> float:
        """Two-sided small-jump variance: integral of z^2 nu(z) over 0 < |z| <= eps."""
        raise NotImplementedError

    def tail_mass(self, u: float = 1.0) -> float:
        """Two-sided mass of |z| > u, u > 0."""
        if u >= self.support_radius:
            return 0.0
        value, _ = integrate.quad(self._radial, u, self.support_radius, limit=200)
        return 2.0 * value

    def sample_tail(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Magnitudes |z| > 1 drawn from nu restricted to |z| > 1 (normalised)."""
        if size == 0 or self.tail_mass(1.0) == 0.0:
            return np.empty(0)
        grid, cdf = self._tail_table()
        return np.interp(rng.uniform(size=size), cdf, grid)

    def _tail_table(self):
        cached = getattr(self, "_tail_cache", None)
        if cached is not None:
            return cached
        upper = min(self.support_radius, 1e12)
        grid = np.geomspace(1.0, upper, 4097)
        increments = np.array(
            [integrate.quad(self._radial, a, b)[0] for a, b in zip(grid[:-1], grid[1:])]
        )
        cdf = np.concatenate([[0.0], np.cumsum(increments)])
        cdf /= cdf[-1]
        object.__setattr__(self, "_tail_cache", (grid, cdf))
        return grid, cdf

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class NoJumps(LevyDensity):
    """nu = 0: the pure Gaussian model."""

    name = "none"
    support_radius = 0.0

    def _radial(self, r):
        return np.zeros_like(r)

    @property
    def is_null(self) -> bool:
        return True

    def analytic_bg_index(self) -> float:
        return 0.0

    def params(self):
        return {}

    def second_moment_below(self, eps):
        return 0.0

    def tail_mass(self, u=1.0):
        return 0.0


class IsotropicStable(LevyDensity):
    """nu(z) = c |z|^(-1-alpha)."""

    name = "stable"

    def __init__(self, alpha: float, scale: float = 1.0):
        if not 0 < alpha < 2:
            raise ConfigurationError(f"stable index must lie in (0, 2), got {alpha}")
        if scale <= 0:
            raise ConfigurationError(f"stable scale must be positive, got {scale}")
        self.alpha = float(alpha)
        self.scale = float(scale)

    def _radial(self, r):
        return self.scale * r ** (-1.0 - self.alpha)

    def analytic_bg_index(self):
        return self.alpha

    def params(self):
        return {"alpha": self.alpha, "scale": self.scale}

    def second_moment_below(self, eps):
        return 2.0 * self.scale * eps ** (2.0 - self.alpha) / (2.0 - self.alpha)

    def tail_mass(self, u=1.0):
        return 2.0 * self.scale * u ** (-self.alpha) / self.alpha

    def sample_tail(self, rng, size):
        # Pareto tail: P(|z| > r) = r^-alpha for r >= 1
        return (1.0 - rng.uniform(size=size)) ** (-1.0 / self.alpha)


class TemperedStable(LevyDensity):
    """nu(z) = c exp(-lambda |z|) |z|^(-1-alpha)."""

    name = "tempered"

    def __init__(self, alpha: float, scale: float = 1.0, tempering: float = 1.0):
        if not 0 < alpha < 2:
            raise ConfigurationError(f"stable index must lie in (0, 2), got {alpha}")
        if scale <= 0 or tempering <= 0:
            raise ConfigurationError("tempered stable scale and tempering must be positive")
        self.alpha = float(alpha)
        self.scale = float(scale)
        self.tempering = float(tempering)

    def _radial(self, r):
        return self.scale * np.exp(-self.tempering * r) * r ** (-1.0 - self.alpha)

    def analytic_bg_index(self):
        return self.alpha

    def params(self):
        return {"alpha": self.alpha, "scale": self.scale, "tempering": self.tempering}

    def second_moment_below(self, eps):
        s = 2.0 - self.alpha
        lam = self.tempering
        lower_gamma = special.gammainc(s, lam * eps) * special.gamma(s)
        return 2.0 * self.scale * lam ** (-s) * lower_gamma


class LogPerturbedStable(LevyDensity):
    """
    nu(z) = 1 / (|z|^3 |log|z||^a) near the origin, a > 1 (Blumenthal-Getoor index 2).

    The density is tapered by a C1 smoothstep on 1/4 <= |z| <= 1/2 and vanishes beyond 1/2.
    """

    name = "logpert"
    support_radius = 0.5
    TAPER_START = 0.25

    def __init__(self, a: float):
        if a <= 1:
            raise ConfigurationError(f"log-perturbed exponent must exceed 1, got {a}")
        self.a = float(a)

    def _radial(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = r < self.support_radius
        ri = r[inside]
        core = ri ** -3.0 * np.abs(np.log(ri)) ** (-self.a)
        u = np.clip((ri - self.TAPER_START) / (self.support_radius - self.TAPER_START), 0.0, 1.0)
        out[inside] = core * (1.0 - u * u * (3.0 - 2.0 * u))
        return out

    def analytic_bg_index(self):
        return 2.0

    def params(self):
        return {"a": self.a}

    def second_moment_below(self, eps):
        head = min(eps, self.TAPER_START)
        value = 2.0 * np.log(1.0 / head) ** (1.0 - self.a) / (self.a - 1.0)
        if eps > self.TAPER_START:
            upper = min(eps, self.support_radius)
            value += 2.0 * integrate_dyadic(lambda r: r * r * self._radial(r), self.TAPER_START, upper)
        return float(value)

    def tail_mass(self, u=1.0):
        if u >= self.support_radius:
            return 0.0
        return 2.0 * integrate_dyadic(self._radial, u, self.support_radius)


class RelativisticStable(LevyDensity):
    """
    Jump density of the relativistic operator (-d^2/dx^2 + m^2)^(1/2) - m in one dimension.

    nu(z) = (m / pi) K_1(m |z|) / |z|, with exponent psi(y) = sqrt(y^2 + m^2) - m.
    """

    name = "relativistic"

    def __init__(self, mass: float):
        if mass <= 0:
            raise ConfigurationError(f"relativistic mass must be positive, got {mass}")
        self.mass = float(mass)

    def _radial(self, r):
        return self.mass / np.pi * special.k1(self.mass * r) / r

    def analytic_bg_index(self):
        return 1.0

    def params(self):
        return {"mass": self.mass}

    def closed_form_exponent(self, y: float) -> float:
        return float(np.sqrt(y * y + self.mass * self.mass) - self.mass)

    def second_moment_below(self, eps):
        m = self.mass
        # x K_1(x) -> 1 as x -> 0, so the integrand is bounded
        value, _ = integrate.quad(lambda x: x * special.k1(x) if x > 0 else 1.0, 0.0, m * eps)
        return float(2.0 * value / (np.pi * m))


class Tabulated(LevyDensity):
    """
    Density given by samples, log-log interpolated.

    Below the first sample the density is extended by the power law of the first two
    samples; beyond the last sample it vanishes.
    """

    name = "tabulated"

    def __init__(self, points, values):
        points = np.asarray(points, dtype=float)
        values = np.asarray(values, dtype=float)
        if points.shape != values.shape or points.ndim != 1:
            raise ConfigurationError("tabulated density needs matching 1-D points and values")
        if np.any(points == 0):
            raise ConfigurationError("tabulated density cannot be sampled at z = 0")
        negative = points < 0
        if np.any(negative):
            mirrored = dict(zip(np.round(-points[negative], 12), values[negative]))
            for p, v in zip(points[~negative], values[~negative]):
                key = round(p, 12)
                if key in mirrored and not np.isclose(mirrored[key], v, rtol=1e-10, atol=0):
                    raise ConfigurationError(f"tabulated density is not even at |z| = {p}")
            points, values = np.abs(points), values
        order = np.argsort(points)
        points, idx = np.unique(points[order], return_index=True)
        values = values[order][idx]
        if points.size < 2:
            raise ConfigurationError("tabulated density needs at least two distinct |z| samples")
        if np.any(values <= 0):
            raise ConfigurationError("tabulated density must be strictly positive on its samples")
        self.points = points
        self.values = values
        self.support_radius = float(points[-1])
        self._log_r = np.log(points)
        self._log_v = np.log(values)
        self._head_slope = (self._log_v[1] - self._log_v[0]) / (self._log_r[1] - self._log_r[0])

    def _radial(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = r <= self.support_radius
        log_r = np.log(r[inside])
        log_v = np.interp(log_r, self._log_r, self._log_v)
        below = log_r < self._log_r[0]
        log_v[below] = self._log_v[0] + self._head_slope * (log_r[below] - self._log_r[0])
        out[inside] = np.exp(log_v)
        return out

    def analytic_bg_index(self):
        return float(np.clip(-self._head_slope - 1.0, 0.0, 2.0))

    def params(self):
        return {"points": self.points.tolist(), "values": self.values.tolist()}

    def resolution_ok(self) -> bool:
        return self.points[0] <= 1e-4 and np.count_nonzero(self.points <= 0.1) >= 8

    def second_moment_below(self, eps):
        r0 = self.points[0]
        p = self._head_slope + 3.0
        if p <= 0:
            raise ConfigurationError("tabulated density is not a Levy density: z^2 nu(z) not integrable at 0")
        head_eps = min(eps, r0)
        head = 2.0 * self.values[0] * r0 ** (-self._head_slope) * head_eps ** p / p
        if eps <= r0:
            return float(head)
        upper = min(eps, self.support_radius)
        return float(head + 2.0 * integrate_dyadic(lambda r: r * r * self._radial(r), r0, upper))

    def tail_mass(self, u=1.0):
        if u >= self.support_radius:
            return 0.0
        return 2.0 * integrate_dyadic(self._radial, u, self.support_radius)
