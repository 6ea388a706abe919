from typing import Callable, Dict

from ..errors import ConfigurationError
from .density import (
    IsotropicStable,
    LevyDensity,
    LogPerturbedStable,
    NoJumps,
    RelativisticStable,
    Tabulated,
    TemperedStable,
)
from .model import BandMassTable, LevyModel, nu_eval
from .sampler import BandSampler, sample_levy_path

# Mapping from the [levy] config `density` key to a builder taking the section parameters
DENSITY_REGISTRY: Dict[str, Callable[..., LevyDensity]] = {
    "none": lambda: NoJumps(),
    "stable": lambda alpha, scale=1.0: IsotropicStable(alpha, scale),
    "tempered": lambda alpha, scale=1.0, tempering=1.0: TemperedStable(alpha, scale, tempering),
    "logpert": lambda a: LogPerturbedStable(a),
    "relativistic": lambda mass: RelativisticStable(mass),
    "tabulated": lambda points, values: Tabulated(points, values),
}

SUPPORTED_DENSITIES: set[str] = set(DENSITY_REGISTRY.keys())


def build_density(name: str, **params) -> LevyDensity:
    """Factory that builds a Levy density from its short name and parameters.

    Args:
        name (str): Short density name such as "stable" or "logpert".
        **params: Keyword parameters of the variant.

    Returns:
        LevyDensity: The density instance.
    """
    key = name.strip().lower()
    if key not in DENSITY_REGISTRY:
        raise ConfigurationError(f"Unsupported Levy density: {name}")
    try:
        return DENSITY_REGISTRY[key](**params)
    except TypeError as exc:
        raise ConfigurationError(f"Bad parameters for density {name!r}: {exc}") from exc


__all__ = [
    "BandMassTable",
    "BandSampler",
    "IsotropicStable",
    "LevyDensity",
    "LevyModel",
    "LogPerturbedStable",
    "NoJumps",
    "RelativisticStable",
    "Tabulated",
    "TemperedStable",
    "build_density",
    "nu_eval",
    "sample_levy_path",
    "DENSITY_REGISTRY",
    "SUPPORTED_DENSITIES",
]
