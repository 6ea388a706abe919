from .feynman_kac import FeynmanKacDecay, KatoTable, feynman_kac_decay, kato_diagnostic
from .grid import (
    Grid1D,
    Polynomial,
    Potential,
    SquareWell,
    TabulatedPotential,
    build_potential,
)
from .ground_state import (
    GroundState,
    TailModel,
    ground_state,
    log_phi0_eval,
    phi0_eval,
    smoothness_probe,
    stationary_cdf,
)
from .operator import DiscreteOperator, JumpStencil, discretize_H, discretize_L

__all__ = [
    "DiscreteOperator",
    "FeynmanKacDecay",
    "Grid1D",
    "GroundState",
    "JumpStencil",
    "KatoTable",
    "Polynomial",
    "Potential",
    "SquareWell",
    "TabulatedPotential",
    "TailModel",
    "build_potential",
    "discretize_H",
    "discretize_L",
    "feynman_kac_decay",
    "ground_state",
    "kato_diagnostic",
    "log_phi0_eval",
    "phi0_eval",
    "smoothness_probe",
    "stationary_cdf",
]
