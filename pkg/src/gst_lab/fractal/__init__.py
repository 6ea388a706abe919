from .holder import (
    HolderEstimate,
    ProbeTable,
    collision_mask,
    holder_empirical,
    holder_probes,
    holder_theoretical,
    holder_upper_bound,
    oscillations,
    scale_window,
)
from .points import (
    DELTA_MAX,
    CoveringTable,
    DyadicCounts,
    PointSystem,
    approximation_rate,
    approximation_rates,
    covering_measure,
    dyadic_jump_counts,
    interval_union_measure,
    point_systems,
    resolved_band_limit,
)
from .spectrum import (
    BoxDimension,
    SpectrumEstimate,
    box_dimension,
    jaffard_baseline,
    monotone_residual,
    pointwise_exponents,
    reference_spectrum,
    spectrum_estimate,
    stratified_times,
)

__all__ = [
    "BoxDimension",
    "CoveringTable",
    "DELTA_MAX",
    "DyadicCounts",
    "HolderEstimate",
    "PointSystem",
    "ProbeTable",
    "SpectrumEstimate",
    "approximation_rate",
    "approximation_rates",
    "box_dimension",
    "collision_mask",
    "covering_measure",
    "dyadic_jump_counts",
    "holder_empirical",
    "holder_probes",
    "holder_theoretical",
    "holder_upper_bound",
    "interval_union_measure",
    "jaffard_baseline",
    "monotone_residual",
    "oscillations",
    "point_systems",
    "pointwise_exponents",
    "reference_spectrum",
    "resolved_band_limit",
    "scale_window",
    "spectrum_estimate",
    "stratified_times",
]
