"""
Riesz平均作用素と収束実験
"""

from .operator import (
    RadialSample,
    RieszMeansEngine,
    admissible_exponents,
    apply_riesz_means,
    convergence_experiment,
    critical_index,
    default_R_grid,
    heat_sample,
    maximal_grid_stability,
    maximal_operator,
    mellin_budget,
    reference_index,
    zero_sample,
)

__all__ = [
    "RadialSample",
    "RieszMeansEngine",
    "admissible_exponents",
    "apply_riesz_means",
    "convergence_experiment",
    "critical_index",
    "default_R_grid",
    "heat_sample",
    "maximal_grid_stability",
    "maximal_operator",
    "mellin_budget",
    "reference_index",
    "zero_sample",
]
