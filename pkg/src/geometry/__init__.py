"""
空間モデル
"""

from .space import (
    SpaceParams,
    ball_volume,
    density,
    modular_check,
    phi0_bound_check,
    plancherel_density,
    spherical_function,
    spherical_function_matrix,
    volume_check,
)

__all__ = [
    "SpaceParams",
    "density",
    "ball_volume",
    "spherical_function",
    "spherical_function_matrix",
    "plancherel_density",
    "phi0_bound_check",
    "modular_check",
    "volume_check",
]
