"""
特殊関数
"""

from .orders import BesselOrder, ComplexOrder
from .gamma import gamma_complex, log_abs_gamma
from .bessel import bessel_j, script_j, script_j_derivative, script_j_decay_check

__all__ = [
    "BesselOrder",
    "ComplexOrder",
    "gamma_complex",
    "log_abs_gamma",
    "bessel_j",
    "script_j",
    "script_j_derivative",
    "script_j_decay_check",
]
