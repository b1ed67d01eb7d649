"""
物理側の核
"""

from .cutoff import CutoffZeta, KernelProfile, split_kernel
from .heat import (
    check_heat_crude_bound,
    check_heat_l2_and_tail,
    check_heat_sharp_bound,
    check_local_heat_domination,
    heat_kernel,
    heat_kernel_h3,
)
from .riesz_kernel import (
    bessel_pipeline_kernel,
    check_bessel_derivative_bound,
    check_dyadic_pieces,
    check_lq_infinity,
    dyadic_kernel_pieces,
    fourier_ratio_check,
    infinity_kernel_bound_check,
    infinity_lq_norm,
    local_l1_check,
    local_l1_norm,
    riesz_kernel,
)

__all__ = [
    "CutoffZeta",
    "KernelProfile",
    "split_kernel",
    "heat_kernel",
    "heat_kernel_h3",
    "check_heat_crude_bound",
    "check_heat_sharp_bound",
    "check_heat_l2_and_tail",
    "check_local_heat_domination",
    "riesz_kernel",
    "local_l1_norm",
    "local_l1_check",
    "infinity_kernel_bound_check",
    "bessel_pipeline_kernel",
    "fourier_ratio_check",
    "check_bessel_derivative_bound",
    "dyadic_kernel_pieces",
    "check_dyadic_pieces",
    "infinity_lq_norm",
    "check_lq_infinity",
]
