"""
スペクトル乗数
"""

from .riesz_symbols import (
    RieszParams,
    eval_h,
    eval_heat_multiplier,
    eval_riesz_multiplier,
    imaginary_power_multiplier,
)
from .partition import (
    DyadicPiece,
    check_hhat_tail,
    check_hjr_derivative_norms,
    eval_hjr,
    partition_chi,
    support_length_check,
)
from .mellin import (
    check_dyadic_sobolev_growth,
    eval_M,
    mellin_decay_check,
    mellin_reconstruct,
    mellin_transform_M,
)

__all__ = [
    "RieszParams",
    "eval_riesz_multiplier",
    "eval_heat_multiplier",
    "eval_h",
    "imaginary_power_multiplier",
    "DyadicPiece",
    "partition_chi",
    "eval_hjr",
    "support_length_check",
    "check_hjr_derivative_norms",
    "check_hhat_tail",
    "eval_M",
    "mellin_transform_M",
    "mellin_reconstruct",
    "mellin_decay_check",
    "check_dyadic_sobolev_growth",
]
