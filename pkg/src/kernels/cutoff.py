"""
核の局所部分と無限遠部分への分解
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from ..data.grids import RadialFunction
from ..errors import ConfigError
from ..multipliers.partition import psi

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class CutoffZeta:
    """
    滑らかな切断関数 ζ

    r ≤ inner で1、r ≥ outer で0。ψ 型の山の商
    ζ(r) = B(outer−r)/(B(outer−r)+B(r−inner)) で作る。
    """

    inner: float = 0.5
    outer: float = 1.0

    def __post_init__(self):
        if not (0 < self.inner < self.outer):
            raise ConfigError(f"cutoff radii must satisfy 0 < inner < outer, got {self.inner}, {self.outer}")

    def __call__(self, r: ArrayLike) -> ArrayLike:
        r = np.asarray(r, dtype=float)
        scale = self.outer - self.inner
        left = psi((self.outer - r) / scale)
        right = psi((r - self.inner) / scale)
        values = left / (left + right)
        return float(values) if np.ndim(r) == 0 else values


@dataclass
class KernelProfile:
    """
    物理側の動径核

    Attributes
    ----------
    label : str
        核の名前（"riesz", "heat", "riesz-local" など）
    profile : RadialFunction
        半径格子上の値
    provenance : str
        "inverse-spherical" / "closed-form" / "split"
    params : dict
        R, z, t などのパラメータ
    floor : np.ndarray, optional
        各点の振動相殺による雑音下限
    """

    label: str
    profile: RadialFunction
    provenance: str
    params: Dict[str, Any] = field(default_factory=dict)
    floor: Optional[np.ndarray] = None

    @property
    def rs(self) -> np.ndarray:
        return self.profile.grid

    @property
    def values(self) -> np.ndarray:
        return self.profile.values

    def resolved(self, factor: float = 10.0) -> np.ndarray:
        """雑音下限の factor 倍を超える点のマスク"""
        if self.floor is None:
            return np.ones(self.values.shape, dtype=bool)
        return np.abs(self.values) > factor * self.floor


def split_kernel(k: KernelProfile, zeta: Optional[CutoffZeta] = None) -> Tuple[KernelProfile, KernelProfile]:
    """
    κ = ζκ + (1−ζ)κ に分解する

    Returns
    -------
    tuple of KernelProfile
        (局所部分, 無限遠部分)
    """
    zeta = zeta or CutoffZeta()
    cut = zeta(k.rs)
    prof = k.profile
    local_values = cut * prof.values
    # 和が元の値に一致するよう差で作る
    infinity_values = prof.values - local_values
    local = RadialFunction(prof.grid, local_values, prof.weights, prof.lam_resolved)
    infinity = RadialFunction(prof.grid, infinity_values, prof.weights, prof.lam_resolved)
    params = dict(k.params, inner=zeta.inner, outer=zeta.outer)
    return (
        KernelProfile(f"{k.label}-local", local, "split", params, k.floor),
        KernelProfile(f"{k.label}-infinity", infinity, "split", params, k.floor),
    )
