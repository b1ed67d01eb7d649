"""
スペクトル側の乗数

Riesz乗数 s_R^z、熱乗数 w_t、その比 h_r^z、虚数冪 (λ²+ρ²)^{iγ}
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import ConfigError
from ..geometry.space import SpaceParams
from ..special.orders import ComplexOrder

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class RieszParams:
    """
    Riesz平均のパラメータ

    Attributes
    ----------
    space : SpaceParams
        空間
    R : float
        スペクトル尺度（R ≥ ρ²）
    z : ComplexOrder
        Riesz指数
    """

    space: SpaceParams
    R: float
    z: ComplexOrder

    def __post_init__(self):
        object.__setattr__(self, "z", ComplexOrder.of(self.z))
        rho2 = self.space.rho ** 2
        if not math.isfinite(self.R) or self.R < rho2:
            raise ConfigError(f"R must satisfy R >= rho^2 = {rho2:g}, got {self.R}")

    @classmethod
    def from_offset(cls, sp: SpaceParams, offset: float, z) -> "RieszParams":
        """R = ρ² + offset で作る"""
        return cls(sp, sp.rho ** 2 + offset, ComplexOrder.of(z))

    @property
    def r(self) -> float:
        """r = √R"""
        return math.sqrt(self.R)

    @property
    def edge(self) -> float:
        """乗数の台の端 √(R − ρ²)"""
        return math.sqrt(max(self.R - self.space.rho ** 2, 0.0))

    def with_R(self, R: float) -> "RieszParams":
        return RieszParams(self.space, R, self.z)

    def with_z(self, z) -> "RieszParams":
        return RieszParams(self.space, self.R, ComplexOrder.of(z))


def _scaled_argument(p: RieszParams, lam: ArrayLike) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    return (lam * lam + p.space.rho ** 2) / p.R


def _positive_power(u: np.ndarray, z: complex) -> np.ndarray:
    """(1 − u)₊^z（u ≥ 1 では厳密に0）"""
    out = np.zeros(u.shape, dtype=complex)
    inside = u < 1.0
    out[inside] = np.exp(z * np.log1p(-u[inside]))
    return out


def _finish(values: np.ndarray, lam: ArrayLike, real: bool):
    if real:
        values = values.real
    return values[0] if np.ndim(lam) == 0 else values


def eval_riesz_multiplier(p: RieszParams, lam: ArrayLike) -> ArrayLike:
    """
    Riesz乗数 s_R^z(λ) = (1 − (ρ²+λ²)/R)₊^z

    Parameters
    ----------
    p : RieszParams
        パラメータ
    lam : float or np.ndarray
        スペクトル変数 λ ≥ 0

    Returns
    -------
    complex or np.ndarray
        乗数の値（z が実数なら実数配列）
    """
    u = np.atleast_1d(_scaled_argument(p, lam))
    return _finish(_positive_power(u, p.z.value), lam, p.z.is_real)


def eval_heat_multiplier(sp: SpaceParams, t: float, lam: ArrayLike) -> ArrayLike:
    """熱乗数 w_t(λ) = e^{-t(λ²+ρ²)}"""
    if t <= 0:
        raise ConfigError(f"heat time must be positive, got {t}")
    lam = np.asarray(lam, dtype=float)
    values = np.exp(-t * (lam * lam + sp.rho ** 2))
    return float(values) if np.ndim(lam) == 0 else values


def eval_h(p: RieszParams, lam: ArrayLike) -> ArrayLike:
    """
    h_r^z(ξ) = (1 − (ξ²+ρ²)/r²)₊^z e^{(ξ²+ρ²)/r²}

    s_R^z = h_r^z · w_{1/r²} が各点で成り立つ。
    """
    u = np.atleast_1d(_scaled_argument(p, lam))
    values = _positive_power(u, p.z.value)
    inside = u < 1.0
    values[inside] *= np.exp(u[inside])
    return _finish(values, lam, p.z.is_real)


def imaginary_power_multiplier(sp: SpaceParams, gamma: float, lam: ArrayLike) -> ArrayLike:
    """虚数冪 (λ²+ρ²)^{iγ}（絶対値は常に1）"""
    lam = np.asarray(lam, dtype=float)
    values = np.exp(1j * gamma * np.log(lam * lam + sp.rho ** 2))
    return complex(values) if np.ndim(lam) == 0 else values
