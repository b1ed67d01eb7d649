"""
標本化された動径関数とスペクトル関数

測地半径格子上の動径関数（体積密度込みの求積重み付き）と、
スペクトル格子上の関数（dλ の求積重み付き）を表すデータ型と、その格子生成
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from loguru import logger

from ..errors import ConfigError, DomainError
from ..geometry.space import SpaceParams, density
from ..transforms.quadrature import QuadratureSpec, geometric_breakpoints, oscillation_subdivisions, panel_rule


def _validate_grid(grid: np.ndarray, weights: np.ndarray, values: np.ndarray, label: str) -> None:
    if grid.ndim != 1 or grid.size == 0:
        raise ConfigError(f"{label} grid must be a nonempty 1-D array")
    if np.any(np.diff(grid) <= 0):
        raise ConfigError(f"{label} grid must be strictly increasing")
    if np.any(grid < 0):
        raise ConfigError(f"{label} grid must be nonnegative")
    if weights.shape != grid.shape or values.shape != grid.shape:
        raise ConfigError(f"{label} grid, values and weights must have the same length")
    if np.any(weights < 0):
        raise ConfigError(f"{label} weights must be nonnegative")
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{label} values must be finite")


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    """任意格子に対する台形則の重み"""
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        return np.zeros(grid.shape)
    w = np.zeros(grid.shape)
    dx = np.diff(grid)
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    return w


def gaussian_decay_radius(sp: SpaceParams, t: float, tol: float) -> float:
    """
    e^{-r²/4t} δ(r) が tol を下回る半径

    r²/(4t) - 2ρr ≥ log(1/tol) + 5 を解く。
    """
    level = math.log(1.0 / tol) + 5.0
    return 4.0 * t * sp.rho + math.sqrt(16.0 * t * t * sp.rho ** 2 + 4.0 * t * level)


@dataclass
class RadialFunction:
    """
    測地半径格子上の動径関数

    Attributes
    ----------
    grid : np.ndarray
        単調増加の半径
    values : np.ndarray
        標本値（実数または複素数）
    weights : np.ndarray
        δ(r)dr に整合する求積重み
    lam_resolved : float
        格子が解像できる最大のスペクトル周波数
    """

    grid: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    lam_resolved: float = 0.0

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values)
        self.weights = np.asarray(self.weights, dtype=float)
        _validate_grid(self.grid, self.weights, self.values, "radial")

    @classmethod
    def from_callable(
        cls,
        sp: SpaceParams,
        func: Callable[[np.ndarray], np.ndarray],
        r_max: float,
        quad: Optional[QuadratureSpec] = None,
        lam_max: float = 0.0,
        panels: int = 8,
        scale: float = 1.0,
    ) -> "RadialFunction":
        """
        [0, r_max] のGauss-Legendreパネルで関数を標本化する

        格子の先頭には重み0の r=0 を置く。パネルは周波数 lam_max の振動を解像する。

        Parameters
        ----------
        sp : SpaceParams
            空間
        func : callable
            r の配列を受け取る動径関数
        r_max : float
            打ち切り半径
        quad : QuadratureSpec, optional
            積分設定
        lam_max : float
            解像すべき最大周波数
        panels : int
            振動がない場合の基本パネル数
        scale : float
            関数の変化の長さスケール（パネル幅はこの2分の1以下）
        """
        if r_max <= 0:
            raise ConfigError(f"r_max must be positive, got {r_max}")
        quad = quad or QuadratureSpec()
        panels = max(panels, int(math.ceil(2.0 * r_max / scale)))
        bps = np.linspace(0.0, r_max, panels + 1)
        subdiv = oscillation_subdivisions(np.full(panels, lam_max * r_max / panels), quad)
        nodes, w = panel_rule(bps, quad.order, subdiv)
        grid = np.concatenate([[0.0], nodes])
        weights = np.concatenate([[0.0], w * density(sp, nodes)])
        values = np.asarray(func(grid))
        return cls(grid, values, weights, lam_resolved=lam_max)

    @classmethod
    def on_grid(cls, sp: SpaceParams, grid: Sequence[float], values: Sequence[float]) -> "RadialFunction":
        """任意の格子上の値から作る（台形則の重み）"""
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.asarray(values), trapezoid_weights(grid) * density(sp, grid))

    def integral(self) -> complex:
        """∫ f δ dr"""
        return self.values @ self.weights

    def tail_estimate(self) -> float:
        """末尾1割の区間の |f| δ の寄与の見積もり"""
        r_max = self.grid[-1]
        tail = self.grid >= 0.9 * r_max
        dens = np.abs(self.weights[tail]).sum()
        return float(np.max(np.abs(self.values[tail]), initial=0.0) * dens)

    def scaled(self, factor: complex) -> "RadialFunction":
        return RadialFunction(self.grid, self.values * factor, self.weights, self.lam_resolved)

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        if not np.array_equal(self.grid, other.grid):
            raise ConfigError("radial functions must share a grid to be added")
        return RadialFunction(self.grid, self.values + other.values, self.weights, min(self.lam_resolved, other.lam_resolved))


@dataclass
class SpectralFunction:
    """
    スペクトル格子 [0, Λ_max] 上の関数

    Attributes
    ----------
    grid : np.ndarray
        単調増加の λ
    values : np.ndarray
        標本値
    weights : np.ndarray
        dλ の求積重み
    lam_max : float
        スペクトル打ち切り Λ_max
    r_resolved : float
        格子が解像できる最大の半径（振動 cos(λr), φ_λ(r) の周波数）
    """

    grid: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    lam_max: float
    r_resolved: float = 0.0

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values)
        self.weights = np.asarray(self.weights, dtype=float)
        _validate_grid(self.grid, self.weights, self.values, "spectral")
        if self.grid[-1] > self.lam_max * (1.0 + 1e-12):
            raise ConfigError("spectral grid exceeds lam_max")

    @staticmethod
    def rule(
        lam_max: float,
        quad: Optional[QuadratureSpec] = None,
        r_max: float = 0.0,
        edges: Sequence[float] = (),
        edge_levels: int = 0,
        panels: int = 8,
    ):
        """
        スペクトル側の求積則（節点と重み）

        Parameters
        ----------
        lam_max : float
            打ち切り
        r_max : float
            解像すべき最大半径
        edges : sequence of float
            区分点として必ず含める点（乗数の台の端など）
        edge_levels : int
            各区分点の左側で幾何的に細分する段数
        """
        if lam_max <= 0:
            raise ConfigError(f"lam_max must be positive, got {lam_max}")
        quad = quad or QuadratureSpec()
        base = np.linspace(0.0, lam_max, panels + 1)
        pts = [base]
        prev = 0.0
        for e in sorted(e for e in edges if 0 < e <= lam_max):
            pts.append(geometric_breakpoints(prev, e, edge_levels, toward="right"))
            prev = e
        bps = np.unique(np.concatenate(pts))
        bps = bps[np.concatenate([[True], np.diff(bps) > 1e-14 * lam_max])]
        subdiv = oscillation_subdivisions(np.diff(bps) * max(r_max, 1.0), quad)
        return panel_rule(bps, quad.order, subdiv)

    @classmethod
    def from_callable(
        cls,
        func: Callable[[np.ndarray], np.ndarray],
        lam_max: float,
        quad: Optional[QuadratureSpec] = None,
        r_max: float = 0.0,
        edges: Sequence[float] = (),
        edge_levels: int = 0,
    ) -> "SpectralFunction":
        """関数を求積則の節点で標本化する"""
        nodes, weights = cls.rule(lam_max, quad, r_max, edges, edge_levels)
        return cls(nodes, np.asarray(func(nodes)), weights, lam_max, r_resolved=r_max)

    def scaled(self, factor: complex) -> "SpectralFunction":
        return SpectralFunction(self.grid, self.values * factor, self.weights, self.lam_max, self.r_resolved)

    def multiply(self, func: Callable[[np.ndarray], np.ndarray]) -> "SpectralFunction":
        """同じ格子で各点に関数値を掛ける"""
        return SpectralFunction(self.grid, self.values * func(self.grid), self.weights, self.lam_max, self.r_resolved)


def require_resolution(resolved: float, needed: float, what: str) -> None:
    """格子の解像度不足を警告する"""
    if needed > resolved * (1.0 + 1e-12) and needed > 1.0:
        logger.warning(f"{what}: grid resolves up to {resolved:.4g} but {needed:.4g} is requested")
