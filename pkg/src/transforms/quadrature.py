"""
数値積分モジュール

Gauss-Legendreパネル則と、振動する被積分関数のためのパネル分割、
およびパネル倍加による適応積分を提供する
"""

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from loguru import logger

from ..errors import ConfigError, QuadratureError


@dataclass(frozen=True)
class QuadratureSpec:
    """
    積分の許容誤差と分割予算

    Attributes
    ----------
    rel_tol : float
        目標相対誤差
    abs_tol : float
        絶対誤差の下限
    max_panels : int
        パネル数の上限
    osc_points_per_period : int
        振動1周期あたりの最小節点数（8以上）
    order : int
        パネル内のGauss-Legendre節点数
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_panels: int = 20000
    osc_points_per_period: int = 8
    order: int = 16

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError(f"rel_tol and abs_tol must be positive: {self.rel_tol}, {self.abs_tol}")
        if self.osc_points_per_period < 8:
            raise ConfigError(f"osc_points_per_period must be >= 8, got {self.osc_points_per_period}")
        if self.order < 2 or self.max_panels < 1:
            raise ConfigError(f"invalid panel settings: order={self.order}, max_panels={self.max_panels}")

    @classmethod
    def from_config(cls, config: Optional[Dict] = None) -> "QuadratureSpec":
        """設定辞書の quadrature セクションから生成する"""
        if config is None:
            from ..data.loader import load_defaults
            config = load_defaults()
        section = config.get("quadrature", {})
        fields = {k: section[k] for k in ("rel_tol", "abs_tol", "max_panels", "osc_points_per_period", "order") if k in section}
        return cls(**fields)

    def with_tolerances(self, rel_tol: Optional[float] = None, abs_tol: Optional[float] = None) -> "QuadratureSpec":
        """許容誤差だけを差し替えた写しを返す"""
        return replace(
            self,
            rel_tol=self.rel_tol if rel_tol is None else rel_tol,
            abs_tol=self.abs_tol if abs_tol is None else abs_tol,
        )

    @property
    def noise_factor(self) -> float:
        """相殺下限（絶対値積分に対する比）"""
        return max(self.rel_tol, 1e3 * np.finfo(float).eps)


@dataclass
class QuadratureResult:
    """適応積分の結果"""

    value: np.ndarray
    abs_value: np.ndarray
    n_nodes: int
    n_panels: int
    nodes: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    def noise_floor(self, spec: QuadratureSpec) -> np.ndarray:
        """振動相殺で失われる桁を考慮した絶対的な雑音下限"""
        return spec.noise_factor * self.abs_value + spec.abs_tol


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """[-1, 1] 上のGauss-Legendre節点と重み（読み取り専用）"""
    x, w = leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(
    breakpoints: Sequence[float],
    order: int,
    subdivisions: Optional[Sequence[int]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    区分点で区切ったパネルを等分割し、合成Gauss-Legendre則を作る

    Parameters
    ----------
    breakpoints : sequence of float
        単調増加の区分点
    order : int
        パネル内節点数
    subdivisions : sequence of int, optional
        各区間の等分割数

    Returns
    -------
    tuple of np.ndarray
        (節点, 重み)
    """
    b = np.asarray(breakpoints, dtype=float)
    if b.ndim != 1 or b.size < 2 or np.any(np.diff(b) <= 0):
        raise ConfigError("breakpoints must be strictly increasing with at least two entries")
    if subdivisions is None:
        subdivisions = np.ones(b.size - 1, dtype=int)

    pieces = [np.linspace(b[i], b[i + 1], int(s) + 1)[:-1] for i, s in enumerate(subdivisions)]
    edges = np.concatenate(pieces + [b[-1:]])

    x, w = gauss_legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def oscillation_subdivisions(phase_span: np.ndarray, spec: QuadratureSpec) -> np.ndarray:
    """
    位相変化量から各区間の分割数を決める

    1周期あたり osc_points_per_period 点以上の節点が入るように分割する
    """
    periods = np.abs(np.asarray(phase_span, dtype=float)) / (2.0 * np.pi)
    counts = np.ceil(periods * spec.osc_points_per_period / spec.order)
    return np.maximum(counts, 1).astype(int)


def geometric_breakpoints(a: float, b: float, levels: int, toward: str = "right") -> np.ndarray:
    """
    端点に向かって幾何的に細かくなる区分点

    Parameters
    ----------
    a, b : float
        区間
    levels : int
        細分の段数（幅が半分ずつになる）
    toward : {"right", "left"}
        細かくする側の端点
    """
    if levels <= 0:
        return np.array([a, b])
    fractions = 1.0 - 2.0 ** -np.arange(1, levels + 1, dtype=float)
    if toward == "right":
        inner = a + (b - a) * fractions
        return np.concatenate([[a], inner, [b]])
    inner = b - (b - a) * fractions
    return np.concatenate([[a], inner[::-1], [b]])


def integrate(
    func: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    spec: QuadratureSpec,
    phase_span: Optional[np.ndarray] = None,
) -> QuadratureResult:
    """
    パネル倍加による適応Gauss-Legendre積分

    func は節点配列 (N,) を受け取り、形 (..., N) の値を返すベクトル化関数。
    連続する2段の結果が要素ごとに許容誤差内に入るまで全パネルを倍加する。

    Parameters
    ----------
    func : callable
        被積分関数
    breakpoints : sequence of float
        区分点（特異点・ピーク位置を含める）
    spec : QuadratureSpec
        許容誤差と予算
    phase_span : np.ndarray, optional
        各区間での振動位相の変化量（ラジアン）

    Returns
    -------
    QuadratureResult
        積分値、絶対値積分、節点数

    Raises
    ------
    QuadratureError
        予算内で収束しない場合
    """
    b = np.asarray(breakpoints, dtype=float)
    if phase_span is None:
        subdiv = np.ones(b.size - 1, dtype=int)
    else:
        subdiv = oscillation_subdivisions(phase_span, spec)

    previous = None
    while True:
        n_panels = int(subdiv.sum())
        if n_panels > spec.max_panels:
            raise QuadratureError(
                f"quadrature did not converge within {spec.max_panels} panels "
                f"on [{b[0]:.6g}, {b[-1]:.6g}]"
            )
        nodes, weights = panel_rule(b, spec.order, subdiv)
        values = np.asarray(func(nodes))
        estimate = values @ weights
        abs_estimate = np.abs(values) @ weights

        if previous is not None:
            diff = np.abs(estimate - previous)
            scale = np.maximum(spec.rel_tol * np.abs(estimate), spec.noise_factor * abs_estimate)
            if np.all(diff <= np.maximum(scale, spec.abs_tol)):
                logger.debug(f"Quadrature converged with {n_panels} panels ({nodes.size} nodes)")
                return QuadratureResult(estimate, abs_estimate, nodes.size, n_panels, nodes, weights)
        previous = estimate
        subdiv = subdiv * 2
