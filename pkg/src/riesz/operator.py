"""
Riesz平均作用素

動径関数に対する S_R^z f = 𝓗^{-1}(s_R^z 𝓗f)、R の格子上の最大関数、
臨界指数と収束実験
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from ..data.grids import RadialFunction, SpectralFunction, gaussian_decay_radius
from ..errors import ConfigError
from ..geometry.space import SpaceParams
from ..kernels.heat import heat_kernel, heat_kernel_h3, heat_spectral_cutoff
from ..multipliers.riesz_symbols import RieszParams, eval_riesz_multiplier
from ..reporting.bound_report import ConvergenceReport
from ..special.orders import ComplexOrder
from ..transforms.quadrature import QuadratureSpec
from ..transforms.spherical import InverseTransformPlan, forward_transform


@dataclass
class RadialSample:
    """
    収束実験に使う動径関数

    Attributes
    ----------
    label : str
        識別子
    func : callable
        単調増加の r 配列を受け取り値を返す
    r_max : float
        打ち切り半径
    scale : float
        変化の長さスケール
    spectral_extent : float, optional
        𝓗f が無視できる λ（不明なら None）
    """

    label: str
    func: Callable[[np.ndarray], np.ndarray]
    r_max: float
    scale: float = 1.0
    spectral_extent: Optional[float] = None

    def sample(self, sp: SpaceParams, lam_max: float, quad: QuadratureSpec) -> RadialFunction:
        lam = lam_max if self.spectral_extent is None else min(lam_max, self.spectral_extent)
        return RadialFunction.from_callable(sp, self.func, self.r_max, quad, lam_max=lam, scale=self.scale)


def heat_sample(sp: SpaceParams, t: float, quad: Optional[QuadratureSpec] = None) -> RadialSample:
    """熱核 p_t を試験関数にする（H³ では閉形式）"""
    quad = quad or QuadratureSpec()
    if sp.n == 3:
        def func(r: np.ndarray) -> np.ndarray:
            return heat_kernel_h3(t, r)
    else:
        def func(r: np.ndarray) -> np.ndarray:
            return heat_kernel(sp, t, r, quad).values
    return RadialSample(
        label=f"heat(t={t:g})",
        func=func,
        r_max=gaussian_decay_radius(sp, t, quad.abs_tol),
        scale=math.sqrt(t),
        spectral_extent=heat_spectral_cutoff(sp, t, quad.abs_tol),
    )


def zero_sample(r_max: float = 5.0) -> RadialSample:
    """恒等的に0の試験関数"""
    return RadialSample("zero", lambda r: np.zeros(np.shape(r)), r_max, spectral_extent=1.0)


def critical_index(n: int, p: float) -> float:
    """臨界指数 Z_0(n, p) = (n − 1/2)(2/p − 1)"""
    if not (1.0 <= p <= 2.0):
        raise ConfigError(f"p must lie in [1, 2], got {p}")
    return (n - 0.5) * (2.0 / p - 1.0)


def reference_index(n: int, p: float) -> float:
    """階数1のEuclid型の臨界指数 z_0(n, p) = ((n−1)/2)(2/p − 1)"""
    if not (1.0 <= p <= 2.0):
        raise ConfigError(f"p must lie in [1, 2], got {p}")
    return 0.5 * (n - 1) * (2.0 / p - 1.0)


def _truncated_forward(
    sp: SpaceParams,
    f: RadialFunction,
    nodes: np.ndarray,
    weights: np.ndarray,
    quad: QuadratureSpec,
    extent: Optional[float] = None,
    block: int = 512,
) -> np.ndarray:
    """
    𝓗f を λ の小さい側から塊ごとに計算し、2塊続けて無視できる大きさになったら打ち切る

    extent が与えられればそれより大きい節点は計算しない。

    Returns
    -------
    np.ndarray
        計算した節点ぶんの 𝓗f（残りの節点では0とみなす）
    """
    limit = nodes.size if extent is None else max(1, int(np.searchsorted(nodes, extent, side="right")))
    parts, peak, quiet = [], 0.0, 0
    for start in range(0, limit, block):
        stop = min(start + block, limit)
        spec = forward_transform(sp, f, nodes[start:stop], quad, weights=weights[start:stop], lam_max=float(nodes[-1]))
        parts.append(spec.values)
        block_max = float(np.max(np.abs(spec.values)))
        peak = max(peak, block_max)
        quiet = quiet + 1 if block_max <= quad.rel_tol * peak else 0
        if quiet >= 2:
            break
    hf = np.concatenate(parts)
    logger.debug(f"Spectrum truncated at lambda={nodes[hf.size - 1]:.4g} ({hf.size} of {nodes.size} nodes)")
    return hf


class RieszMeansEngine:
    """
    R の格子全体で共有するスペクトル計算

    すべての √(R−ρ²) を区分点に持つ求積則で 𝓗f を一度だけ求め、
    各 R の S_R^z f は乗数を掛けた和で得る。

    Parameters
    ----------
    sp : SpaceParams
        空間
    f : RadialFunction or RadialSample
        入力関数
    xs : sequence of float
        評価半径（単調増加）
    R_values : sequence of float
        R の値（すべて ρ² より大きい）
    quad : QuadratureSpec, optional
        積分設定
    edge_levels : int
        各区分点の左側の幾何細分の段数
    """

    def __init__(
        self,
        sp: SpaceParams,
        f: Union[RadialFunction, RadialSample],
        xs: Sequence[float],
        R_values: Sequence[float],
        quad: Optional[QuadratureSpec] = None,
        edge_levels: int = 8,
    ):
        self.sp = sp
        self.quad = quad or QuadratureSpec()
        self.xs = np.atleast_1d(np.asarray(xs, dtype=float))
        rho2 = sp.rho ** 2
        R_values = np.asarray(R_values, dtype=float)
        if np.any(R_values <= rho2):
            raise ConfigError(f"R grid must lie in (rho^2, inf) = ({rho2:g}, inf)")
        edges = np.sqrt(R_values - rho2)
        lam_max = float(edges.max())
        extent = None
        if isinstance(f, RadialSample):
            extent = f.spectral_extent
            f = f.sample(sp, lam_max, self.quad)
        r_span = max(float(self.xs.max()), float(f.grid[-1]), 1.0)

        nodes, weights = SpectralFunction.rule(lam_max, self.quad, r_max=r_span, edges=edges, edge_levels=edge_levels)
        self.hf = _truncated_forward(sp, f, nodes, weights, self.quad, extent=extent)
        active = self.hf.size
        self.nodes = nodes[:active]
        self.plan = InverseTransformPlan(sp, self.nodes, weights[:active], self.xs, self.quad)
        logger.debug(f"Riesz means engine: {active} active spectral nodes of {nodes.size}")

    def means(self, z, R: float) -> Tuple[np.ndarray, np.ndarray]:
        """(S_R^z f(xs), 雑音下限)"""
        p = RieszParams(self.sp, R, ComplexOrder.of(z))
        return self.plan.apply(self.hf * eval_riesz_multiplier(p, self.nodes))

    def round_trip(self) -> Tuple[np.ndarray, np.ndarray]:
        """乗数1での 𝓗^{-1}𝓗f(xs)"""
        return self.plan.apply(self.hf)

    def maximal(self, z, R_values: Sequence[float]) -> np.ndarray:
        """max_R |S_R^z f(xs)|"""
        out = np.zeros(self.xs.shape)
        for R in R_values:
            out = np.maximum(out, np.abs(self.means(z, float(R))[0]))
        return out


def apply_riesz_means(
    sp: SpaceParams,
    p: RieszParams,
    f: Union[RadialFunction, RadialSample],
    xs: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
) -> np.ndarray:
    """
    S_R^z f = 𝓗^{-1}(s_R^z · 𝓗f) を標本点で評価する

    Parameters
    ----------
    sp : SpaceParams
        空間
    p : RieszParams
        R と z（R > ρ²）
    f : RadialFunction or RadialSample
        入力関数
    xs : sequence of float
        評価半径（単調増加）

    Returns
    -------
    np.ndarray
        S_R^z f(xs)
    """
    if p.edge == 0.0:
        return np.zeros(np.shape(np.atleast_1d(xs)))
    engine = RieszMeansEngine(sp, f, xs, [p.R], quad)
    return engine.means(p.z, p.R)[0]


def maximal_operator(
    sp: SpaceParams,
    z,
    f: Union[RadialFunction, RadialSample],
    xs: Sequence[float],
    R_grid: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
) -> np.ndarray:
    """R の格子上の最大関数 max_R |S_R^z f|（S_*^z f の下界）"""
    engine = RieszMeansEngine(sp, f, xs, R_grid, quad)
    return engine.maximal(z, R_grid)


def default_R_grid(sp: SpaceParams, points: int = 32, offset_min: float = 1.0, offset_max: float = 1e4) -> np.ndarray:
    """R − ρ² を [offset_min, offset_max] で対数等間隔にとった格子"""
    return sp.rho ** 2 + np.geomspace(offset_min, offset_max, points)


def maximal_grid_stability(
    sp: SpaceParams,
    z,
    f: Union[RadialFunction, RadialSample],
    xs: Sequence[float],
    points: int = 32,
    tolerance: float = 0.02,
    quad: Optional[QuadratureSpec] = None,
    offset_min: float = 1.0,
    offset_max: float = 1e4,
) -> Dict:
    """
    R の格子を倍に細かくしたときの最大関数の変化

    倍の格子（2·points − 1 点）は元の格子を含む。
    """
    coarse_grid = default_R_grid(sp, points, offset_min, offset_max)
    fine_grid = default_R_grid(sp, 2 * points - 1, offset_min, offset_max)
    engine = RieszMeansEngine(sp, f, xs, fine_grid, quad)
    coarse = engine.maximal(z, coarse_grid)
    fine = engine.maximal(z, fine_grid)
    change = float(np.max(np.abs(fine - coarse)) / max(float(np.max(fine)), 1e-300))
    return {"maximal": coarse, "refined": fine, "change": change, "stable": change < tolerance}


def convergence_experiment(
    sp: SpaceParams,
    z,
    f: RadialSample,
    p: float,
    xs: Sequence[float],
    R_grid: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
    final_tolerance: float = 1e-3,
) -> ConvergenceReport:
    """
    S_R^z f → f の収束実験

    標本点上の最大誤差が R とともに（後半で）単調に減少し、最後の誤差が
    往復変換の誤差下限の10倍と final_tolerance の大きい方以下なら "converging"。
    Re z ≤ Z_0(n, p) では合否を主張せず "below-critical-index" とする。

    Parameters
    ----------
    sp : SpaceParams
        空間
    z : ComplexOrder
        Riesz指数
    f : RadialSample
        試験関数
    p : float
        指数 p ∈ [1, 2]
    xs : sequence of float
        標本点（単調増加）
    R_grid : sequence of float
        増加する R の列
    """
    zv = ComplexOrder.of(z)
    z0 = critical_index(sp.n, p)
    R_grid = np.asarray(R_grid, dtype=float)
    if R_grid.size == 0 or np.any(np.diff(R_grid) <= 0):
        raise ConfigError("R grid must be nonempty and strictly increasing")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    logger.info(f"Convergence experiment: n={sp.n}, p={p:g}, z={zv}, f={f.label}, {R_grid.size} values of R")

    engine = RieszMeansEngine(sp, f, xs, R_grid, quad)
    target = np.asarray(f.func(xs), dtype=float)
    point_errors = np.array([np.abs(engine.means(zv, float(R))[0] - target) for R in R_grid])
    sup_errors = point_errors.max(axis=1)
    floor = float(np.max(np.abs(engine.round_trip()[0] - target)))
    maximal = engine.maximal(zv, R_grid)

    steps = [(a, b) for a, b in zip(sup_errors[:-1], sup_errors[1:])]
    ratios = [b / a for a, b in steps if a > 0]
    monotone_ratio = float(max(ratios)) if ratios else 0.0
    tail = steps[len(steps) // 2:]
    decreasing = all(b <= a for a, b in tail)
    final_error = float(sup_errors[-1])

    if zv.re <= z0:
        verdict = "below-critical-index"
    elif decreasing and final_error <= max(10.0 * floor, final_tolerance):
        verdict = "converging"
    else:
        verdict = "not-converging"
    log = logger.info if verdict != "not-converging" else logger.error
    log(f"Convergence verdict: {verdict} (final error {final_error:.3e}, floor {floor:.3e})")

    return ConvergenceReport(
        test_function=f.label,
        p=p,
        z=zv.value,
        R_grid=R_grid,
        sup_errors=sup_errors,
        point_errors=point_errors,
        xs=xs,
        maximal=maximal,
        critical_index=z0,
        monotone_ratio=monotone_ratio,
        final_error=final_error,
        floor=floor,
        verdict=verdict,
    )


def admissible_exponents(n: int, p: float, q: float) -> Dict[str, float]:
    """
    Re z ≥ n − 1/2 での有界性に使える指数の範囲

    1 ≤ p ≤ q′, q > 2 のとき、値域の指数の下端 r ≥ q p′/(p′ − q) と、
    最大作用素の指数の下端 s ≥ pq/(2 − p + pq − q) を返す。p = 1 では p′ = ∞, r_min = q。
    """
    if q <= 2:
        raise ConfigError(f"q must be > 2, got {q}")
    q_dual = q / (q - 1.0)
    if not (1.0 <= p <= q_dual):
        raise ConfigError(f"p must lie in [1, q'] = [1, {q_dual:g}], got {p}")
    if p == 1.0:
        r_min = q
    else:
        p_dual = p / (p - 1.0)
        r_min = math.inf if p_dual <= q else q * p_dual / (p_dual - q)
    s_den = 2.0 - p + p * q - q
    s_min = p * q / s_den if s_den > 0 else math.inf
    return {
        "n": n,
        "p": p,
        "q": q,
        "q_dual": q_dual,
        "z_min": n - 0.5,
        "r_min": r_min,
        "s_min": s_min,
    }


def mellin_budget(n: int, z) -> Dict[str, float]:
    """
    虚数冪の重ね合わせで γ に関する被積分関数の指数

    (1+|γ|)^{−(Re z+1)} (1+|γ|)^{[n/2]+1} の指数 e = −(Re z − [n/2]) と、
    可積分（e < −1、すなわち Re z > [n/2]+1）かどうか
    """
    zv = ComplexOrder.of(z)
    exponent = -(zv.re - n // 2)
    return {"n": n, "z": zv.re, "exponent": exponent, "integrable": exponent < -1.0}
