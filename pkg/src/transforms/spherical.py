"""
球フーリエ変換

動径関数の球フーリエ変換 𝓗 とその逆変換、および逆変換定数の較正。
較正定数は次元 n ごとに一度だけ登録される（書き込みは一回限り）。
"""

import threading
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..data.grids import (
    RadialFunction,
    SpectralFunction,
    gaussian_decay_radius,
    require_resolution,
    trapezoid_weights,
)
from ..data.loader import CalibrationStore
from ..errors import CalibrationError, ConfigError, QuadratureError
from ..geometry.space import SpaceParams, plancherel_density, spherical_function_matrix
from .quadrature import QuadratureSpec


_CALIBRATION: Dict[int, float] = {}
_CALIBRATION_LOCK = threading.Lock()


@dataclass(frozen=True)
class CalibrationResult:
    """較正の結果"""

    n: int
    constant: float
    residual: float
    radii: Tuple[float, ...]


def register_calibration(n: int, constant: float) -> float:
    """
    較正定数を登録する

    既に登録済みなら既存の値を返す（最初の書き込みだけが有効）。
    """
    with _CALIBRATION_LOCK:
        return _CALIBRATION.setdefault(int(n), float(constant))


def calibration_constant(sp: SpaceParams) -> float:
    """登録済みの較正定数（未較正なら CalibrationError）"""
    try:
        return _CALIBRATION[sp.n]
    except KeyError:
        raise CalibrationError(f"no calibration for n={sp.n}; run calibrate first") from None


def clear_calibrations() -> None:
    """登録済みの較正定数をすべて破棄する（テスト用）"""
    with _CALIBRATION_LOCK:
        _CALIBRATION.clear()


def _as_increasing(values: Sequence[float], label: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.size > 1 and np.any(np.diff(arr) <= 0):
        raise ConfigError(f"{label} must be strictly increasing")
    if np.any(arr < 0):
        raise ConfigError(f"{label} must be nonnegative")
    return arr


def forward_transform(
    sp: SpaceParams,
    f: RadialFunction,
    lambdas: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
    weights: Optional[np.ndarray] = None,
    lam_max: Optional[float] = None,
    r_resolved: float = 0.0,
) -> SpectralFunction:
    """
    球フーリエ変換 𝓗f(λ) = ∫_0^∞ f(r) φ_λ(r) δ(r) dr

    Parameters
    ----------
    sp : SpaceParams
        空間
    f : RadialFunction
        動径関数（重みは δ(r)dr 込み）
    lambdas : sequence of float
        評価するスペクトル点（単調増加）
    quad : QuadratureSpec, optional
        積分設定
    weights : np.ndarray, optional
        結果の SpectralFunction に持たせる dλ の重み（既定は台形則）
    lam_max : float, optional
        結果のスペクトル打ち切り（既定は lambdas の最大値）
    r_resolved : float
        lambdas の求積則が解像できる最大半径

    Returns
    -------
    SpectralFunction
        𝓗f の標本値

    Raises
    ------
    QuadratureError
        打ち切り半径での裾の見積もりが許容値を超える場合
    """
    quad = quad or QuadratureSpec()
    lams = _as_increasing(lambdas, "lambdas")

    total = float(np.abs(f.values) @ f.weights)
    tail = f.tail_estimate()
    if tail > max(quad.abs_tol, quad.rel_tol * total):
        raise QuadratureError(
            f"radial function does not decay by r_max={f.grid[-1]:.4g} (tail estimate {tail:.3e})"
        )
    require_resolution(f.lam_resolved, float(lams[-1]), "forward transform")

    phi = spherical_function_matrix(sp, lams, f.grid, quad)
    values = phi @ (f.values * f.weights)
    w = trapezoid_weights(lams) if weights is None else np.asarray(weights, dtype=float)
    return SpectralFunction(lams, values, w, float(lams[-1]) if lam_max is None else lam_max, r_resolved=r_resolved)


class InverseTransformPlan:
    """
    スペクトル求積則と半径格子を固定した逆変換

    球関数の行列を一度だけ計算し、同じ則の上の複数の乗数に使い回す。
    """

    def __init__(
        self,
        sp: SpaceParams,
        nodes: np.ndarray,
        weights: np.ndarray,
        rs: Sequence[float],
        quad: Optional[QuadratureSpec] = None,
        constant: Optional[float] = None,
    ):
        self.quad = quad or QuadratureSpec()
        self.nodes = np.asarray(nodes, dtype=float)
        self.rs = np.atleast_1d(np.asarray(rs, dtype=float))
        self.constant = calibration_constant(sp) if constant is None else constant
        self.spectral_weights = np.asarray(weights, dtype=float) * plancherel_density(sp, self.nodes)
        self.phi = spherical_function_matrix(sp, self.nodes, self.rs, self.quad)

    def apply(self, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """節点での乗数値から (逆変換の値, 雑音下限) を返す"""
        spectral = np.asarray(values) * self.spectral_weights
        c = self.constant
        out = c * (spectral @ self.phi)
        floor = self.quad.noise_factor * abs(c) * (np.abs(spectral) @ np.abs(self.phi)) + self.quad.abs_tol
        return out, floor


def inverse_transform_values(
    sp: SpaceParams,
    m: SpectralFunction,
    rs: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
    constant: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    逆変換の値と、振動相殺による雑音下限を返す

    Returns
    -------
    tuple of np.ndarray
        (値, 雑音下限)。下限は C Σ |m φ_λ(r) |c(λ)|^{-2}| w に比例する
    """
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    require_resolution(m.r_resolved, float(np.max(rs, initial=0.0)), "inverse transform")
    return InverseTransformPlan(sp, m.grid, m.weights, rs, quad, constant).apply(m.values)


def inverse_transform(
    sp: SpaceParams,
    m: SpectralFunction,
    rs: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
    constant: Optional[float] = None,
) -> RadialFunction:
    """
    逆球フーリエ変換 (𝓗^{-1}m)(r) = C ∫_0^{Λ_max} m(λ) φ_λ(r) |c(λ)|^{-2} dλ

    Parameters
    ----------
    sp : SpaceParams
        空間
    m : SpectralFunction
        スペクトル関数（[0, Λ_max] の外では0とみなす）
    rs : sequence of float
        評価半径（単調増加）
    quad : QuadratureSpec, optional
        積分設定
    constant : float, optional
        較正定数（既定は登録済みの値）

    Returns
    -------
    RadialFunction
        逆変換の標本値

    Raises
    ------
    CalibrationError
        次元 n の較正が未実行の場合
    """
    rs = _as_increasing(rs, "radii")
    values, _ = inverse_transform_values(sp, m, rs, quad, constant)
    return RadialFunction.on_grid(sp, rs, values)


def calibrate(
    sp: SpaceParams,
    quad: Optional[QuadratureSpec] = None,
    heat_time: float = 1.0,
    radii: Sequence[float] = (0.0, 0.5, 1.0, 2.0),
    tolerance: float = 1e-6,
    register: bool = True,
) -> CalibrationResult:
    """
    逆変換定数 C を往復変換で決める

    試験関数 g(r) = e^{-r²/4t} を順変換・逆変換し、指定半径での値が
    最小二乗の意味で g に一致するように C を選ぶ。

    Parameters
    ----------
    sp : SpaceParams
        空間
    quad : QuadratureSpec, optional
        積分設定
    heat_time : float
        試験関数の時間パラメータ t
    radii : sequence of float
        往復誤差を測る半径
    tolerance : float
        許容する相対残差
    register : bool
        結果を登録するかどうか

    Returns
    -------
    CalibrationResult
        定数と残差

    Raises
    ------
    CalibrationError
        残差が許容値を超える場合
    """
    quad = quad or QuadratureSpec()
    radii = _as_increasing(radii, "calibration radii")
    logger.info(f"Calibrating inverse transform for n={sp.n}")

    t = heat_time
    r_max = gaussian_decay_radius(sp, t, quad.abs_tol)
    lam_max = np.sqrt(np.log(1.0 / quad.abs_tol) / t) + 3.0

    def profile(r: np.ndarray) -> np.ndarray:
        return np.exp(-r * r / (4.0 * t))

    g = RadialFunction.from_callable(sp, profile, r_max, quad, lam_max=lam_max, scale=np.sqrt(t))
    nodes, weights = SpectralFunction.rule(lam_max, quad, r_max=float(radii[-1]))
    spectrum = forward_transform(sp, g, nodes, quad, weights=weights, lam_max=lam_max, r_resolved=float(radii[-1]))

    raw, _ = inverse_transform_values(sp, spectrum, radii, quad, constant=1.0)
    target = profile(radii)
    constant = float(np.dot(target, raw) / np.dot(raw, raw))
    residual = float(np.max(np.abs(constant * raw - target)) / np.max(np.abs(target)))
    logger.debug(f"Calibration n={sp.n}: C={constant:.15g}, residual={residual:.3e}")

    if not np.isfinite(constant) or residual > tolerance:
        raise CalibrationError(
            f"calibration round-trip residual {residual:.3e} exceeds {tolerance:.1e} for n={sp.n}"
        )
    if register:
        constant = register_calibration(sp.n, constant)
    logger.info(f"Calibration for n={sp.n} finished: C={constant:.12g}, residual={residual:.2e}")
    return CalibrationResult(sp.n, constant, residual, tuple(float(r) for r in radii))


def ensure_calibrated(
    sp: SpaceParams,
    quad: Optional[QuadratureSpec] = None,
    store: Optional[CalibrationStore] = None,
    **kwargs,
) -> float:
    """
    較正定数を用意する

    登録済みならそれを、ストアに有効な値があればそれを登録して使い、
    どちらもなければ較正を実行してストアに保存する。
    """
    if sp.n in _CALIBRATION:
        return _CALIBRATION[sp.n]
    if store is not None:
        entry = store.get(sp.n)
        if entry is not None:
            logger.debug(f"Using stored calibration for n={sp.n}")
            return register_calibration(sp.n, entry["constant"])
    result = calibrate(sp, quad, **kwargs)
    if store is not None:
        store.put(sp.n, result.constant, result.residual)
    return result.constant
