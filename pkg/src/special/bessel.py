"""
第1種Bessel関数

実数次数 ν ≥ -1/2 の J_ν(t)、正規化核 𝒥_ν(t) = t^{-ν} J_ν(t) とその高階微分、
および減衰包絡 |𝒥_ν(t)| t^{ν+1/2} の有界性チェック

評価領域:
- |t| ≤ 8   : べき級数（t² の級数なので t について偶）
- 8 < t ≤ 30: Miller 後退漸化式（Neumann 和で正規化）
- t > 30    : Hankel 漸近展開
"""

import math
from collections import defaultdict
from functools import lru_cache
from typing import Dict, Tuple, Union

import numpy as np
from loguru import logger

from ..errors import DomainError
from ..reporting.bound_report import BoundReport, stability_report


SERIES_LIMIT = 8.0
ASYMPTOTIC_SWITCH = 30.0
MAX_DERIVATIVE_DEPTH = 6

ArrayLike = Union[float, np.ndarray]


def _check_order(nu: float) -> float:
    nu = float(nu)
    if not math.isfinite(nu) or nu < -0.5:
        raise DomainError(f"Bessel order must be finite and >= -1/2, got {nu}")
    return nu


def _series(nu: float, t: np.ndarray) -> np.ndarray:
    """𝒥_ν(t) のべき級数"""
    x = 0.25 * t * t
    term = np.full(t.shape, 1.0 / (2.0 ** nu * math.gamma(nu + 1.0)))
    total = term.copy()
    for k in range(1, 400):
        term = term * (-x) / (k * (k + nu))
        total = total + term
        if k > np.max(x, initial=0.0) and np.all(np.abs(term) <= 1e-17 * (np.abs(total) + 1e-300)):
            break
    return total


def _miller(nu: float, t: np.ndarray) -> np.ndarray:
    """𝒥_ν(t) を後退漸化式で求める（t > 0）"""
    n_start = int(2 * math.ceil((np.max(t) + 40.0) / 2.0))

    coeffs = np.empty(n_start // 2 + 1)
    coeffs[0] = math.gamma(nu + 1.0)
    for m in range(1, coeffs.size):
        coeffs[m] = (nu + 2 * m) * math.exp(math.lgamma(nu + m) - math.lgamma(m + 1.0))

    j_next = np.zeros_like(t)
    j_curr = np.full(t.shape, 1e-30)
    norm = coeffs[n_start // 2] * j_curr
    for k in range(n_start, 0, -1):
        j_prev = (2.0 * (nu + k) / t) * j_curr - j_next
        j_next, j_curr = j_curr, j_prev
        if (k - 1) % 2 == 0:
            norm = norm + coeffs[(k - 1) // 2] * j_curr
        big = np.abs(j_curr) > 1e200
        if np.any(big):
            j_curr = np.where(big, j_curr * 1e-200, j_curr)
            j_next = np.where(big, j_next * 1e-200, j_next)
            norm = np.where(big, norm * 1e-200, norm)

    # Σ c_m J_{ν+2m}(t) = (t/2)^ν より 𝒥_ν = J̃_ν 2^{-ν} / Σ c_m J̃_{ν+2m}
    return j_curr / (2.0 ** nu * norm)


def _hankel_asymptotic(nu: float, t: np.ndarray) -> np.ndarray:
    """J_ν(t) の漸近展開（大きな t）"""
    mu = 4.0 * nu * nu
    p_sum = np.ones_like(t)
    q_sum = np.zeros_like(t)
    term = np.ones_like(t)
    prev_mag = np.full(t.shape, np.inf)
    active = np.ones(t.shape, dtype=bool)
    for k in range(1, 200):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * t)
        mag = np.abs(term)
        # 項が増え始めたら打ち切る（漸近級数）
        active &= mag < prev_mag
        contrib = np.where(active, term, 0.0)
        if k % 2 == 1:
            q_sum = q_sum + (-1) ** ((k - 1) // 2) * contrib
        else:
            p_sum = p_sum + (-1) ** (k // 2) * contrib
        prev_mag = mag
        if not np.any(active & (mag > 1e-17)):
            break
    omega = t - (0.5 * nu + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * t)) * (p_sum * np.cos(omega) - q_sum * np.sin(omega))


def _script_j_abs(nu: float, t: np.ndarray, asymptotic: bool = True) -> np.ndarray:
    out = np.empty(t.shape)
    small = t <= SERIES_LIMIT
    large = t > ASYMPTOTIC_SWITCH if asymptotic else np.zeros(t.shape, dtype=bool)
    middle = ~small & ~large
    if np.any(small):
        out[small] = _series(nu, t[small])
    if np.any(middle):
        out[middle] = _miller(nu, t[middle])
    if np.any(large):
        out[large] = _hankel_asymptotic(nu, t[large]) / t[large] ** nu
    return out


def script_j(nu: float, t: ArrayLike) -> ArrayLike:
    """
    正規化Bessel核 𝒥_ν(t) = t^{-ν} J_ν(t)

    Parameters
    ----------
    nu : float
        次数（ν ≥ -1/2）
    t : float or np.ndarray
        引数。負の t は偶関数として |t| で評価する

    Returns
    -------
    float or np.ndarray
        𝒥_ν(t)。t=0 では 1/(2^ν Γ(ν+1))
    """
    nu = _check_order(nu)
    scalar = np.ndim(t) == 0
    ta = np.abs(np.atleast_1d(np.asarray(t, dtype=float)))
    out = _script_j_abs(nu, ta)
    return float(out[0]) if scalar else out


def bessel_j(nu: float, t: ArrayLike) -> ArrayLike:
    """
    第1種Bessel関数 J_ν(t)

    Parameters
    ----------
    nu : float
        次数（ν ≥ -1/2）
    t : float or np.ndarray
        引数（t ≥ 0）

    Returns
    -------
    float or np.ndarray
        J_ν(t)
    """
    nu = _check_order(nu)
    scalar = np.ndim(t) == 0
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ta < 0):
        raise DomainError("bessel_j requires t >= 0")

    out = np.empty(ta.shape)
    large = ta > ASYMPTOTIC_SWITCH
    if np.any(large):
        out[large] = _hankel_asymptotic(nu, ta[large])
    rest = ~large
    if np.any(rest):
        with np.errstate(divide="ignore", invalid="ignore"):
            powers = np.where(ta[rest] > 0, ta[rest] ** nu, 0.0 if nu > 0 else np.inf)
        values = _script_j_abs(nu, ta[rest]) * powers
        if nu == 0:
            values = np.where(ta[rest] == 0, 1.0, values)
        out[rest] = values
    return float(out[0]) if scalar else out


def bessel_j_regimes(nu: float, t: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    切替点付近の一致確認用に、漸化式と漸近展開の両方で J_ν を返す

    Returns
    -------
    tuple of np.ndarray
        (漸化式による値, 漸近展開による値)
    """
    nu = _check_order(nu)
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    recurrence = _miller(nu, ta) * ta ** nu
    asymptotic = _hankel_asymptotic(nu, ta)
    return recurrence, asymptotic


@lru_cache(maxsize=None)
def derivative_terms(a: int) -> Tuple[Tuple[int, int, int], ...]:
    """
    𝒥_ν の a 階微分を Σ c · t^p · 𝒥_{ν+s}(t) の形に展開した項

    𝒥'_μ(t) = -t 𝒥_{μ+1}(t) を記号的に反復して求める。

    Returns
    -------
    tuple of (c, p, s)
        整数係数・べき・次数シフト（p = 2s - a）
    """
    if a < 0 or a > MAX_DERIVATIVE_DEPTH:
        raise DomainError(f"derivative depth must be in [0, {MAX_DERIVATIVE_DEPTH}], got {a}")
    terms: Dict[Tuple[int, int], int] = {(0, 0): 1}
    for _ in range(a):
        nxt: Dict[Tuple[int, int], int] = defaultdict(int)
        for (p, s), c in terms.items():
            if p:
                nxt[(p - 1, s)] += c * p
            nxt[(p + 1, s + 1)] -= c
        terms = {k: v for k, v in nxt.items() if v}
    return tuple(sorted((c, p, s) for (p, s), c in terms.items()))


def derivative_coefficients(a: int) -> Dict[int, int]:
    """
    補正和の定数 c_j^a（j = 1..[a/2]）

    先頭項 (-1)^a t^a 𝒥_{ν+a} は j = 0 として含める。
    """
    return {a - s: c for c, p, s in derivative_terms(a)}


def script_j_derivative(nu: float, a: int, t: ArrayLike) -> ArrayLike:
    """
    𝒥_ν の a 階微分

    Parameters
    ----------
    nu : float
        次数
    a : int
        微分階数（0 ≤ a ≤ 6）
    t : float or np.ndarray
        引数（t > 0）

    Returns
    -------
    float or np.ndarray
        𝒥_ν^{(a)}(t)
    """
    nu = _check_order(nu)
    scalar = np.ndim(t) == 0
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    total = np.zeros(ta.shape)
    for c, p, s in derivative_terms(int(a)):
        total = total + c * ta ** p * script_j(nu + s, ta)
    return float(total[0]) if scalar else total


def _log_grid(t_min: float, t_max: float, points_per_period: int) -> np.ndarray:
    # 高い t 側で1周期あたり points_per_period 点
    count = int(math.ceil(points_per_period * math.log(t_max / t_min) * t_max / (2.0 * math.pi)))
    count = max(count, 64)
    return np.geomspace(t_min, t_max, count)


def _envelope_sup(nu: float, t_min: float, t_max: float, points_per_period: int) -> Tuple[float, np.ndarray, np.ndarray]:
    t = _log_grid(t_min, t_max, points_per_period)
    ratio = np.abs(script_j(nu, t)) * t ** (nu + 0.5)
    return float(np.max(ratio)), t, ratio


def script_j_decay_check(
    nu: float,
    t_min: float,
    t_max: float,
    growth_tolerance: float = 0.05,
    points_per_period: int = 64,
) -> BoundReport:
    """
    |𝒥_ν(t)| t^{ν+1/2} の上限が有限で、t_max を倍にしても安定かを調べる

    Parameters
    ----------
    nu : float
        次数
    t_min, t_max : float
        対数格子の範囲（0 < t_min < t_max）
    growth_tolerance : float
        許容する相対増加率

    Returns
    -------
    BoundReport
        測定された定数 c_ν と判定
    """
    nu = _check_order(nu)
    if not (0 < t_min < t_max):
        raise DomainError(f"decay window must satisfy 0 < t_min < t_max, got [{t_min}, {t_max}]")
    logger.info(f"Bessel envelope check: nu={nu}, window=[{t_min}, {t_max}]")

    coarse, t, ratio = _envelope_sup(nu, t_min, t_max, points_per_period)
    fine, _, _ = _envelope_sup(nu, t_min, 2.0 * t_max, points_per_period)
    stride = max(1, t.size // 200)
    rows = [{"t": float(tt), "ratio": float(rr)} for tt, rr in zip(t[::stride], ratio[::stride])]
    return stability_report(
        name="bessel-envelope",
        coarse_sup=coarse,
        fine_sup=fine,
        growth_tolerance=growth_tolerance,
        rows=rows,
        details={"nu": nu, "t_min": t_min, "t_max": t_max},
    )
