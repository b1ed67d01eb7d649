"""
階数1の対称空間モデル

実双曲空間 H^n の測地極座標での体積密度・球体積・球関数・Plancherel密度と、
それらに関する評価式（φ_0 の上界、密度の指数増大、小球の体積）の検証
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from loguru import logger
from tqdm import tqdm

from ..errors import ConfigError, DomainError
from ..reporting.bound_report import BoundReport, stability_report
from ..special.gamma import log_abs_gamma
from ..transforms.quadrature import QuadratureSpec, integrate


SPECTRAL_WINDOW = 1.0e4

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class SpaceParams:
    """
    実双曲空間 H^n のパラメータ

    Attributes
    ----------
    n : int
        次元（2以上）
    """

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError(f"dimension n must be an integer >= 2, got {self.n}")

    @property
    def l(self) -> int:
        """階数（常に1）"""
        return 1

    @property
    def d(self) -> int:
        """正の不可約ルートの個数"""
        return 1

    @property
    def m_alpha(self) -> int:
        return self.n - 1

    @property
    def m_2alpha(self) -> int:
        return 0

    @property
    def rho(self) -> float:
        """ρ = (m_α + 2 m_2α) / 2 = (n-1)/2"""
        return 0.5 * (self.m_alpha + 2 * self.m_2alpha)

    @property
    def sphere_area(self) -> float:
        """Euclid単位球面 S^{n-1} の面積 ω_{n-1}"""
        return 2.0 * math.pi ** (self.n / 2.0) / math.gamma(self.n / 2.0)

    @property
    def half_dimension_floor(self) -> int:
        """[n/2]"""
        return self.n // 2


def density(sp: SpaceParams, r: ArrayLike) -> ArrayLike:
    """
    体積密度 δ(r) = ω_{n-1} (sinh r)^{n-1}

    Parameters
    ----------
    sp : SpaceParams
        空間
    r : float or np.ndarray
        測地半径（r ≥ 0）
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise DomainError("radius must be nonnegative")
    values = sp.sphere_area * np.sinh(r_arr) ** (sp.n - 1)
    return float(values) if np.ndim(r) == 0 else values


def ball_volume(sp: SpaceParams, r: float, quad: Optional[QuadratureSpec] = None) -> float:
    """
    測地球の体積 ∫_0^r δ(s) ds

    Parameters
    ----------
    sp : SpaceParams
        空間
    r : float
        半径
    quad : QuadratureSpec, optional
        積分設定
    """
    if r < 0:
        raise DomainError("radius must be nonnegative")
    if r == 0:
        return 0.0
    quad = quad or QuadratureSpec()
    result = integrate(lambda s: density(sp, s), [0.0, r], quad)
    return float(result.value)


def _theta_breakpoints(r: float) -> np.ndarray:
    # 被積分関数は θ ≈ 2e^{-r} の幅で θ = 0 に集中する
    if r < 1.0:
        return np.array([0.0, 0.5 * np.pi, np.pi])
    peak = 2.0 * math.exp(-r)
    pts = peak * 2.0 ** np.arange(-2, 80, dtype=float)
    pts = pts[pts < 0.75 * np.pi]
    return np.concatenate([[0.0], pts, [np.pi]])


def _log_base(r: float, theta: np.ndarray) -> np.ndarray:
    """log(cosh r - sinh r cos θ) を桁落ちなく評価する"""
    with np.errstate(divide="ignore"):
        return np.logaddexp(
            -r + 2.0 * np.log(np.cos(0.5 * theta)),
            r + 2.0 * np.log(np.sin(0.5 * theta)),
        )


def _spherical_normalizer(n: int) -> float:
    return math.gamma(n / 2.0) / (math.sqrt(math.pi) * math.gamma((n - 1) / 2.0))


def _spherical_row(sp: SpaceParams, lams: np.ndarray, r: float, quad: QuadratureSpec, chunk: int = 256) -> np.ndarray:
    """固定した r で φ_λ(r) を λ の配列について求める"""
    if r == 0:
        return np.ones(lams.shape)

    c_n = _spherical_normalizer(sp.n)
    bps = _theta_breakpoints(r)
    lam_max = float(np.max(np.abs(lams), initial=0.0))
    phase = lam_max * np.abs(np.diff(_log_base(r, bps)))
    test_lams = np.unique([0.0, 0.5 * lam_max, lam_max])

    def weight(theta: np.ndarray) -> np.ndarray:
        return c_n * np.sin(theta) ** (sp.n - 2) * np.exp(-sp.rho * _log_base(r, theta))

    def integrand(theta: np.ndarray) -> np.ndarray:
        return np.cos(np.outer(test_lams, _log_base(r, theta))) * weight(theta)[None, :]

    # 最高周波数で収束した規則を全 λ に使う
    rule = integrate(integrand, bps, quad, phase_span=phase)
    nodes, weights = rule.nodes, rule.weights
    base = _log_base(r, nodes)
    w = weights * weight(nodes)

    out = np.empty(lams.shape)
    for start in range(0, lams.size, chunk):
        block = lams[start:start + chunk]
        out[start:start + chunk] = np.cos(np.outer(block, base)) @ w
    return out


def spherical_function_matrix(
    sp: SpaceParams,
    lams: Sequence[float],
    rs: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
) -> np.ndarray:
    """
    球関数 φ_λ(r) を (λ, r) の格子で評価する

    Harish-Chandra積分表示
    φ_λ(r) = c_n ∫_0^π (cosh r - sinh r cos θ)^{-(ρ+iλ)} sin^{n-2}θ dθ
    の実部を適応パネル積分で求める。λ は負でもよい（Weyl対称性の確認用）。

    Parameters
    ----------
    sp : SpaceParams
        空間
    lams : sequence of float
        スペクトル変数
    rs : sequence of float
        測地半径（r ≥ 0）
    quad : QuadratureSpec, optional
        積分設定

    Returns
    -------
    np.ndarray
        形 (len(lams), len(rs)) の値
    """
    quad = quad or QuadratureSpec()
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    if np.any(rs < 0):
        raise DomainError("radius must be nonnegative")

    out = np.empty((lams.size, rs.size))
    for i, r in enumerate(tqdm(rs, desc="spherical functions", disable=rs.size < 200, leave=False)):
        out[:, i] = _spherical_row(sp, lams, float(r), quad)
    return out


def spherical_function(sp: SpaceParams, lam: float, r: float, quad: Optional[QuadratureSpec] = None) -> float:
    """
    球関数 φ_λ(r)

    H^3 では sin(λr)/(λ sinh r) に一致する。
    """
    return float(spherical_function_matrix(sp, [lam], [r], quad)[0, 0])


def plancherel_density(sp: SpaceParams, lam: ArrayLike) -> ArrayLike:
    """
    Plancherel密度 |c(λ)|^{-2}（全体定数を除く）

    階数1のGindikin-Karpelevich公式から
    |c(λ)|^{-2} ∝ |Γ(iλ + ρ) / Γ(iλ)|^2 （m_2α = 0）。
    定数は逆変換の較正で決まる。H^3 では λ^2 に等しい。

    Parameters
    ----------
    sp : SpaceParams
        空間
    lam : float or np.ndarray
        スペクトル変数（0 ≤ λ ≤ 1e4）
    """
    lam_arr = np.abs(np.atleast_1d(np.asarray(lam, dtype=float)))
    if np.any(lam_arr > SPECTRAL_WINDOW):
        raise DomainError(f"spectral variable beyond supported window {SPECTRAL_WINDOW:g}")

    out = np.zeros(lam_arr.shape)
    pos = lam_arr > 0
    if np.any(pos):
        w = 1j * lam_arr[pos]
        out[pos] = np.exp(2.0 * (log_abs_gamma(w + sp.rho) - log_abs_gamma(w)))
    return float(out[0]) if np.ndim(lam) == 0 else out


def phi0_bound_check(
    sp: SpaceParams,
    r_min: float = 0.1,
    r_max: float = 20.0,
    points: int = 200,
    growth_tolerance: float = 0.05,
    quad: Optional[QuadratureSpec] = None,
) -> BoundReport:
    """
    φ_0(r) ≤ c (1+r)^d e^{-ρr} の有限比チェック

    格子を2倍に細分し r_max を倍にしても上限の増加が許容値未満なら合格。
    """
    if not (0 < r_min < r_max) or points < 2:
        raise ConfigError("phi0 grid must satisfy 0 < r_min < r_max with at least two points")
    logger.info(f"phi0 bound check: n={sp.n}, r in [{r_min}, {r_max}]")

    def ratios(grid: np.ndarray) -> np.ndarray:
        phi0 = spherical_function_matrix(sp, [0.0], grid, quad)[0]
        return phi0 / ((1.0 + grid) ** sp.d * np.exp(-sp.rho * grid))

    coarse_grid = np.linspace(r_min, r_max, points)
    fine_grid = np.linspace(r_min, 2.0 * r_max, 4 * points)
    coarse = ratios(coarse_grid)
    fine = ratios(fine_grid)
    rows = [{"r": float(r), "ratio": float(q)} for r, q in zip(coarse_grid, coarse)]
    return stability_report(
        name="phi0",
        coarse_sup=float(np.max(coarse)),
        fine_sup=float(np.max(fine)),
        growth_tolerance=growth_tolerance,
        rows=rows,
        details={"n": sp.n},
    )


def modular_check(
    sp: SpaceParams,
    r_max: float = 20.0,
    points: int = 200,
    growth_tolerance: float = 0.05,
) -> BoundReport:
    """
    δ(r)/e^{2ρr} が有界で、r → ∞ で ω_{n-1}/2^{n-1} に収束することのチェック
    """
    def ratios(grid: np.ndarray) -> np.ndarray:
        # sinh(r) e^{-r} = (1 - e^{-2r})/2 として溢れを避ける
        return sp.sphere_area * (0.5 * -np.expm1(-2.0 * grid)) ** (sp.n - 1)

    coarse_grid = np.linspace(0.0, r_max, points)
    fine_grid = np.linspace(0.0, 2.0 * r_max, 4 * points)
    coarse = ratios(coarse_grid)
    fine = ratios(fine_grid)
    limit = sp.sphere_area / 2.0 ** (sp.n - 1)
    rows = [{"r": float(r), "ratio": float(q)} for r, q in zip(coarse_grid, coarse)]
    return stability_report(
        name="modular",
        coarse_sup=float(np.max(coarse)),
        fine_sup=float(np.max(fine)),
        growth_tolerance=growth_tolerance,
        rows=rows,
        details={"n": sp.n, "limit": limit, "limit_gap": float(abs(fine[-1] - limit) / limit)},
    )


def volume_check(
    sp: SpaceParams,
    r_min: float = 0.01,
    r_max: float = 1.0,
    points: int = 50,
    growth_tolerance: float = 0.05,
    quad: Optional[QuadratureSpec] = None,
) -> BoundReport:
    """
    r ≤ 1 の小球で |B(r)| ≤ c r^n が成り立つことのチェック

    細分格子では r_min を半分にし点数を倍にする。r → 0 の極限は単位球の体積 ω_{n-1}/n。
    """
    if not (0 < r_min < r_max <= 1.0):
        raise ConfigError("volume check requires 0 < r_min < r_max <= 1")

    def ratios(grid: np.ndarray) -> np.ndarray:
        return np.array([ball_volume(sp, float(r), quad) / r ** sp.n for r in grid])

    coarse_grid = np.geomspace(r_min, r_max, points)
    fine_grid = np.geomspace(0.5 * r_min, r_max, 2 * points)
    coarse = ratios(coarse_grid)
    fine = ratios(fine_grid)
    rows = [{"r": float(r), "ratio": float(q)} for r, q in zip(coarse_grid, coarse)]
    return stability_report(
        name="vol",
        coarse_sup=float(np.max(coarse)),
        fine_sup=float(np.max(fine)),
        growth_tolerance=growth_tolerance,
        rows=rows,
        details={"n": sp.n, "euclidean_limit": sp.sphere_area / sp.n},
    )
