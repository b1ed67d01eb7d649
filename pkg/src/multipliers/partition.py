"""
[0, 1) の二進分割と h_{j,r}^z

ψ(ξ) = e^{-1/ξ²} から作った滑らかな分割 χ_j と、それで切り出した
h_{j,r}^z(ξ) = h_r^z(ξ) χ_j((ξ/r)²) の台の長さ・微分ノルム・Fourier変換の裾の検証
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from ..errors import ConfigError, DomainError, ResolutionError
from ..geometry.space import SpaceParams
from ..reporting.bound_report import BoundReport, fit_loglog_slope, fit_slope, stability_report
from ..special.orders import ComplexOrder
from ..transforms.euclidean import even_fourier_transform
from ..transforms.quadrature import QuadratureSpec, oscillation_subdivisions, panel_rule
from .riesz_symbols import RieszParams, eval_h

ArrayLike = Union[float, np.ndarray]

MAX_OVERLAP = 3
MAX_INDEX = 60

# 中心差分の係数（オフセット, 係数）
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
}


def psi(x: ArrayLike) -> ArrayLike:
    """ψ(x) = e^{-1/x²}（x ≤ 0 では0）"""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    pos = x > 0
    out[pos] = np.exp(-1.0 / (x[pos] * x[pos]))
    return out


def psi1(x: ArrayLike) -> ArrayLike:
    """ψ₁(x) = ψ(x)ψ(1−x)（台は [0, 1]）"""
    x = np.asarray(x, dtype=float)
    return psi(x) * psi(1.0 - x)


def phi_bump(x: ArrayLike) -> ArrayLike:
    """φ(x) = ψ₁(x + 5/4)（台は [−5/4, −1/4]）"""
    return psi1(np.asarray(x, dtype=float) + 1.25)


def phi_j(j: int, xi: ArrayLike) -> ArrayLike:
    """φ_j(ξ) = φ(2^j(ξ − 1))"""
    return phi_bump(2.0 ** j * (np.asarray(xi, dtype=float) - 1.0))


def support_interval(j: int) -> Tuple[float, float]:
    """χ_j の台 I_j = [1 − 5/2^{j+2}, 1 − 1/2^{j+2}]（[0, 1) に制限）"""
    return max(0.0, 1.0 - 5.0 / 2 ** (j + 2)), 1.0 - 1.0 / 2 ** (j + 2)


def _check_unit_interval(xi: np.ndarray) -> None:
    if np.any(xi < 0) or np.any(xi >= 1):
        raise DomainError("partition is defined on [0, 1) only")


def _index_limit(xi: np.ndarray) -> int:
    gap = float(np.min(1.0 - xi, initial=1.0))
    return min(MAX_INDEX, int(math.ceil(math.log2(1.25 / gap))) + 1)


def _phi_stack(xi: np.ndarray) -> np.ndarray:
    return np.array([phi_j(i, xi) for i in range(_index_limit(xi) + 1)])


def partition_chi(j: int, xi: ArrayLike) -> ArrayLike:
    """
    分割 χ_j(ξ) = φ_j(ξ) / Σ_i φ_i(ξ)

    Parameters
    ----------
    j : int
        番号（0以上）
    xi : float or np.ndarray
        [0, 1) の点

    Raises
    ------
    DomainError
        ξ が [0, 1) の外にある場合
    """
    if j < 0:
        raise DomainError(f"partition index must be >= 0, got {j}")
    arr = np.atleast_1d(np.asarray(xi, dtype=float))
    _check_unit_interval(arr)
    stack = _phi_stack(arr)
    total = stack.sum(axis=0)
    numer = stack[j] if j < stack.shape[0] else np.zeros(arr.shape)
    out = numer / total
    return float(out[0]) if np.ndim(xi) == 0 else out


@lru_cache(maxsize=1)
def partition_overlap_count(samples: int = 20001) -> int:
    """[0, 1) 上で同時に正となる φ_i の最大個数（数値的に一度だけ求める）"""
    gaps = np.geomspace(1e-9, 1.0, samples)
    xi = 1.0 - gaps
    count = int(np.max(np.sum(_phi_stack(xi) > 0, axis=0)))
    if count > MAX_OVERLAP:
        raise DomainError(f"partition overlap {count} exceeds {MAX_OVERLAP}")
    return count


@dataclass(frozen=True)
class DyadicPiece:
    """
    h_r^z の二進片

    Attributes
    ----------
    j : int
        番号
    r : float
        r = √R
    """

    j: int
    r: float

    def __post_init__(self):
        if self.j < 0 or self.r <= 0:
            raise ConfigError(f"invalid dyadic piece j={self.j}, r={self.r}")

    @classmethod
    def of(cls, j: int, p: RieszParams) -> "DyadicPiece":
        return cls(j, p.r)

    @property
    def support(self) -> Tuple[float, float]:
        """ξ での台 [r√(1−5/2^{j+2}), r√(1−1/2^{j+2})]"""
        lo, hi = support_interval(self.j)
        return self.r * math.sqrt(lo), self.r * math.sqrt(hi)

    @property
    def scale(self) -> float:
        """r 2^{-j}"""
        return self.r * 2.0 ** (-self.j)


def eval_hjr(piece: DyadicPiece, p: RieszParams, xi: ArrayLike) -> ArrayLike:
    """
    h_{j,r}^z(ξ) = h_r^z(ξ) χ_j((ξ/r)²)

    (ξ/r)² ≥ 1 では0。ξ² にしか依存しないので負の ξ にも偶関数として拡張される。
    """
    arr = np.atleast_1d(np.asarray(xi, dtype=float))
    x = (arr / p.r) ** 2
    out = np.zeros(arr.shape, dtype=float if p.z.is_real else complex)
    lo, hi = support_interval(piece.j)
    mask = (x > lo if piece.j > 0 else x >= 0) & (x < hi)
    if np.any(mask):
        out[mask] = eval_h(p, arr[mask]) * partition_chi(piece.j, x[mask])
    return out[0] if np.ndim(xi) == 0 else out


def central_difference(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, k: int, h: float) -> np.ndarray:
    """k 階中心差分（k ≤ 3）"""
    if k not in _STENCILS:
        raise DomainError(f"derivative order must be <= 3, got {k}")
    offsets, coeffs = _STENCILS[k]
    total = sum(c * f(x + o * h) for o, c in zip(offsets, coeffs))
    return total / h ** k


def richardson_derivative(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, k: int, h: float) -> np.ndarray:
    """刻み h と h/2 の中心差分を Richardson 外挿する"""
    if k == 0:
        return f(x)
    return (4.0 * central_difference(f, x, k, 0.5 * h) - central_difference(f, x, k, h)) / 3.0


def derivative_sup(
    f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    k: int,
    h: float,
    tolerance: float = 1e-3,
) -> Tuple[float, float]:
    """
    sup|f^{(k)}| を刻み h と h/2 で求める

    Returns
    -------
    tuple of float
        (刻み h での値, 刻み h/2 での値)

    Raises
    ------
    ResolutionError
        2つの値の相対差が tolerance を超える場合
    """
    coarse = float(np.max(np.abs(richardson_derivative(f, x, k, h)), initial=0.0))
    fine = float(np.max(np.abs(richardson_derivative(f, x, k, 0.5 * h)), initial=0.0))
    if abs(coarse - fine) > tolerance * max(fine, 1e-300):
        raise ResolutionError(
            f"derivative of order {k} not resolved: step-halving changed sup from {coarse:.6e} to {fine:.6e}"
        )
    return coarse, fine


def _piece_grid(piece: DyadicPiece, points: int) -> np.ndarray:
    lo, hi = piece.support
    return np.linspace(lo, hi, points)


def support_length_check(
    sp: SpaceParams,
    z,
    j_max: int = 8,
    r_values: Sequence[float] = (2.0, 8.0, 32.0),
    growth_tolerance: float = 0.05,
    points: int = 4001,
) -> BoundReport:
    """
    h_{j,r}^z の台の長さが c r 2^{-j} 以下であることの掃引

    台の長さは密な格子で非零となる範囲から測る。細分では j を 2 j_max まで
    延ばし格子点を倍にする。
    """
    z = ComplexOrder.of(z)
    logger.info(f"Support length sweep: n={sp.n}, z={z}, j <= {j_max}")

    def measure(js: Sequence[int], npts: int) -> Tuple[float, List[Dict]]:
        rows = []
        for r in r_values:
            if r * r < sp.rho ** 2:
                logger.warning(f"Skipping r={r:g} below rho={sp.rho:g}")
                continue
            p = RieszParams(sp, r * r, z)
            for j in js:
                piece = DyadicPiece(j, r)
                grid = _piece_grid(piece, npts)
                nz = np.flatnonzero(np.abs(eval_hjr(piece, p, grid)) > 0)
                length = float(grid[nz[-1]] - grid[nz[0]]) if nz.size else 0.0
                rows.append({"r": r, "j": j, "length": length, "constant": length / piece.scale})
        return max(row["constant"] for row in rows), rows

    coarse, rows = measure(range(j_max + 1), points)
    fine, _ = measure(range(2 * j_max + 1), 2 * points - 1)
    return stability_report(
        name="alexo6",
        coarse_sup=coarse,
        fine_sup=fine,
        growth_tolerance=growth_tolerance,
        rows=rows,
        details={"n": sp.n, "z": [z.re, z.im], "overlap": partition_overlap_count()},
    )


def _admissible(sp: SpaceParams, j: int, r: float) -> bool:
    # ρ² の平行移動が片の幅に比べて無視できる範囲
    return 2.0 ** (-(j + 2)) >= 8.0 * sp.rho ** 2 / (r * r)


def check_hjr_derivative_norms(
    p: RieszParams,
    j_range: Sequence[int] = tuple(range(3, 9)),
    k_max: int = 2,
    r_values: Sequence[float] = (128.0, 512.0, 2048.0),
    slope_tolerance: float = 0.15,
    r_tolerance: float = 0.1,
    growth_tolerance: float = 0.05,
    points: int = 2001,
) -> BoundReport:
    """
    ‖(h_{j,r}^z)^{(k)}‖_∞ ≤ c_k r^{-k} 2^{-j(Re z − k)} の回帰チェック

    各 k について、最大の r で log₂ sup を j に回帰した傾きが −(Re z − k)、
    固定した j で log sup を log r に回帰した傾きが −k であることを見る。
    微分は Richardson 外挿した中心差分で、刻み半減で一致しなければ ResolutionError。

    Parameters
    ----------
    p : RieszParams
        空間と指数 z（R は r_values で置き換える）
    j_range : sequence of int
        番号
    k_max : int
        最大の微分階数（3以下）
    r_values : sequence of float
        r の値
    """
    sp, z = p.space, p.z
    if k_max > 3 or k_max < 0:
        raise ConfigError(f"k_max must be in [0, 3], got {k_max}")
    if z.re <= k_max:
        raise ConfigError(f"derivative norms need Re z > k_max ({z.re} <= {k_max})")
    r_values = sorted(float(r) for r in r_values)
    logger.info(f"Derivative norm sweep: n={sp.n}, z={z}, j in {list(j_range)}, k <= {k_max}")

    sups: Dict[Tuple[int, float, int], Tuple[float, float]] = {}
    rows = []
    for r in r_values:
        pr = p.with_R(r * r)
        for j in j_range:
            piece = DyadicPiece(j, r)
            grid = _piece_grid(piece, points)
            lo, hi = piece.support
            step = (hi - lo) / 400.0

            def f(x: np.ndarray, piece=piece, pr=pr) -> np.ndarray:
                return eval_hjr(piece, pr, x)

            for k in range(k_max + 1):
                sups[(k, r, j)] = derivative_sup(f, grid, k, step)
                rows.append({"r": r, "j": j, "k": k, "sup": sups[(k, r, j)][1]})

    slopes, checks = {}, {}
    r_top = r_values[-1]
    j_fit = [j for j in j_range if _admissible(sp, j, r_top) and sups[(0, r_top, j)][1] > 0]
    j_ref = [j for j in j_fit if _admissible(sp, j, r_values[0])]
    j_mid = j_ref[len(j_ref) // 2] if j_ref else None
    for k in range(k_max + 1):
        if len(j_fit) >= 3:
            fit = fit_slope(j_fit, [math.log2(sups[(k, r_top, j)][1]) for j in j_fit])
            slopes[f"j_k{k}"] = fit.slope
            checks[f"j_k{k}"] = fit.within(-(z.re - k), slope_tolerance)
        if j_mid is not None and len(r_values) >= 2:
            fit = fit_loglog_slope(r_values, [sups[(k, r, j_mid)][1] for r in r_values])
            slopes[f"r_k{k}"] = fit.slope
            checks[f"r_k{k}"] = fit.within(-float(k), r_tolerance)
    if not checks:
        checks["admissible_grid"] = False

    def normalized(idx: int) -> float:
        return max(
            sups[(k, r, j)][idx] * r ** k * 2.0 ** (j * (z.re - k))
            for k in range(k_max + 1) for r in r_values for j in j_range
            if _admissible(sp, j, r)
        )

    return stability_report(
        name="alexo7",
        coarse_sup=normalized(0),
        fine_sup=normalized(1),
        growth_tolerance=growth_tolerance,
        rows=rows,
        slopes=slopes,
        slope_checks=checks,
        tolerance={"slope": slope_tolerance, "r_slope": r_tolerance},
        details={"n": sp.n, "z": [z.re, z.im], "j_fit": j_fit, "j_reference": j_mid},
    )


def hhat_tail(
    piece: DyadicPiece,
    p: RieszParams,
    s_values: Sequence[float],
    density: float = 1.0,
    quad: Optional[QuadratureSpec] = None,
) -> np.ndarray:
    """
    T(s) = ∫_{|t|≥s} |ĥ_{j,r}^z(t)| dt

    ĥ は台上のパネル則で求め、t は [0, 400·density/L] を1周期16点以上で標本化する
    （L は台の長さ）。
    """
    quad = quad or QuadratureSpec()
    s_values = np.asarray(s_values, dtype=float)
    lo, hi = piece.support
    hi = min(hi, p.edge)
    if hi <= lo:
        return np.zeros(s_values.shape)
    length = hi - lo
    t_max = 400.0 * density / length
    bps = np.linspace(lo, hi, 33)
    subdiv = oscillation_subdivisions(np.diff(bps) * t_max, quad)
    nodes, weights = panel_rule(bps, quad.order, subdiv)
    values = eval_hjr(piece, p, nodes)
    if not np.any(values != 0):
        return np.zeros(s_values.shape)

    n_t = int(math.ceil(t_max * hi * 16.0 * density / (2.0 * math.pi))) + 1
    ts = np.linspace(0.0, t_max, n_t)
    mod = np.abs(even_fourier_transform(values, nodes, weights, ts))
    # 右端からの累積台形和
    seg = 0.5 * (mod[1:] + mod[:-1]) * np.diff(ts)
    tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    return 2.0 * np.interp(s_values, ts, tail)


def check_hhat_tail(
    p: RieszParams,
    j: int = 2,
    k: int = 2,
    s_range: Sequence[float] = tuple(np.geomspace(1.0, 20.0, 20)),
    j_values: Sequence[int] = (1, 2, 3, 4),
    slope_tolerance: float = 0.2,
    growth_tolerance: float = 0.05,
    quad: Optional[QuadratureSpec] = None,
) -> BoundReport:
    """
    ĥ_{j,r}^z の裾 T(s) の減衰チェック

    s·L ≥ 4 の漸近域で log T を log s に回帰した傾きが −k + tol 以下であること、
    sup_s T(s) s^k が t 格子の倍化で安定であることを判定する。
    j 方向の傾き（期待値 k − Re z）は報告のみ。
    """
    if k not in (1, 2, 3):
        raise ConfigError(f"k must be 1, 2 or 3, got {k}")
    quad = quad or QuadratureSpec()
    s_values = np.asarray(sorted(s_range), dtype=float)
    if s_values.size < 2 or s_values[0] <= 0:
        raise ConfigError("s_range must contain at least two positive values")
    z = p.z
    piece = DyadicPiece.of(j, p)
    logger.info(f"Fourier tail check: n={p.space.n}, z={z}, j={j}, k={k}, r={p.r:g}")

    coarse = hhat_tail(piece, p, s_values, 1.0, quad)
    fine = hhat_tail(piece, p, s_values, 2.0, quad)
    rows = [{"s": float(s), "T": float(t)} for s, t in zip(s_values, coarse)]

    if not np.any(fine > 0):
        return stability_report(
            name="hhat", coarse_sup=0.0, fine_sup=0.0, growth_tolerance=growth_tolerance, rows=rows,
            details={"j": j, "k": k, "r": p.r, "empty_piece": True},
        )

    lo, hi = piece.support
    length = min(hi, p.edge) - lo
    floor = 1e-9 * fine[0]
    window = (s_values * length >= 4.0) & (fine > floor)
    if np.count_nonzero(window) < 3:
        window = fine > floor
    excluded = int(np.count_nonzero(fine <= floor))

    slopes, checks = {}, {}
    if np.count_nonzero(window) >= 2:
        fit = fit_loglog_slope(s_values[window], fine[window])
        slopes["s"] = fit.slope
        checks["s"] = fit.at_most(-float(k), slope_tolerance)
    else:
        checks["s"] = False

    # 固定した s での j 方向の尺度（報告のみ）
    s_ref = float(s_values[len(s_values) // 2])
    tails = [(jj, float(hhat_tail(DyadicPiece.of(jj, p), p, [s_ref], 1.0, quad)[0])) for jj in j_values]
    tails = [(jj, t) for jj, t in tails if t > 0]
    if len(tails) >= 2:
        slopes["j"] = fit_slope([jj for jj, _ in tails], [math.log2(t) for _, t in tails]).slope

    coarse_sup = float(np.max(coarse[window] * s_values[window] ** k, initial=0.0))
    fine_sup = float(np.max(fine[window] * s_values[window] ** k, initial=0.0))
    return stability_report(
        name="hhat",
        coarse_sup=coarse_sup,
        fine_sup=fine_sup,
        growth_tolerance=growth_tolerance,
        rows=rows,
        slopes=slopes,
        slope_checks=checks,
        excluded=excluded,
        tolerance={"slope": slope_tolerance},
        details={"j": j, "k": k, "r": p.r, "j_slope_expected": k - z.re, "s_reference": s_ref},
    )
