"""
熱核

p_t = 𝓗^{-1}(w_t) の評価と、熱核の評価式（粗い上界・鋭い上界・L²ノルムと裾）の検証
"""

import math
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from tqdm import tqdm

from ..data.grids import RadialFunction, SpectralFunction
from ..errors import ConfigError
from ..geometry.space import SpaceParams, density
from ..multipliers.riesz_symbols import eval_heat_multiplier
from ..reporting.bound_report import BoundReport, stability_report
from ..transforms.quadrature import QuadratureSpec, panel_rule
from ..transforms.spherical import InverseTransformPlan
from .cutoff import CutoffZeta, KernelProfile


def heat_spectral_cutoff(sp: SpaceParams, t: float, tol: float) -> float:
    """e^{-tΛ²} Λ^{n-1} が tol を下回る Λ"""
    level = math.log(1.0 / tol)
    lam = math.sqrt(level / t)
    return math.sqrt((level + (sp.n - 1) * math.log(1.0 + lam)) / t) + 1.0


def heat_kernel(
    sp: SpaceParams,
    t: float,
    rs: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
) -> KernelProfile:
    """
    熱核 p_t(r) = 𝓗^{-1}(w_t)(r)

    Parameters
    ----------
    sp : SpaceParams
        空間
    t : float
        時間（正）
    rs : sequence of float
        評価半径（単調増加）
    quad : QuadratureSpec, optional
        積分設定

    Returns
    -------
    KernelProfile
        核の値と雑音下限
    """
    if t <= 0:
        raise ConfigError(f"heat time must be positive, got {t}")
    quad = quad or QuadratureSpec()
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    lam_max = heat_spectral_cutoff(sp, t, quad.abs_tol)
    nodes, weights = SpectralFunction.rule(lam_max, quad, r_max=float(rs[-1]))
    plan = InverseTransformPlan(sp, nodes, weights, rs, quad)
    values, floor = plan.apply(eval_heat_multiplier(sp, t, nodes))

    negative = values < -floor
    if np.any(negative):
        logger.warning(f"Heat kernel t={t:g} negative beyond noise floor at {int(negative.sum())} radii")
    profile = RadialFunction.on_grid(sp, rs, values)
    return KernelProfile("heat", profile, "inverse-spherical", {"t": t, "n": sp.n}, floor)


def heat_kernel_h3(t: float, r) -> np.ndarray:
    """H³ の熱核の閉形式 (4πt)^{-3/2} e^{-t} (r/sinh r) e^{-r²/4t}"""
    r = np.asarray(r, dtype=float)
    ratio = np.ones(r.shape)
    pos = r > 0
    ratio[pos] = r[pos] / np.sinh(r[pos])
    return (4.0 * math.pi * t) ** -1.5 * np.exp(-t - r * r / (4.0 * t)) * ratio


def _cut_radius(t: float, quad: QuadratureSpec) -> float:
    # これより外では e^{-r²/4t} が相対許容誤差を下回る
    return math.sqrt(4.0 * t * (math.log(1.0 / quad.rel_tol) + 2.0))


def _refine(ts: np.ndarray, rs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    fine_t = np.geomspace(0.5 * ts[0], ts[-1], 2 * ts.size)
    fine_r = np.linspace(rs[0], rs[-1], 2 * rs.size - 1)
    return fine_t, fine_r


def _ratio_sweep(
    sp: SpaceParams,
    ts: np.ndarray,
    rs: np.ndarray,
    envelope: Callable[[float, np.ndarray], np.ndarray],
    quad: QuadratureSpec,
) -> Tuple[float, float, List[Dict], int]:
    """sup p_t(r)/envelope(t, r) と対角 sup p_t(0) t^{n/2}"""
    sup, diag, rows, excluded = 0.0, 0.0, [], 0
    grid = np.union1d([0.0], rs)
    for t in tqdm(ts, desc="heat sweep", disable=ts.size < 32, leave=False):
        t = float(t)
        inside = grid[grid <= _cut_radius(t, quad)]
        excluded += grid.size - inside.size
        kernel = heat_kernel(sp, t, inside, quad)
        ok = kernel.resolved()
        excluded += int(np.count_nonzero(~ok))
        ratio = kernel.values[ok] / envelope(t, inside[ok])
        sup = max(sup, float(np.max(ratio, initial=0.0)))
        diag = max(diag, float(kernel.values[0]) * t ** (sp.n / 2.0))
        rows.extend({"t": t, "r": float(r), "ratio": float(q)} for r, q in zip(inside[ok], ratio))
    return sup, diag, rows, excluded


def check_heat_crude_bound(
    sp: SpaceParams,
    t_grid: Sequence[float],
    r_grid: Sequence[float],
    growth_tolerance: float = 0.05,
    quad: Optional[QuadratureSpec] = None,
) -> BoundReport:
    """
    p_t(r) ≤ c t^{-n/2} e^{-r²/4t} と対角の上界 p_t(0) ≤ c t^{-n/2}

    細分では t の下端を半分にして点数を倍にし、r の点数も倍にする。
    """
    quad = quad or QuadratureSpec()
    ts, rs = np.asarray(sorted(t_grid), dtype=float), np.asarray(sorted(r_grid), dtype=float)
    logger.info(f"Crude heat bound: n={sp.n}, t in [{ts[0]:g}, {ts[-1]:g}]")

    def envelope(t: float, r: np.ndarray) -> np.ndarray:
        return t ** (-sp.n / 2.0) * np.exp(-r * r / (4.0 * t))

    coarse, diag, rows, excluded = _ratio_sweep(sp, ts, rs, envelope, quad)
    fine, fine_diag, _, _ = _ratio_sweep(sp, *_refine(ts, rs), envelope, quad)
    diag_growth = abs(fine_diag / diag - 1.0) if diag > 0 else float("inf")
    return stability_report(
        name="heat-crude",
        coarse_sup=coarse,
        fine_sup=fine,
        growth_tolerance=growth_tolerance,
        rows=rows,
        slope_checks={"diagonal": bool(np.isfinite(fine_diag) and diag_growth < growth_tolerance)},
        excluded=excluded,
        details={"n": sp.n, "diagonal_sup": diag, "refined_diagonal_sup": fine_diag},
    )


def check_heat_sharp_bound(
    sp: SpaceParams,
    t_grid: Sequence[float],
    r_grid: Sequence[float],
    growth_tolerance: float = 0.05,
    quad: Optional[QuadratureSpec] = None,
) -> BoundReport:
    """
    階数1の鋭い評価
    p_t(r) ≤ c t^{-n/2} (1+r)(1+t+r)^{(n-1)/2-1} e^{-ρ²t-ρr-r²/4t}
    """
    quad = quad or QuadratureSpec()
    ts, rs = np.asarray(sorted(t_grid), dtype=float), np.asarray(sorted(r_grid), dtype=float)
    rho = sp.rho
    logger.info(f"Sharp heat bound: n={sp.n}, t in [{ts[0]:g}, {ts[-1]:g}]")

    def envelope(t: float, r: np.ndarray) -> np.ndarray:
        return (
            t ** (-sp.n / 2.0)
            * (1.0 + r)
            * (1.0 + t + r) ** ((sp.n - 1) / 2.0 - 1.0)
            * np.exp(-rho * rho * t - rho * r - r * r / (4.0 * t))
        )

    coarse, _, rows, excluded = _ratio_sweep(sp, ts, rs, envelope, quad)
    fine, _, _, _ = _ratio_sweep(sp, *_refine(ts, rs), envelope, quad)
    return stability_report(
        name="heat-sharp",
        coarse_sup=coarse,
        fine_sup=fine,
        growth_tolerance=growth_tolerance,
        rows=rows,
        excluded=excluded,
        details={"n": sp.n},
    )


def _l2_sweep(
    sp: SpaceParams,
    ts: np.ndarray,
    a_grid: np.ndarray,
    D: float,
    quad: QuadratureSpec,
) -> Dict:
    out = {"tail_sup": 0.0, "l2_sup": 0.0, "semigroup_error": 0.0, "rows": [], "excluded": 0}
    for t in ts:
        t = float(t)
        r_max = math.sqrt(2.0 * t * (math.log(1.0 / quad.abs_tol) + 10.0))
        panels = max(8, int(math.ceil(2.0 * r_max / math.sqrt(t))))
        bps = np.union1d(np.linspace(0.0, r_max, panels + 1), a_grid[a_grid < r_max])
        nodes, weights = panel_rule(bps, quad.order)
        kernel = heat_kernel(sp, t, nodes, quad)
        p, floor = kernel.values, kernel.floor
        dens = weights * density(sp, nodes)

        norm2 = float(np.sum(p * p * dens))
        diag = float(heat_kernel(sp, 2.0 * t, [0.0], quad).values[0])
        out["semigroup_error"] = max(out["semigroup_error"], abs(norm2 - diag) / diag)
        out["l2_sup"] = max(out["l2_sup"], math.sqrt(norm2) * t ** (sp.n / 4.0))

        for a in a_grid:
            beyond = nodes > a
            tail = float(np.sum(p[beyond] ** 2 * dens[beyond]))
            noise = float(np.sum((2.0 * np.abs(p[beyond]) * floor[beyond] + floor[beyond] ** 2) * dens[beyond]))
            if tail <= 10.0 * noise:
                out["excluded"] += 1
                continue
            q = tail * t ** (sp.n / 2.0) * math.exp(a * a / (D * t))
            out["tail_sup"] = max(out["tail_sup"], q)
            out["rows"].append({"t": t, "a": float(a), "tail": tail, "ratio": q, "norm2": norm2})
    return out


def check_heat_l2_and_tail(
    sp: SpaceParams,
    t_grid: Sequence[float],
    a_grid: Sequence[float],
    D: float = 8.0,
    growth_tolerance: float = 0.05,
    semigroup_tolerance: float = 1e-6,
    quad: Optional[QuadratureSpec] = None,
) -> BoundReport:
    """
    ‖p_t‖₂ t^{n/4} の有界性、‖p_t‖₂² = p_{2t}(0)、および裾
    ∫_{r>a} p_t² δ dr ≤ c t^{-n/2} e^{-a²/Dt} の検証

    半径方向はGauss-Legendreパネルで a の値をすべて区分点に含める。
    """
    if D <= 0:
        raise ConfigError(f"D must be positive, got {D}")
    quad = quad or QuadratureSpec()
    ts, a_vals = np.asarray(sorted(t_grid), dtype=float), np.asarray(sorted(a_grid), dtype=float)
    logger.info(f"Heat L2 and tail check: n={sp.n}, D={D:g}")

    coarse = _l2_sweep(sp, ts, a_vals, D, quad)
    fine_t = np.geomspace(ts[0], ts[-1], 2 * ts.size - 1) if ts.size > 1 else ts
    fine_a = np.linspace(a_vals[0], a_vals[-1], 2 * a_vals.size - 1) if a_vals.size > 1 else a_vals
    fine = _l2_sweep(sp, fine_t, fine_a, D, quad)

    l2_growth = abs(fine["l2_sup"] / coarse["l2_sup"] - 1.0)
    semigroup = max(coarse["semigroup_error"], fine["semigroup_error"])
    return stability_report(
        name="heat-tail",
        coarse_sup=coarse["tail_sup"],
        fine_sup=fine["tail_sup"],
        growth_tolerance=growth_tolerance,
        rows=coarse["rows"],
        slope_checks={
            "semigroup": semigroup <= semigroup_tolerance,
            "l2_bounded": bool(np.isfinite(fine["l2_sup"]) and l2_growth < growth_tolerance),
        },
        excluded=coarse["excluded"],
        tolerance={"semigroup": semigroup_tolerance},
        details={
            "n": sp.n,
            "D": D,
            "semigroup_error": semigroup,
            "l2_sup": coarse["l2_sup"],
            "refined_l2_sup": fine["l2_sup"],
        },
    )


def _reference_heat(sp: SpaceParams, t: float, rs: np.ndarray, quad: QuadratureSpec) -> np.ndarray:
    """局所優越の比較基準: H³ は閉形式、それ以外は精度を上げた別の求積"""
    if sp.n == 3:
        return heat_kernel_h3(t, rs)
    tight = replace(
        quad,
        rel_tol=quad.rel_tol / 10.0,
        abs_tol=quad.abs_tol / 10.0,
        max_panels=2 * quad.max_panels,
        order=quad.order + 8,
    )
    return heat_kernel(sp, t, rs, tight).values


def check_local_heat_domination(
    sp: SpaceParams,
    t_grid: Sequence[float],
    rs: Sequence[float],
    zeta: Optional[CutoffZeta] = None,
    quad: Optional[QuadratureSpec] = None,
    tolerance: float = 1e-5,
) -> BoundReport:
    """
    ζ p_t ≤ p_t（熱核の正値性による局所部分の優越）

    左辺は heat_kernel の求積値、右辺は独立に求めた基準値（n = 3 は閉形式）で、
    雑音下限を差し引いたうえで相対 tolerance まで超過を許す。

    Parameters
    ----------
    sp : SpaceParams
        空間
    t_grid : sequence of float
        時間格子
    rs : sequence of float
        半径格子
    zeta : CutoffZeta, optional
        局所切断
    quad : QuadratureSpec, optional
        積分設定
    tolerance : float
        基準値との相対的な食い違いの許容幅

    Returns
    -------
    BoundReport
        sup (ζ p_t − floor) / p_t^基準 と、基準値との一致・正値性の判定
    """
    quad = quad or QuadratureSpec()
    zeta = zeta or CutoffZeta()
    ts = np.asarray(sorted(t_grid), dtype=float)

    def sweep(grid: np.ndarray) -> Tuple[float, float, float, List[Dict], int]:
        sup, mismatch, worst, rows, excluded = 0.0, 0.0, 0.0, [], 0
        for t in ts:
            t = float(t)
            kernel = heat_kernel(sp, t, grid, quad)
            p = kernel.values
            floor = kernel.floor if kernel.floor is not None else np.zeros_like(p)
            reference = _reference_heat(sp, t, grid, quad)
            worst = min(worst, float(np.min(p + floor)))
            ok = kernel.resolved() & (reference > 0)
            excluded += int(np.count_nonzero(~ok))
            # 雑音下限を超える分だけを基準値に対する食い違いとみなす
            ratio = (zeta(grid[ok]) * p[ok] - floor[ok]) / reference[ok]
            excess = np.maximum(np.abs(p[ok] - reference[ok]) - floor[ok], 0.0) / reference[ok]
            sup = max(sup, float(np.max(ratio, initial=0.0)))
            mismatch = max(mismatch, float(np.max(excess, initial=0.0)))
            rows.extend(
                {"t": t, "r": float(r), "ratio": float(q), "reference": float(v)}
                for r, q, v in zip(grid[ok], ratio, reference[ok])
            )
        return sup, mismatch, worst, rows, excluded

    grid = np.asarray(sorted(rs), dtype=float)
    coarse, mismatch, worst, rows, excluded = sweep(grid)
    fine, fine_mismatch, fine_worst, _, _ = sweep(np.linspace(grid[0], grid[-1], 2 * grid.size - 1))
    mismatch = max(mismatch, fine_mismatch)
    logger.debug(f"local heat domination n={sp.n}: sup={fine:.6g} mismatch={mismatch:.3g}")
    return stability_report(
        name="local-heat",
        coarse_sup=coarse,
        fine_sup=fine,
        growth_tolerance=0.05,
        rows=rows,
        slope_checks={
            "dominated": fine <= 1.0 + tolerance,
            "reference": mismatch <= tolerance,
            "positive": min(worst, fine_worst) >= 0.0,
        },
        excluded=excluded,
        tolerance={"reference": tolerance},
        details={
            "n": sp.n,
            "mismatch": mismatch,
            "reference": "closed-form" if sp.n == 3 else "refined-quadrature",
        },
    )
