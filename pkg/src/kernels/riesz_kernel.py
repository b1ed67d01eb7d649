"""
Riesz核

κ_R^z = 𝓗^{-1}(s_R^z) の評価と、局所 L¹ノルム・無限遠での減衰・
Bessel表示・二進片への分解・無限遠部分の L^q ノルムの検証
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..data.grids import RadialFunction, SpectralFunction
from ..errors import ConfigError
from ..geometry.space import SpaceParams, density, plancherel_density, spherical_function_matrix
from ..multipliers.partition import DyadicPiece, eval_hjr
from ..multipliers.riesz_symbols import RieszParams, eval_heat_multiplier, eval_riesz_multiplier
from ..reporting.bound_report import BoundReport, fit_loglog_slope, stability_report
from ..special.bessel import script_j, script_j_derivative
from ..special.gamma import gamma_complex
from ..special.orders import BesselOrder, ComplexOrder
from ..transforms.euclidean import euclidean_inverse_ft
from ..transforms.quadrature import QuadratureSpec, integrate, oscillation_subdivisions, panel_rule
from ..transforms.spherical import InverseTransformPlan, calibration_constant
from .cutoff import CutoffZeta, KernelProfile


def _edge_levels(z: ComplexOrder) -> int:
    # 台の端での (1-u)^z の特異性が強いほど細かく分ける
    return 30 if z.re < 1.0 else 12


def riesz_plan(
    p: RieszParams,
    rs: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
    edge_levels: Optional[int] = None,
) -> InverseTransformPlan:
    """[0, √(R−ρ²)] 上の求積則と半径格子 rs に対する逆変換の計画"""
    quad = quad or QuadratureSpec()
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    a = p.edge
    levels = _edge_levels(p.z) if edge_levels is None else edge_levels
    nodes, weights = SpectralFunction.rule(a, quad, r_max=float(np.max(rs)), edges=[a], edge_levels=levels)
    return InverseTransformPlan(p.space, nodes, weights, rs, quad)


def _params_dict(p: RieszParams) -> Dict:
    return {"n": p.space.n, "R": p.R, "z": [p.z.re, p.z.im]}


def riesz_kernel(
    sp: SpaceParams,
    p: RieszParams,
    rs: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
) -> KernelProfile:
    """
    Riesz核 κ_R^z(r)

    Parameters
    ----------
    sp : SpaceParams
        空間
    p : RieszParams
        R と z
    rs : sequence of float
        評価半径（単調増加）
    quad : QuadratureSpec, optional
        積分設定

    Returns
    -------
    KernelProfile
        核の値と雑音下限（R = ρ² では恒等的に0）
    """
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    if p.edge == 0.0:
        zeros = np.zeros(rs.shape)
        return KernelProfile("riesz", RadialFunction.on_grid(sp, rs, zeros), "inverse-spherical", _params_dict(p), zeros)
    plan = riesz_plan(p, rs, quad)
    values, floor = plan.apply(eval_riesz_multiplier(p, plan.nodes))
    profile = RadialFunction.on_grid(sp, rs, values)
    return KernelProfile("riesz", profile, "inverse-spherical", _params_dict(p), floor)


def _unit_ball_rule(a: float, quad: QuadratureSpec, r_min: float, r_max: float, oversample: float) -> Tuple[np.ndarray, np.ndarray]:
    bps = np.linspace(r_min, r_max, 9)
    subdiv = oscillation_subdivisions(np.diff(bps) * max(a, 1.0) * oversample, quad)
    return panel_rule(bps, quad.order, subdiv)


def local_l1_norm(sp: SpaceParams, p: RieszParams, quad: Optional[QuadratureSpec] = None) -> float:
    """∫_0^1 |κ_R^z(r)| δ(r) dr"""
    if p.edge == 0.0:
        return 0.0
    quad = quad or QuadratureSpec()
    nodes, weights = _unit_ball_rule(p.edge, quad, 0.0, 1.0, 4.0)
    kernel = riesz_kernel(sp, p, nodes, quad)
    return float(np.sum(np.abs(kernel.values) * weights * density(sp, nodes)))


def local_l1_check(
    sp: SpaceParams,
    z_offset: float = 0.6,
    R_offsets: Sequence[float] = (1.0, 10.0, 100.0, 1000.0, 10000.0),
    growth_tolerance: float = 0.10,
    z=None,
    quad: Optional[QuadratureSpec] = None,
    spread_tolerance: float = 10.0,
    spread_min_offset: float = 10.0,
) -> BoundReport:
    """
    Re z > n/2 での局所 L¹ノルムの R に関する一様有界性

    上限が有限で、R をもう一桁延ばしても増加が許容値未満であり、
    R − ρ² ≥ spread_min_offset の範囲の最大値/最小値の比が spread_tolerance 以下なら合格。
    R − ρ² → 0 ではノルムが (R−ρ²)^{Re z+n/2} で0に近づくため、比の計算には含めない。
    """
    quad = quad or QuadratureSpec()
    zv = ComplexOrder.of(sp.n / 2.0 + z_offset if z is None else z)
    if zv.re <= sp.n / 2.0:
        raise ConfigError(f"local L1 bound needs Re z > n/2, got {zv.re}")
    offsets = sorted(float(o) for o in R_offsets)
    logger.info(f"Local L1 sweep: n={sp.n}, z={zv}, R - rho^2 in {offsets}")

    norms = {o: local_l1_norm(sp, RieszParams.from_offset(sp, o, zv), quad) for o in offsets}
    extended = 10.0 * offsets[-1]
    norms_ext = local_l1_norm(sp, RieszParams.from_offset(sp, extended, zv), quad)
    rows = [{"R_offset": o, "R": sp.rho ** 2 + o, "l1": v} for o, v in norms.items()]
    values = np.array(list(norms.values()))
    spread_offsets = [o for o in offsets if o >= spread_min_offset] or offsets
    spread_values = np.array([norms[o] for o in spread_offsets])
    positive = spread_values[spread_values > 0]
    spread = float(positive.max() / positive.min()) if positive.size else float("nan")
    coarse = float(values.max())
    return stability_report(
        name="l1ball",
        coarse_sup=coarse,
        fine_sup=max(coarse, norms_ext),
        growth_tolerance=growth_tolerance,
        rows=rows,
        slope_checks={"spread": bool(np.isfinite(spread) and spread <= spread_tolerance)},
        tolerance={"spread": spread_tolerance},
        details={"n": sp.n, "z": [zv.re, zv.im], "spread": spread, "spread_offsets": spread_offsets, "extended_offset": extended, "extended_l1": norms_ext},
    )


def infinity_kernel_bound_check(
    sp: SpaceParams,
    z_grid: Sequence[float] = (2.5, 4.0),
    R_grid: Sequence[float] = (1.0, 10.0, 100.0, 1000.0, 10000.0),
    r_min: float = 1.1,
    r_max: float = 10.0,
    r_points: int = 60,
    small_offsets: Sequence[float] = (0.25, 0.5),
    slope_tolerance: float = 0.15,
    growth_tolerance: float = 0.05,
    quad: Optional[QuadratureSpec] = None,
) -> BoundReport:
    """
    無限遠での減衰 |κ_R^z(r)| ≤ c φ_0(r) R^{-(Re z−n+1/2)/2} r^{-Re z−1/2}（R ≥ ρ²+1）と、
    ρ² ≤ R ≤ ρ²+1 での |κ_R^z(r)| ≤ c φ_0(r) r^{-Re z−1/2}

    R_grid は R − ρ² の値。細分では r の点数を倍にする。雑音下限以下の点は除外して数える。
    R に関する傾きは片側（上界）判定。
    """
    if r_min <= 1.0:
        raise ConfigError("infinity checks run on r > 1")
    quad = quad or QuadratureSpec()
    z_values = [ComplexOrder.of(z) for z in z_grid]
    for z in z_values:
        if z.re < sp.n - 0.5:
            logger.warning(f"Re z={z.re} below n - 1/2; the bound is not expected to be uniform")
    offsets = sorted(float(o) for o in R_grid if o >= 1.0)
    small = sorted(float(o) for o in small_offsets if 0.0 < o < 1.0)
    fine_r = np.linspace(r_min, r_max, 2 * r_points - 1)
    coarse_idx = np.arange(0, fine_r.size, 2)
    phi0 = spherical_function_matrix(sp, [0.0], fine_r, quad)[0]
    logger.info(f"Kernel decay at infinity: n={sp.n}, z in {[z.re for z in z_values]}")

    sups = {z: {} for z in z_values}
    small_sups = {z: 0.0 for z in z_values}
    coarse_sup = fine_sup = 0.0
    rows, excluded = [], 0
    for offset in small + offsets:
        levels = max(_edge_levels(z) for z in z_values)
        plan = riesz_plan(RieszParams.from_offset(sp, offset, z_values[0]), fine_r, quad, levels)
        for z in z_values:
            p = RieszParams.from_offset(sp, offset, z)
            values, floor = plan.apply(eval_riesz_multiplier(p, plan.nodes))
            ok = np.abs(values) > 10.0 * floor
            excluded += int(np.count_nonzero(~ok[coarse_idx]))
            base = np.abs(values) / (phi0 * fine_r ** (-z.re - 0.5))
            base[~ok] = 0.0
            if offset < 1.0:
                small_sups[z] = max(small_sups[z], float(base.max()))
                continue
            q = base / p.R ** (-(z.re - sp.n + 0.5) / 2.0)
            sups[z][p.R] = float(base.max())
            coarse_sup = max(coarse_sup, float(q[coarse_idx].max()))
            fine_sup = max(fine_sup, float(q.max()))
            rows.extend(
                {"z": z.re, "R": p.R, "r": float(fine_r[i]), "ratio": float(q[i])}
                for i in coarse_idx if ok[i]
            )

    slopes, checks = {}, {}
    for z in z_values:
        Rs = sorted(R for R, v in sups[z].items() if v > 0)
        if len(Rs) >= 2:
            fit = fit_loglog_slope(Rs, [sups[z][R] for R in Rs])
            slopes[f"z={z}"] = fit.slope
            checks[f"z={z}"] = fit.at_most(-(z.re - sp.n + 0.5) / 2.0, slope_tolerance)
        checks[f"small R z={z}"] = bool(np.isfinite(small_sups[z]))

    return stability_report(
        name="kappa-inf",
        coarse_sup=coarse_sup,
        fine_sup=fine_sup,
        growth_tolerance=growth_tolerance,
        rows=rows,
        slopes=slopes,
        slope_checks=checks,
        excluded=excluded,
        tolerance={"slope": slope_tolerance},
        details={"n": sp.n, "small_R_sup": {str(z): v for z, v in small_sups.items()}},
    )


def bessel_pipeline_kernel(p: RieszParams, hs: Sequence[float]) -> np.ndarray:
    """
    Bessel表示 R^{-z}(R−ρ²)^{z+1/2} 𝒥_{z+1/2}(√(R−ρ²)|H|)（定数を除く）
    """
    order = BesselOrder.for_riesz(p.z, p.space.l)
    hs = np.abs(np.atleast_1d(np.asarray(hs, dtype=float)))
    a = p.edge
    z = p.z.re
    return p.R ** (-z) * a ** (2.0 * z + 1.0) * script_j(order.nu, a * hs)


def bessel_pipeline_constant(z: float) -> float:
    """Euclid逆変換とBessel表示の比 Γ(z+1) 2^{z−1/2} / √π"""
    return float(gamma_complex(z + 1.0).real) * 2.0 ** (z - 0.5) / math.sqrt(math.pi)


def euclidean_riesz_profile(
    p: RieszParams,
    hs: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
) -> np.ndarray:
    """ℱ^{-1}(s_R^z)(H) を直接の求積で求める"""
    hs = np.atleast_1d(np.asarray(hs, dtype=float))
    a = p.edge
    m = SpectralFunction.from_callable(
        lambda lam: eval_riesz_multiplier(p, lam),
        a,
        quad,
        r_max=float(np.max(np.abs(hs))),
        edges=[a],
        edge_levels=_edge_levels(p.z),
    )
    return euclidean_inverse_ft(m, hs, quad)


def fourier_ratio_check(
    sp: SpaceParams,
    z_values: Sequence[float] = (1.0, 2.5, 3.0),
    R_offsets: Sequence[float] = (1.0, 10.0, 100.0),
    hs: Sequence[float] = tuple(np.linspace(0.0, 10.0, 101)),
    tolerance: float = 1e-4,
    quad: Optional[QuadratureSpec] = None,
) -> BoundReport:
    """
    Bessel表示と直接のEuclid逆変換の比が H によらず一定であることの確認

    |B(H)| が最大値の1e-3未満の点（零点付近）は比の計算から除く。
    """
    quad = quad or QuadratureSpec()
    hs = np.asarray(hs, dtype=float)
    rows, spreads, details, excluded = [], [], {}, 0
    for zv in z_values:
        for offset in R_offsets:
            p = RieszParams.from_offset(sp, offset, zv)
            direct = euclidean_riesz_profile(p, hs, quad)
            bessel = bessel_pipeline_kernel(p, hs)
            ok = np.abs(bessel) >= 1e-3 * np.max(np.abs(bessel))
            excluded += int(np.count_nonzero(~ok))
            ratio = direct[ok] / bessel[ok]
            mean = float(np.mean(ratio))
            spread = float((ratio.max() - ratio.min()) / abs(mean))
            spreads.append(spread)
            details[f"z={zv:g},R={p.R:g}"] = {"constant": mean, "spread": spread}
            rows.extend({"z": zv, "R": p.R, "H": float(h), "ratio": float(q)} for h, q in zip(hs[ok], ratio))
        details[f"z={zv:g} analytic"] = bessel_pipeline_constant(zv)

    worst = float(max(spreads))
    return stability_report(
        name="fourier",
        coarse_sup=worst,
        fine_sup=worst,
        growth_tolerance=1.0,
        rows=rows,
        slope_checks={"spread": worst <= tolerance},
        excluded=excluded,
        tolerance={"spread": tolerance},
        details=details,
    )


def check_bessel_derivative_bound(
    sp: SpaceParams,
    z: float = 2.0,
    orders: Sequence[int] = (0, 1, 2),
    R_grid: Sequence[float] = (1.0, 10.0, 100.0),
    H_min: float = 0.5,
    H_max: float = 10.0,
    H_points: int = 200,
    growth_tolerance: float = 0.05,
) -> BoundReport:
    """
    |∂_H^a 𝒥_{z+1/2}(b|H|)| b^{-a+z+1} |H|^{z+1} の有界性（b = √(R−ρ²)）

    R_grid は R − ρ² の値。細分では H の上端を倍にし点数を4倍にする。
    """
    zv = ComplexOrder.of(z)
    order = BesselOrder.for_riesz(zv, sp.l)
    if H_min <= 0 or H_max <= H_min:
        raise ConfigError("H grid must satisfy 0 < H_min < H_max")
    logger.info(f"Bessel derivative bound: z={zv}, orders {list(orders)}")

    def sweep(hs: np.ndarray, record: bool) -> Tuple[float, List[Dict]]:
        sup, rows = 0.0, []
        for offset in R_grid:
            b = math.sqrt(offset)
            for a in orders:
                deriv = b ** a * script_j_derivative(order.nu, int(a), b * hs)
                q = np.abs(deriv) * b ** (-a + zv.re + 1.0) * hs ** (zv.re + 1.0)
                sup = max(sup, float(q.max()))
                if record:
                    rows.extend({"a": int(a), "R": sp.rho ** 2 + offset, "H": float(h), "ratio": float(v)} for h, v in zip(hs, q))
        return sup, rows

    coarse, rows = sweep(np.linspace(H_min, H_max, H_points), True)
    fine, _ = sweep(np.linspace(H_min, 2.0 * H_max, 4 * H_points), False)
    return stability_report(
        name="bessel-deriv",
        coarse_sup=coarse,
        fine_sup=fine,
        growth_tolerance=growth_tolerance,
        rows=rows,
        details={"n": sp.n, "z": zv.re, "nu": order.nu},
    )


def dyadic_kernel_pieces(
    sp: SpaceParams,
    p: RieszParams,
    j_max: int,
    rs: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
) -> List[KernelProfile]:
    """
    κ_{j,r}^z = 𝓗^{-1}(h_{j,r}^z w_{1/r²})（j = 0..j_max）

    すべての片で同じ求積則を使い、球関数の行列は一度だけ計算する。
    """
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    if p.edge == 0.0:
        zeros = np.zeros(rs.shape)
        return [
            KernelProfile(f"riesz-piece-{j}", RadialFunction.on_grid(sp, rs, zeros), "inverse-spherical", dict(_params_dict(p), j=j), zeros)
            for j in range(j_max + 1)
        ]
    plan = riesz_plan(p, rs, quad)
    heat = eval_heat_multiplier(sp, 1.0 / p.R, plan.nodes)
    pieces = []
    for j in range(j_max + 1):
        values, floor = plan.apply(eval_hjr(DyadicPiece.of(j, p), p, plan.nodes) * heat)
        profile = RadialFunction.on_grid(sp, rs, values)
        pieces.append(KernelProfile(f"riesz-piece-{j}", profile, "inverse-spherical", dict(_params_dict(p), j=j), floor))
    return pieces


def covering_index(p: RieszParams) -> int:
    """片 j ≤ J が s_R^z の台全体を覆う最小の J"""
    rho2 = p.space.rho ** 2
    return max(0, int(math.ceil(math.log2(5.0 * p.R / rho2))) - 2)


def check_dyadic_pieces(
    sp: SpaceParams,
    p: RieszParams,
    rs: Sequence[float],
    j_max: Optional[int] = None,
    quad: Optional[QuadratureSpec] = None,
) -> BoundReport:
    """
    二進片の和が κ_R^z を再現すること（核の段での望遠和）と、
    ‖κ_{j,r}‖₂ ≤ ‖h_{j,r}‖_∞ ‖p_{1/r²}‖₂ の確認

    L²ノルムはPlancherelの等式によりスペクトル側で計算する。
    """
    quad = quad or QuadratureSpec()
    j_max = covering_index(p) if j_max is None else j_max
    rs = np.atleast_1d(np.asarray(rs, dtype=float))
    logger.info(f"Dyadic kernel pieces: n={sp.n}, R={p.R:g}, z={p.z}, j <= {j_max}")

    pieces = dyadic_kernel_pieces(sp, p, j_max, rs, quad)
    kernel = riesz_kernel(sp, p, rs, quad)
    total = sum(piece.values for piece in pieces)
    scale = max(float(np.max(np.abs(kernel.values))), quad.abs_tol)
    telescoping = float(np.max(np.abs(total - kernel.values))) / scale

    plan_nodes, plan_weights = SpectralFunction.rule(p.edge, quad, r_max=float(rs[-1]), edges=[p.edge], edge_levels=_edge_levels(p.z))
    measure = calibration_constant(sp) * plan_weights * plancherel_density(sp, plan_nodes)
    heat = eval_heat_multiplier(sp, 1.0 / p.R, plan_nodes)
    heat_norm = math.sqrt(float(np.sum(heat ** 2 * measure)))
    ratios, rows = [], []
    for j in range(j_max + 1):
        h_j = eval_hjr(DyadicPiece.of(j, p), p, plan_nodes)
        sup_h = float(np.max(np.abs(h_j), initial=0.0))
        norm_j = math.sqrt(float(np.sum(np.abs(h_j * heat) ** 2 * measure)))
        ratio = norm_j / (sup_h * heat_norm) if sup_h > 0 else 0.0
        ratios.append(ratio)
        rows.append({"j": j, "l2": norm_j, "sup_h": sup_h, "ratio": ratio})

    worst = float(max(ratios, default=0.0))
    return stability_report(
        name="dyadic-pieces",
        coarse_sup=worst,
        fine_sup=worst,
        growth_tolerance=1.0,
        rows=rows,
        slope_checks={"telescoping": telescoping <= 1e-8, "l2_bound": worst <= 1.0 + 1e-9},
        details={"n": sp.n, "R": p.R, "j_max": j_max, "telescoping_error": telescoping, "heat_l2": heat_norm},
    )


def infinity_lq_norm(
    sp: SpaceParams,
    p: RieszParams,
    q_exp: float,
    r_max: float = 10.0,
    quad: Optional[QuadratureSpec] = None,
) -> float:
    """
    (∫_{r>1} |κ_R^{z,∞}(r)|^q δ(r) dr)^{1/q}

    [1, r_max] は求積し、その外は φ_0 型の包絡 K(1+r)e^{-ρr}r^{-Re z-1/2} で見積もる
    （K は末尾1割の区間で測る）。
    """
    if q_exp <= 2:
        raise ConfigError(f"q must be > 2, got {q_exp}")
    if r_max <= 1:
        raise ConfigError("r_max must exceed 1")
    if p.edge == 0.0:
        return 0.0
    quad = quad or QuadratureSpec()
    zeta = CutoffZeta()
    nodes, weights = _unit_ball_rule(p.edge, quad, 1.0, r_max, 2.0)
    kernel = riesz_kernel(sp, p, nodes, quad)
    values = (1.0 - zeta(nodes)) * kernel.values
    body = float(np.sum(np.abs(values) ** q_exp * weights * density(sp, nodes)))

    rho, zr = sp.rho, p.z.re

    def envelope(r: np.ndarray) -> np.ndarray:
        return (1.0 + r) * np.exp(-rho * r) * r ** (-zr - 0.5)

    last = nodes >= 0.9 * r_max
    K = float(np.max(np.abs(values[last]) / envelope(nodes[last])))
    span = 60.0 / ((q_exp - 2.0) * rho)
    tail = integrate(
        lambda r: (K * envelope(r)) ** q_exp * density(sp, r),
        np.linspace(r_max, r_max + span, 9),
        quad,
    ).value
    logger.debug(f"L^{q_exp:g} norm at infinity: body {body:.3e}, tail estimate {tail:.3e}")
    return float((body + tail) ** (1.0 / q_exp))


def check_lq_infinity(
    sp: SpaceParams,
    q_exp: float = 4.0,
    R_offsets: Sequence[float] = (1.0, 10.0, 100.0),
    r_max: float = 10.0,
    growth_tolerance: float = 0.10,
    z: Optional[float] = None,
    quad: Optional[QuadratureSpec] = None,
) -> BoundReport:
    """
    Re z ≥ n − 1/2 での ‖κ_R^{z,∞}‖_q の R に関する一様有界性

    R − ρ² をもう一桁延ばしても上限の増加が許容値未満なら合格。
    """
    zv = ComplexOrder.of(sp.n - 0.5 if z is None else z)
    offsets = sorted(float(o) for o in R_offsets)
    logger.info(f"L^q norm at infinity: n={sp.n}, q={q_exp:g}, z={zv}")
    norms = {o: infinity_lq_norm(sp, RieszParams.from_offset(sp, o, zv), q_exp, r_max, quad) for o in offsets}
    extended = infinity_lq_norm(sp, RieszParams.from_offset(sp, 10.0 * offsets[-1], zv), q_exp, r_max, quad)
    coarse = max(norms.values())
    return stability_report(
        name="lq-infinity",
        coarse_sup=coarse,
        fine_sup=max(coarse, extended),
        growth_tolerance=growth_tolerance,
        rows=[{"R_offset": o, "R": sp.rho ** 2 + o, "norm": v} for o, v in norms.items()],
        details={"n": sp.n, "q": q_exp, "z": [zv.re, zv.im], "extended_norm": extended},
    )
