"""
Mellin表示

尺度不変な輪郭 M(u) = (1−u)₊^z − e^{−u} の Mellin変換
𝓜(γ) = (2π)^{-1} ∫_0^∞ M(u) u^{-iγ-1} du と、その逆変換
M(u) = ∫_ℝ 𝓜(γ) u^{iγ} dγ、および虚数冪乗数の二進片のSobolev型ノルムの増大
"""

import math
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from ..errors import ConfigError, DomainError
from ..geometry.space import SpaceParams
from ..reporting.bound_report import BoundReport, fit_loglog_slope, stability_report
from ..special.gamma import log_gamma_complex
from ..special.orders import ComplexOrder
from ..transforms.quadrature import QuadratureSpec, geometric_breakpoints, integrate, oscillation_subdivisions, panel_rule
from .partition import derivative_sup, psi
from .riesz_symbols import imaginary_power_multiplier

ArrayLike = Union[float, np.ndarray]

# u ∈ (0, SPLIT) はTaylor級数で積分する
SPLIT = 0.5
U_MAX = 40.0
TAYLOR_TERMS = 80


def eval_M(u: ArrayLike, z) -> ArrayLike:
    """
    M(u) = (1−u)₊^z − e^{−u}

    u = (λ²+ρ²)/R とすれば M(u) = s_R^z(λ) − w_{1/R}(λ)。
    """
    z = ComplexOrder.of(z)
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(arr < 0):
        raise DomainError("M(u) is defined for u >= 0")
    out = -np.exp(-arr).astype(complex)
    inside = arr < 1.0
    out[inside] += np.exp(z.value * np.log1p(-arr[inside]))
    if z.is_real:
        out = out.real
    return out[0] if np.ndim(u) == 0 else out


def _taylor_coefficients(z: complex, terms: int = TAYLOR_TERMS) -> np.ndarray:
    """M(u) = Σ_k a_k u^k の係数 a_k = (−1)^k [C(z,k) − 1/k!]"""
    coeffs = np.zeros(terms + 1, dtype=complex)
    binom, fact = 1.0 + 0j, 1.0
    for k in range(1, terms + 1):
        binom *= (z - k + 1) / k
        fact /= k
        coeffs[k] = (-1) ** k * (binom - fact)
    return coeffs


def _check_origin(z: ComplexOrder) -> None:
    # M(u)/u は u → 0 で a_1 = 1 − z に収束する
    u = 1e-8
    ratio = complex(eval_M(u, z)) / u
    a1 = 1.0 - z.value
    if not np.isfinite(ratio) or abs(ratio - a1) > 1e-3 * (1.0 + abs(a1)):
        raise DomainError(f"M(u)/u is not bounded near u=0 (ratio {ratio}, expected {a1})")


def mellin_transform_M(
    z,
    gammas: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
    chunk: int = 128,
) -> np.ndarray:
    """
    𝓜(γ) = (2π)^{-1} ∫_0^∞ M(u) u^{-iγ-1} du

    u < 1/2 はTaylor級数を項別積分し、残りは v = ln u で u = 1 の両側に分けて
    適応求積する（u = 1 側に幾何的に細かくする）。

    Parameters
    ----------
    z : ComplexOrder
        指数（Re z > 0）
    gammas : sequence of float
        評価点
    quad : QuadratureSpec, optional
        積分設定

    Returns
    -------
    np.ndarray
        𝓜(γ) の複素値
    """
    z = ComplexOrder.of(z)
    if z.re <= 0:
        raise ConfigError(f"Mellin transform needs Re z > 0, got {z.re}")
    _check_origin(z)
    quad = quad or QuadratureSpec()
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))

    coeffs = _taylor_coefficients(z.value)
    ks = np.arange(coeffs.size)
    v0 = math.log(SPLIT)
    bps = np.concatenate([
        geometric_breakpoints(v0, 0.0, 30, toward="right"),
        np.linspace(0.0, math.log(U_MAX), 9)[1:],
    ])

    def profile(v: np.ndarray) -> np.ndarray:
        return np.asarray(eval_M(np.exp(v), z), dtype=complex)

    out = np.empty(gammas.shape, dtype=complex)
    for start in range(0, gammas.size, chunk):
        block = gammas[start:start + chunk]
        g_max = float(np.max(np.abs(block)))

        def integrand(v: np.ndarray, block=block) -> np.ndarray:
            return profile(v)[None, :] * np.exp(-1j * np.outer(block, v))

        numeric = integrate(integrand, bps, quad, phase_span=np.diff(bps) * g_max).value
        # ∫_0^{1/2} u^{k-iγ-1} du = (1/2)^{k-iγ}/(k-iγ)
        expo = ks[None, 1:] - 1j * block[:, None]
        series = (np.exp(expo * v0) / expo) @ coeffs[1:]
        out[start:start + chunk] = (numeric + series) / (2.0 * math.pi)
    return out


def mellin_closed_form(z, gammas: Sequence[float]) -> np.ndarray:
    """𝓜(γ) = (2π)^{-1}[B(−iγ, z+1) − Γ(−iγ)]（γ ≠ 0）"""
    z = ComplexOrder.of(z)
    w = -1j * np.atleast_1d(np.asarray(gammas, dtype=float))
    lg = log_gamma_complex(w)
    beta = np.exp(lg + log_gamma_complex(z.value + 1.0) - log_gamma_complex(z.value + 1.0 + w))
    return (beta - np.exp(lg)) / (2.0 * math.pi)


def mellin_reconstruct(
    z,
    us: Sequence[float],
    cutoff: float = 400.0,
    quad: Optional[QuadratureSpec] = None,
) -> np.ndarray:
    """
    M(u) ≈ ∫_{−Γ}^{Γ} 𝓜(γ) u^{iγ} dγ

    Parameters
    ----------
    us : sequence of float
        正の評価点
    cutoff : float
        γ の打ち切り Γ
    """
    quad = quad or QuadratureSpec()
    us = np.atleast_1d(np.asarray(us, dtype=float))
    if np.any(us <= 0):
        raise DomainError("reconstruction points must be positive")
    logs = np.log(us)
    bps = np.linspace(-cutoff, cutoff, int(math.ceil(cutoff)) + 1)
    span = np.diff(bps) * max(float(np.max(np.abs(logs))), 1.0)
    nodes, weights = panel_rule(bps, quad.order, oscillation_subdivisions(span, quad))
    values = mellin_transform_M(z, nodes, quad)
    return np.exp(1j * np.outer(logs, nodes)) @ (values * weights)


def mellin_decay_check(
    z_values: Sequence[float] = (1.0, 2.5),
    gamma_min: float = 5.0,
    gamma_max: float = 200.0,
    gamma_points: int = 40,
    reconstruction_points: Sequence[float] = (0.25, 0.5, 0.9),
    reconstruction_cutoff: float = 400.0,
    reconstruction_tolerance: float = 1e-4,
    slope_tolerance: float = 0.2,
    growth_tolerance: float = 0.05,
    quad: Optional[QuadratureSpec] = None,
) -> BoundReport:
    """
    |𝓜(γ)| ≤ c(1+|γ|)^{−(Re z+1)} と逆変換の再現のチェック

    細分では γ の上端を倍にし点数を倍にする。閉形式との差とエルミート性は
    details に記録する。
    """
    quad = quad or QuadratureSpec()
    logger.info(f"Mellin decay check: z in {list(z_values)}")
    coarse_grid = np.geomspace(gamma_min, gamma_max, gamma_points)
    fine_grid = np.geomspace(gamma_min, 2.0 * gamma_max, 2 * gamma_points)

    rows, slopes, checks, details = [], {}, {}, {}
    coarse_sup = fine_sup = 0.0
    for zv in z_values:
        z = ComplexOrder.of(zv)
        expo = z.re + 1.0
        coarse = mellin_transform_M(z, coarse_grid, quad)
        fine = mellin_transform_M(z, fine_grid, quad)
        mod = np.abs(coarse)
        rows.extend({"z": z.re, "gamma": float(g), "abs_mellin": float(m)} for g, m in zip(coarse_grid, mod))

        fit = fit_loglog_slope(1.0 + coarse_grid, mod)
        slopes[f"z={z}"] = fit.slope
        checks[f"z={z}"] = fit.at_most(-expo, slope_tolerance)
        coarse_sup = max(coarse_sup, float(np.max(mod * (1.0 + coarse_grid) ** expo)))
        fine_sup = max(fine_sup, float(np.max(np.abs(fine) * (1.0 + fine_grid) ** expo)))

        closed = mellin_closed_form(z, coarse_grid)
        recon = mellin_reconstruct(z, reconstruction_points, reconstruction_cutoff, quad)
        target = np.asarray(eval_M(np.asarray(reconstruction_points), z))
        recon_error = float(np.max(np.abs(recon - target)))
        checks[f"reconstruction z={z}"] = recon_error <= reconstruction_tolerance
        entry: Dict[str, float] = {
            "closed_form_error": float(np.max(np.abs(coarse - closed) / np.abs(closed))),
            "reconstruction_error": recon_error,
        }
        if z.is_real:
            mirrored = mellin_transform_M(z, -coarse_grid[:5], quad)
            entry["hermitian_error"] = float(np.max(np.abs(mirrored - np.conj(coarse[:5]))))
        details[f"z={z}"] = entry

    return stability_report(
        name="mellin",
        coarse_sup=coarse_sup,
        fine_sup=fine_sup,
        growth_tolerance=growth_tolerance,
        rows=rows,
        slopes=slopes,
        slope_checks=checks,
        tolerance={"slope": slope_tolerance, "reconstruction": reconstruction_tolerance},
        details=details,
    )


def cutoff_profile(mu: ArrayLike) -> ArrayLike:
    """b(μ) = B(2−μ)/(B(2−μ)+B(μ−1))（μ ≤ 1 で1、μ ≥ 2 で0）"""
    mu = np.asarray(mu, dtype=float)
    left, right = psi(2.0 - mu), psi(mu - 1.0)
    return left / (left + right)


def dyadic_bump(k: int, mu: ArrayLike) -> ArrayLike:
    """β_0 = b、β_k(μ) = b(μ) − b(2μ)（k ≥ 1、台は [1/2, 2]）"""
    if k == 0:
        return cutoff_profile(mu)
    return cutoff_profile(mu) - cutoff_profile(2.0 * np.asarray(mu, dtype=float))


def dyadic_imaginary_piece(sp: SpaceParams, gamma: float, k: int, mu: ArrayLike) -> ArrayLike:
    """単位尺度に戻した二進片 m_k^γ(μ) = (4^k μ² + ρ²)^{iγ} β_k(μ)"""
    mu = np.asarray(mu, dtype=float)
    return imaginary_power_multiplier(sp, gamma, 2.0 ** k * mu) * dyadic_bump(k, mu)


def dyadic_sobolev_norm(sp: SpaceParams, gamma: float, k: int) -> Tuple[float, float]:
    """
    Σ_{m ≤ [n/2]+1} sup|∂^m m_k^γ|

    Returns
    -------
    tuple of float
        (刻み h での値, 刻み h/2 での値)
    """
    order = sp.half_dimension_floor + 1
    if order > 3:
        raise DomainError(f"Sobolev norm needs derivatives up to order {order}; at most 3 are supported")
    lo, hi = (0.0, 2.0) if k == 0 else (0.5, 2.0)
    freq = abs(gamma) * max(4.0, 1.0 / sp.rho) + 1.0
    step = min(2e-3, 1.0 / (16.0 * freq))
    mu = np.linspace(lo, hi, int(math.ceil((hi - lo) * 8.0 * freq)) + 401)

    def piece(x: np.ndarray) -> np.ndarray:
        return dyadic_imaginary_piece(sp, gamma, k, x)

    coarse = fine = 0.0
    for m in range(order + 1):
        c, f = derivative_sup(piece, mu, m, step)
        coarse += c
        fine += f
    return coarse, fine


def check_dyadic_sobolev_growth(
    sp: SpaceParams,
    gamma_range: Sequence[float] = tuple(np.geomspace(10.0, 200.0, 12)),
    k_max: int = 6,
    slope_tolerance: float = 0.2,
    growth_tolerance: float = 0.05,
) -> BoundReport:
    """
    ‖m_k^γ‖ ≤ c(1+|γ|)^{[n/2]+1} の増大指数チェック

    k = 0..k_max それぞれで log ノルムを log(1+|γ|) に回帰し、傾きが
    [n/2]+1 + tol 以下なら合格。γ = 0 でのノルムの k ≥ 1 に対するばらつきも記録する。
    """
    order = sp.half_dimension_floor + 1
    gammas = np.asarray(sorted(gamma_range), dtype=float)
    logger.info(f"Dyadic Sobolev growth: n={sp.n}, order {order}, k <= {k_max}")

    rows, slopes, checks = [], {}, {}
    coarse_sup = fine_sup = 0.0
    for k in range(k_max + 1):
        norms = [dyadic_sobolev_norm(sp, float(g), k) for g in gammas]
        fine = np.array([f for _, f in norms])
        rows.extend({"k": k, "gamma": float(g), "norm": float(v)} for g, v in zip(gammas, fine))
        fit = fit_loglog_slope(1.0 + np.abs(gammas), fine)
        slopes[f"k{k}"] = fit.slope
        checks[f"k{k}"] = fit.at_most(float(order), slope_tolerance)
        weight = (1.0 + np.abs(gammas)) ** order
        coarse_sup = max(coarse_sup, float(np.max(np.array([c for c, _ in norms]) / weight)))
        fine_sup = max(fine_sup, float(np.max(fine / weight)))

    at_zero = np.array([dyadic_sobolev_norm(sp, 0.0, k)[1] for k in range(1, k_max + 1)])
    spread = float(at_zero.max() / at_zero.min() - 1.0) if at_zero.size else 0.0
    return stability_report(
        name="sobolev-growth",
        coarse_sup=coarse_sup,
        fine_sup=fine_sup,
        growth_tolerance=growth_tolerance,
        rows=rows,
        slopes=slopes,
        slope_checks=checks,
        tolerance={"slope": slope_tolerance},
        details={"n": sp.n, "order": order, "gamma0_spread": spread},
    )
