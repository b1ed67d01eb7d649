"""
𝔞 ≅ ℝ 上のEuclidフーリエ変換

規約: (ℱ^{-1}m)(H) = (2π)^{-1} ∫_ℝ m(λ) e^{iλH} dλ。
偶関数 m に対しては (2π)^{-1} · 2 ∫_0^∞ m(λ) cos(λH) dλ。
"""

from typing import Optional, Sequence

import numpy as np

from ..data.grids import SpectralFunction, require_resolution
from .quadrature import QuadratureSpec


def euclidean_inverse_ft(
    m: SpectralFunction,
    hs: Sequence[float],
    quad: Optional[QuadratureSpec] = None,
    chunk: int = 512,
) -> np.ndarray:
    """
    偶関数 m の逆フーリエ変換

    Parameters
    ----------
    m : SpectralFunction
        [0, Λ_max] に台を持つ偶関数の右半分
    hs : sequence of float
        評価点
    quad : QuadratureSpec, optional
        積分設定（節点は m の格子で固定される）

    Returns
    -------
    np.ndarray
        (ℱ^{-1}m)(H)
    """
    hs = np.atleast_1d(np.asarray(hs, dtype=float))
    require_resolution(m.r_resolved, float(np.max(np.abs(hs), initial=0.0)), "euclidean inverse FT")
    weighted = m.values * m.weights
    out = np.empty(hs.shape, dtype=np.result_type(weighted, float))
    for start in range(0, hs.size, chunk):
        block = hs[start:start + chunk]
        out[start:start + chunk] = np.cos(np.outer(block, m.grid)) @ weighted
    return out / np.pi


def even_fourier_transform(
    values: np.ndarray,
    nodes: np.ndarray,
    weights: np.ndarray,
    ts: Sequence[float],
    chunk: int = 512,
) -> np.ndarray:
    """
    [0, ∞) 上の標本で与えた偶関数 h の変換 ĥ(t) = ∫_ℝ h(ξ) e^{-iξt} dξ = 2∫_0^∞ h cos(ξt) dξ

    Parameters
    ----------
    values, nodes, weights : np.ndarray
        求積節点での h の値、節点、重み
    ts : sequence of float
        評価点
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    weighted = values * weights
    out = np.empty(ts.shape, dtype=np.result_type(weighted, float))
    for start in range(0, ts.size, chunk):
        block = ts[start:start + chunk]
        out[start:start + chunk] = np.cos(np.outer(block, nodes)) @ weighted
    return 2.0 * out
