"""
複素ガンマ関数

Lanczos近似（g=7, 9項）と相反公式による Γ(w) と log|Γ(w)| の評価
"""

from typing import Union

import numpy as np

from ..errors import DomainError


_LANCZOS_G = 7.0
_LANCZOS_COEFFS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)

ComplexLike = Union[complex, float, np.ndarray]


def _check_poles(w: np.ndarray) -> None:
    on_axis = (w.imag == 0) & (w.real <= 0) & (w.real == np.round(w.real))
    if np.any(on_axis):
        raise DomainError(f"Gamma has a pole at nonpositive integer {w[on_axis][0].real:g}")


def _lanczos_series(w: np.ndarray) -> np.ndarray:
    # Re w >= 1/2 を前提に w-1 で展開
    x = w - 1.0
    a = np.full(w.shape, _LANCZOS_COEFFS[0], dtype=complex)
    for k, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        a = a + c / (x + k)
    return a


def _log_gamma_right(w: np.ndarray) -> np.ndarray:
    x = w - 1.0
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (x + 0.5) * np.log(t) - t + np.log(_lanczos_series(w))


def _log_sin_pi(w: np.ndarray) -> np.ndarray:
    # 虚部が大きいと sin(πw) は溢れるので指数の主要項を括り出す
    out = np.empty(w.shape, dtype=complex)
    upper = w.imag > 1.0
    lower = w.imag < -1.0
    mid = ~(upper | lower)
    out[mid] = np.log(np.sin(np.pi * w[mid]))
    wu = w[upper]
    out[upper] = -1j * np.pi * wu + np.log1p(-np.exp(2j * np.pi * wu)) - np.log(-2j)
    wl = w[lower]
    out[lower] = 1j * np.pi * wl + np.log1p(-np.exp(-2j * np.pi * wl)) - np.log(2j)
    return out


def log_gamma_complex(w: ComplexLike) -> np.ndarray:
    """
    log Γ(w) をベクトル化して評価する

    虚部は主値とは限らない（分枝は連続性を保証しない）。実部 log|Γ(w)| は正確。

    Parameters
    ----------
    w : complex or array_like
        引数（非正の整数は不可）

    Returns
    -------
    np.ndarray
        log Γ(w)
    """
    w = np.asarray(w, dtype=complex)
    _check_poles(w)
    out = np.empty(w.shape, dtype=complex)

    right = w.real >= 0.5
    if np.any(right):
        out[right] = _log_gamma_right(w[right])
    left = ~right
    if np.any(left):
        # 相反公式 Γ(w)Γ(1-w) = π / sin(πw)
        wl = w[left]
        out[left] = np.log(np.pi) - _log_sin_pi(wl) - _log_gamma_right(1.0 - wl)
    return out


def log_abs_gamma(w: ComplexLike) -> np.ndarray:
    """log|Γ(w)|"""
    return log_gamma_complex(w).real


def gamma_complex(w: ComplexLike) -> Union[complex, np.ndarray]:
    """
    複素ガンマ関数 Γ(w)

    帯 |Re w| ≤ 30, |Im w| ≤ 100 で12桁以上の精度を持つ。

    Parameters
    ----------
    w : complex or array_like
        引数

    Returns
    -------
    complex or np.ndarray
        Γ(w)。スカラー入力にはスカラーを返す

    Raises
    ------
    DomainError
        極（非正の整数）または倍精度のオーバーフロー
    """
    scalar = np.ndim(w) == 0
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    _check_poles(w)
    out = np.empty(w.shape, dtype=complex)

    right = w.real >= 0.5
    if np.any(right):
        wr = w[right]
        x = wr - 1.0
        t = x + _LANCZOS_G + 0.5
        with np.errstate(over="ignore", invalid="ignore"):
            out[right] = np.sqrt(2.0 * np.pi) * t ** (x + 0.5) * np.exp(-t) * _lanczos_series(wr)
    left = ~right
    if np.any(left):
        wl = w[left]
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out[left] = np.pi / (np.sin(np.pi * wl) * gamma_complex(1.0 - wl))

    if not np.all(np.isfinite(out)):
        bad = w[~np.isfinite(out)][0]
        raise DomainError(f"Gamma overflow at w={bad}")
    return complex(out[0]) if scalar else out
