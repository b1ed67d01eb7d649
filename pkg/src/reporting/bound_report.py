"""
検証結果レポート

評価式チェックの結果（BoundReport）と収束実験の結果（ConvergenceReport）、
およびそれらが使う有限比・傾き回帰の補助関数
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import statsmodels.api as sm
from loguru import logger


def _json_float(value: Any) -> Any:
    """NaN/inf をJSONで表せる形に変換する"""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, (complex, np.complexfloating)):
        return [_json_float(value.real), _json_float(value.imag)]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, dict):
        return {str(k): _json_float(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_json_float(v) for v in value]
    return value


@dataclass
class SlopeFit:
    """最小二乗による傾き推定の結果"""

    slope: float
    intercept: float
    stderr: float
    n_points: int

    def within(self, target: float, tolerance: float) -> bool:
        return abs(self.slope - target) <= tolerance

    def at_most(self, target: float, tolerance: float) -> bool:
        return self.slope <= target + tolerance


def fit_slope(x: Sequence[float], y: Sequence[float]) -> SlopeFit:
    """
    y = a + b x の最小二乗当てはめ（statsmodels OLS）

    Parameters
    ----------
    x, y : sequence of float
        説明変数と目的変数（有限値のみ使う）

    Returns
    -------
    SlopeFit
        傾き・切片・傾きの標準誤差
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = np.isfinite(x) & np.isfinite(y)
    x, y = x[mask], y[mask]
    if x.size < 2:
        return SlopeFit(float("nan"), float("nan"), float("nan"), int(x.size))

    model = sm.OLS(y, sm.add_constant(x, has_constant="add")).fit()
    stderr = float(model.bse[1]) if x.size > 2 else 0.0
    return SlopeFit(float(model.params[1]), float(model.params[0]), stderr, int(x.size))


def fit_loglog_slope(x: Sequence[float], y: Sequence[float], base: float = math.e) -> SlopeFit:
    """log y を log x に回帰する（正の値のみ使う）"""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    mask = (x > 0) & (y > 0) & np.isfinite(y)
    log = np.log if base == math.e else (lambda v: np.log(v) / np.log(base))
    return fit_slope(log(x[mask]), log(y[mask]))


def refinement_growth(coarse: float, fine: float) -> float:
    """格子を細かくしたときの上限値の相対増加率"""
    if not (np.isfinite(coarse) and np.isfinite(fine)):
        return float("inf")
    if coarse == 0:
        return 0.0 if fine == 0 else float("inf")
    return float(fine / coarse - 1.0)


@dataclass
class BoundReport:
    """
    評価式1件の検証結果

    Attributes
    ----------
    name : str
        チェック名
    passed : bool
        合否（有限・細分安定・傾き許容内）
    message : str
        判定の要約
    sup_ratio : float
        粗い格子での比の上限（測定された定数）
    refined_sup_ratio : float
        細分・拡張した格子での比の上限
    growth : float
        細分による相対増加率
    slopes : dict
        回帰で得た傾き
    tolerance : dict
        判定に使った許容値
    excluded : int
        雑音下限以下として除外した格子点数
    rows : list of dict
        格子点ごとの記録（CSV出力用）
    details : dict
        その他の測定値
    """

    name: str
    passed: bool
    message: str
    sup_ratio: float = float("nan")
    refined_sup_ratio: float = float("nan")
    growth: float = float("nan")
    slopes: Dict[str, float] = field(default_factory=dict)
    tolerance: Dict[str, float] = field(default_factory=dict)
    excluded: int = 0
    rows: List[Dict[str, Any]] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """JSON要約用の辞書（格子点の行は含めない）"""
        return _json_float({
            "name": self.name,
            "kind": "bound",
            "passed": bool(self.passed),
            "message": self.message,
            "sup_ratio": self.sup_ratio,
            "refined_sup_ratio": self.refined_sup_ratio,
            "growth": self.growth,
            "slopes": dict(self.slopes),
            "tolerance": dict(self.tolerance),
            "excluded": int(self.excluded),
            "details": dict(self.details),
        })

    def to_frame(self) -> pd.DataFrame:
        """格子点ごとの記録をDataFrameにする"""
        frame = pd.DataFrame(self.rows)
        if frame.empty:
            frame = pd.DataFrame({"check": [self.name], "sup_ratio": [self.sup_ratio]})
        else:
            frame.insert(0, "check", self.name)
        return frame


def stability_report(
    name: str,
    coarse_sup: float,
    fine_sup: float,
    growth_tolerance: float,
    rows: Optional[List[Dict[str, Any]]] = None,
    slopes: Optional[Dict[str, float]] = None,
    slope_checks: Optional[Dict[str, bool]] = None,
    excluded: int = 0,
    details: Optional[Dict[str, Any]] = None,
    tolerance: Optional[Dict[str, float]] = None,
) -> BoundReport:
    """
    有限・細分安定・傾き判定をまとめてBoundReportを作る

    Parameters
    ----------
    coarse_sup, fine_sup : float
        粗い格子と細分格子での上限
    growth_tolerance : float
        許容する相対増加率
    slope_checks : dict, optional
        傾きごとの判定結果
    """
    growth = refinement_growth(coarse_sup, fine_sup)
    finite = bool(np.isfinite(coarse_sup) and np.isfinite(fine_sup))
    stable = finite and growth < growth_tolerance
    slope_checks = slope_checks or {}
    slopes_ok = all(slope_checks.values())
    passed = finite and stable and slopes_ok

    problems = []
    if not finite:
        problems.append("sup ratio not finite")
    elif not stable:
        problems.append(f"refinement growth {growth:.3%} exceeds {growth_tolerance:.0%}")
    problems.extend(f"slope '{k}' out of tolerance" for k, ok in slope_checks.items() if not ok)
    message = "; ".join(problems) if problems else f"sup ratio {fine_sup:.6g} stable (growth {growth:.3%})"

    tol = {"growth": growth_tolerance}
    tol.update(tolerance or {})
    report = BoundReport(
        name=name,
        passed=passed,
        message=message,
        sup_ratio=float(coarse_sup),
        refined_sup_ratio=float(fine_sup),
        growth=growth,
        slopes=dict(slopes or {}),
        tolerance=tol,
        excluded=excluded,
        rows=rows or [],
        details=details or {},
    )
    if passed:
        logger.info(f"Check {name}: passed ({message})")
    else:
        logger.error(f"Check {name}: failed ({message})")
    return report


@dataclass
class ConvergenceReport:
    """
    収束実験の結果

    Attributes
    ----------
    test_function : str
        試験関数の識別子
    p : float
        指数 p
    z : complex
        Riesz指数
    R_grid : np.ndarray
        増加するRの列
    sup_errors : np.ndarray
        R ごとの標本点上の最大誤差
    point_errors : np.ndarray
        形 (len(R_grid), len(xs)) の誤差
    xs : np.ndarray
        標本点
    maximal : np.ndarray
        最大関数の標本値
    critical_index : float
        臨界指数 Z_0(n, p)
    monotone_ratio : float
        最後の誤差比 e_{k+1}/e_k の最大値
    final_error : float
        最大のRでの誤差
    floor : float
        往復変換の誤差下限
    verdict : str
        "converging" / "not-converging" / "below-critical-index"
    maximal_change : float, optional
        R 格子を倍に細かくしたときの最大関数の相対変化（未測定なら None）
    maximal_tolerance : float
        maximal_change の許容値
    """

    test_function: str
    p: float
    z: complex
    R_grid: np.ndarray
    sup_errors: np.ndarray
    point_errors: np.ndarray
    xs: np.ndarray
    maximal: np.ndarray
    critical_index: float
    monotone_ratio: float
    final_error: float
    floor: float
    verdict: str
    maximal_change: Optional[float] = None
    maximal_tolerance: float = 0.02

    @property
    def maximal_stable(self) -> Optional[bool]:
        if self.maximal_change is None:
            return None
        return bool(np.isfinite(self.maximal_change) and self.maximal_change < self.maximal_tolerance)

    @property
    def passed(self) -> bool:
        # 臨界指数以下では合否を主張しない
        return self.verdict in ("converging", "below-critical-index") and self.maximal_stable is not False

    def to_dict(self) -> Dict[str, Any]:
        return _json_float({
            "name": "convergence",
            "kind": "convergence",
            "passed": self.passed,
            "message": self._message(),
            "test_function": self.test_function,
            "p": self.p,
            "z": [self.z.real, self.z.imag],
            "critical_index": self.critical_index,
            "monotone_ratio": self.monotone_ratio,
            "final_error": self.final_error,
            "floor": self.floor,
            "verdict": self.verdict,
            "R_grid": list(self.R_grid),
            "sup_errors": list(self.sup_errors),
            "xs": list(self.xs),
            "maximal": list(self.maximal),
            "maximal_change": self.maximal_change,
            "maximal_stable": self.maximal_stable,
        })

    def _message(self) -> str:
        message = f"verdict {self.verdict}, final error {self.final_error:.3e}"
        if self.maximal_change is not None:
            state = "stable" if self.maximal_stable else "unstable"
            message += f", maximal function {state} under R-grid doubling (change {self.maximal_change:.3%})"
        return message

    def to_frame(self) -> pd.DataFrame:
        """CSV列: R, sup_error, 標本点ごとの誤差"""
        frame = pd.DataFrame({"R": self.R_grid, "sup_error": self.sup_errors})
        for i, x in enumerate(self.xs):
            frame[f"error_x{i}"] = self.point_errors[:, i]
        return frame
