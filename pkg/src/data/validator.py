"""
実行設定の検証モジュール

CLIフラグとYAML設定から作った実行設定が各モジュールの事前条件を
満たすかを検証する
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..errors import ConfigError
from ..geometry.space import SpaceParams
from ..transforms.quadrature import QuadratureSpec


OUTPUT_FORMATS = ("csv", "json")


def parse_R_grid(spec: str) -> Tuple[float, float, int, bool]:
    """
    "min:max:count:log" 形式の R-格子指定を解釈する

    最後の項目は "log" か "lin"（省略時は log）。

    Returns
    -------
    tuple
        (min, max, count, log)
    """
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"R grid must look like min:max:count[:log|lin], got '{spec}'")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"R grid has non-numeric fields: '{spec}'") from None
    scale = parts[3] if len(parts) == 4 else "log"
    if scale not in ("log", "lin"):
        raise ConfigError(f"R grid scale must be 'log' or 'lin', got '{scale}'")
    return lo, hi, count, scale == "log"


@dataclass
class RunConfig:
    """
    1回の実行の設定

    Attributes
    ----------
    command : str
        サブコマンド
    n : int
        次元
    z_re, z_im : float, optional
        Riesz指数（None ならコマンドごとの既定値）
    R : float, optional
        スペクトル尺度
    R_grid : tuple, optional
        (min, max, count, log)
    p : float
        収束実験の指数
    t : float
        熱核の時間
    checks : list of str
        実行する検証項目
    rel_tol, abs_tol : float
        積分の許容誤差
    out : str, optional
        出力パス（拡張子なし）
    fmt : str
        "csv" または "json"
    settings : dict
        YAML設定（CLIの上書き込み）
    skipped : dict
        この設定に当てはまらず飛ばした検証項目と理由
    """

    command: str
    n: int = 3
    z_re: Optional[float] = None
    z_im: float = 0.0
    R: Optional[float] = None
    R_grid: Optional[Tuple[float, float, int, bool]] = None
    p: float = 1.0
    t: float = 1.0
    checks: List[str] = field(default_factory=list)
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    out: Optional[str] = None
    fmt: str = "csv"
    settings: Dict[str, Any] = field(default_factory=dict)
    skipped: Dict[str, str] = field(default_factory=dict)

    @property
    def space(self) -> SpaceParams:
        return SpaceParams(self.n)

    @property
    def quad(self) -> QuadratureSpec:
        return QuadratureSpec.from_config(self.settings).with_tolerances(self.rel_tol, self.abs_tol)

    def z(self, default: float) -> complex:
        re = default if self.z_re is None else self.z_re
        return complex(re, self.z_im)

    def R_values(self) -> Optional[np.ndarray]:
        """R-格子の値（指定がなければ None）"""
        if self.R_grid is None:
            return None
        lo, hi, count, log = self.R_grid
        return np.geomspace(lo, hi, count) if log else np.linspace(lo, hi, count)

    def R_offset_range(self) -> Tuple[float, float, int]:
        """最大関数の既定の R 格子 (R − ρ² の最小, 最大, 点数)"""
        grids = self.settings.get("grids", {})
        return (
            float(grids.get("R_offset_min", 1.0)),
            float(grids.get("R_offset_max", 1e4)),
            int(grids.get("R_points", 32)),
        )

    def echo(self) -> Dict[str, Any]:
        """レポートに残す設定の写し（YAML全体は含めない）"""
        return {
            "command": self.command,
            "n": self.n,
            "z_re": self.z_re,
            "z_im": self.z_im,
            "R": self.R,
            "R_grid": list(self.R_grid) if self.R_grid is not None else None,
            "p": self.p,
            "t": self.t,
            "checks": list(self.checks),
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "format": self.fmt,
            "skipped": dict(self.skipped),
        }


class RunConfigValidator:
    """
    実行設定の事前条件を検証するクラス
    """

    def __init__(
        self,
        known_checks: Sequence[str] = (),
        real_order_checks: Sequence[str] = (),
        max_dimension: Optional[Dict[str, int]] = None,
    ):
        """
        Parameters
        ----------
        known_checks : sequence of str
            有効な検証項目名
        real_order_checks : sequence of str
            実数の z のみを受け付ける検証項目
        max_dimension : dict, optional
            検証項目ごとの対応する最大次元
        """
        self.known_checks = list(known_checks)
        self.real_order_checks = set(real_order_checks)
        self.max_dimension = dict(max_dimension or {})
        self.validation_results = {}

    def validate(self, run: RunConfig) -> Dict[str, Any]:
        """
        すべての事前条件を検証する

        Returns
        -------
        dict
            {"is_valid": bool, "checks": {名前: {"passed", "message"}}}
        """
        results = {"is_valid": True, "checks": {}}
        checks = [
            ("dimension", self._check_dimension(run)),
            ("riesz_order", self._check_order(run)),
            ("exponent", self._check_exponent(run)),
            ("spectral_scale", self._check_spectral_scale(run)),
            ("heat_time", self._check_heat_time(run)),
            ("tolerances", self._check_tolerances(run)),
            ("check_names", self._check_names(run)),
            ("check_scope", self._check_scope(run)),
            ("output_format", self._check_format(run)),
        ]
        for check_name, check_result in checks:
            results["checks"][check_name] = check_result
            if not check_result["passed"]:
                results["is_valid"] = False
                logger.warning(f"Config check failed: {check_name} ({check_result['message']})")

        self.validation_results = results
        return results

    def require_valid(self, run: RunConfig) -> RunConfig:
        """検証に失敗したら、違反した事前条件を列挙して ConfigError を送出する"""
        results = self.validate(run)
        if not results["is_valid"]:
            failed = [f"{k}: {v['message']}" for k, v in results["checks"].items() if not v["passed"]]
            raise ConfigError("invalid configuration; " + "; ".join(failed))
        return run

    def _check_dimension(self, run: RunConfig) -> Dict:
        passed = isinstance(run.n, (int, np.integer)) and run.n >= 2
        return {"passed": passed, "message": "n >= 2" if passed else f"n must be an integer >= 2, got {run.n}"}

    def _check_order(self, run: RunConfig) -> Dict:
        values = [run.z_im] + ([] if run.z_re is None else [run.z_re])
        if not all(math.isfinite(v) for v in values):
            return {"passed": False, "message": "z must be finite"}
        if run.z_re is not None and run.z_re < 0:
            return {"passed": False, "message": f"Re z must be >= 0, got {run.z_re}"}
        return {"passed": True, "message": "Re z >= 0"}

    def _check_exponent(self, run: RunConfig) -> Dict:
        passed = 1.0 <= run.p <= 2.0
        return {"passed": passed, "message": "p in [1, 2]" if passed else f"p must lie in [1, 2], got {run.p}"}

    def _check_spectral_scale(self, run: RunConfig) -> Dict:
        rho2 = 0.25 * (run.n - 1) ** 2 if isinstance(run.n, (int, np.integer)) else 0.0
        problems = []
        if run.R is not None and not run.R > rho2:
            problems.append(f"R must exceed rho^2={rho2:g}, got {run.R}")
        if run.R_grid is not None:
            lo, hi, count, log = run.R_grid
            if count < 1:
                problems.append(f"R grid count must be >= 1, got {count}")
            if not (rho2 < lo <= hi):
                problems.append(f"R grid must satisfy rho^2={rho2:g} < min <= max, got {lo}:{hi}")
        return {
            "passed": not problems,
            "violations": problems,
            "message": "R in (rho^2, inf)" if not problems else "; ".join(problems),
        }

    def _check_heat_time(self, run: RunConfig) -> Dict:
        passed = math.isfinite(run.t) and run.t > 0
        return {"passed": passed, "message": "t > 0" if passed else f"heat time must be positive, got {run.t}"}

    def _check_tolerances(self, run: RunConfig) -> Dict:
        passed = 0 < run.rel_tol < 1 and 0 < run.abs_tol < 1
        return {
            "passed": passed,
            "message": "tolerances in (0, 1)" if passed else f"tolerances must lie in (0, 1): rel={run.rel_tol}, abs={run.abs_tol}",
        }

    def _check_names(self, run: RunConfig) -> Dict:
        unknown = [c for c in run.checks if c not in self.known_checks]
        return {
            "passed": not unknown,
            "unknown": unknown,
            "message": "known checks" if not unknown else f"unknown check(s) {unknown}; valid: {', '.join(self.known_checks)}",
        }

    def _check_scope(self, run: RunConfig) -> Dict:
        problems = []
        if run.z_im != 0.0:
            problems.extend(f"{c} needs real z, got Im z={run.z_im}" for c in run.checks if c in self.real_order_checks)
        for c in run.checks:
            limit = self.max_dimension.get(c)
            if limit is not None and isinstance(run.n, (int, np.integer)) and run.n > limit:
                problems.append(f"{c} supports n <= {limit}, got n={run.n}")
        return {
            "passed": not problems,
            "violations": problems,
            "message": "checks apply to this configuration" if not problems else "; ".join(problems),
        }

    def _check_format(self, run: RunConfig) -> Dict:
        passed = run.fmt in OUTPUT_FORMATS
        return {"passed": passed, "message": "format ok" if passed else f"format must be one of {OUTPUT_FORMATS}, got {run.fmt}"}

    def generate_report(self) -> str:
        """検証結果のレポート文字列"""
        if not self.validation_results:
            return "No validation results available. Run validate() first."

        report = [f"Config status: {'VALID' if self.validation_results['is_valid'] else 'INVALID'}"]
        for check_name, check_result in self.validation_results["checks"].items():
            status = "ok" if check_result["passed"] else "FAIL"
            report.append(f"  [{status}] {check_name}: {check_result['message']}")
        return "\n".join(report)
