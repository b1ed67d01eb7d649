"""
レポート生成モジュール

検証結果（BoundReport / ConvergenceReport）とCSV/JSON出力
"""

from .bound_report import BoundReport, ConvergenceReport, fit_loglog_slope, fit_slope, stability_report
from .envelope import CalibrationEntry, ProfileEntry, ReportEnvelope, write_atomic

__all__ = [
    "BoundReport",
    "ConvergenceReport",
    "fit_loglog_slope",
    "fit_slope",
    "stability_report",
    "CalibrationEntry",
    "ProfileEntry",
    "ReportEnvelope",
    "write_atomic",
]
