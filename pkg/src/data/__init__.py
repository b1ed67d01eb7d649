"""
設定と格子

設定ファイル・較正定数の読み書き、動径/スペクトル格子、実行設定の検証を行う
"""

from .loader import CalibrationStore, load_defaults, merge_config
from .grids import RadialFunction, SpectralFunction
from .validator import RunConfig, RunConfigValidator

__all__ = [
    "CalibrationStore",
    "load_defaults",
    "merge_config",
    "RadialFunction",
    "SpectralFunction",
    "RunConfig",
    "RunConfigValidator",
]
