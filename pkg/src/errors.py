"""
例外クラス定義

ライブラリ関数は例外を送出し、終了コードへの対応付けはCLIのみが行う
"""


class RieszError(Exception):
    """本ライブラリのすべての例外の基底クラス"""

    exit_code = 1


class ConfigError(RieszError, ValueError):
    """設定値・事前条件の違反（終了コード 2）"""

    exit_code = 2


class DomainError(RieszError, ValueError):
    """数学的な定義域外の入力（Γの極、ν < -1/2、微分階数超過など）"""

    exit_code = 2


class QuadratureError(RieszError, ArithmeticError):
    """数値積分の予算超過・裾評価の失敗（終了コード 3）"""

    exit_code = 3


class CalibrationError(QuadratureError):
    """較正の往復残差が許容値を超えた、または較正が未実行"""


class ResolutionError(QuadratureError):
    """差分格子の解像度不足（刻み半減で結果が一致しない）"""
