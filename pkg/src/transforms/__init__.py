"""
積分と変換
"""

from .quadrature import QuadratureSpec, QuadratureResult, integrate, panel_rule

__all__ = ["QuadratureSpec", "QuadratureResult", "integrate", "panel_rule"]
