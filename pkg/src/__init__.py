"""
双曲空間上のRiesz平均 数値検証ライブラリ

階数1の対称空間 H^n における球フーリエ変換・乗数分解・核評価と、
各種評価式の数値検証（有限比・傾き回帰・オラクル比較）を行う
"""

__version__ = "1.0.0"
__author__ = "Riesz Means Verification Team"
