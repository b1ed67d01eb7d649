"""
Riesz平均 数値検証ライブラリの使用例

このスクリプトは、較正・核の評価・収束実験・評価式チェックの基本的な使い方を示します。
"""

import numpy as np

from src.geometry.space import SpaceParams, modular_check
from src.kernels.cutoff import split_kernel
from src.kernels.heat import heat_kernel, heat_kernel_h3
from src.kernels.riesz_kernel import riesz_kernel
from src.multipliers.riesz_symbols import RieszParams
from src.reporting.envelope import ProfileEntry, ReportEnvelope
from src.riesz.operator import admissible_exponents, convergence_experiment, critical_index, heat_sample
from src.transforms.spherical import calibrate


def example_calibration(sp: SpaceParams):
    """逆変換定数の較正"""
    print("=" * 60)
    print(f"例1: H^{sp.n} の逆変換定数の較正")
    print("=" * 60)

    result = calibrate(sp)
    print(f"\n定数 C: {result.constant:.12g}")
    print(f"往復残差: {result.residual:.2e}")
    if sp.n == 3:
        print(f"H³ の理論値 1/(2π²): {1.0 / (2.0 * np.pi ** 2):.12g}")


def example_heat_kernel(sp: SpaceParams):
    """熱核と閉形式の比較"""
    print("\n" + "=" * 60)
    print("例2: 熱核 p_t(r)（t = 1）")
    print("=" * 60)

    rs = np.linspace(0.0, 3.0, 7)
    kernel = heat_kernel(sp, 1.0, rs)
    print(f"\n{'r':>6} {'p_t(r)':>16} {'閉形式':>16}")
    for r, value, exact in zip(rs, kernel.values, heat_kernel_h3(1.0, rs)):
        print(f"{r:6.2f} {value:16.10e} {exact:16.10e}")


def example_riesz_kernel(sp: SpaceParams):
    """Riesz核と局所・無限遠部分への分解"""
    print("\n" + "=" * 60)
    print("例3: Riesz核 κ_R^z（R = ρ²+100, z = n − 1/2）")
    print("=" * 60)

    p = RieszParams.from_offset(sp, 100.0, sp.n - 0.5)
    rs = np.linspace(0.0, 4.0, 9)
    kernel = riesz_kernel(sp, p, rs)
    local, infinity = split_kernel(kernel)
    print(f"\n{'r':>6} {'κ':>14} {'局所部分':>14} {'無限遠部分':>14}")
    for i, r in enumerate(rs):
        print(f"{r:6.2f} {kernel.values[i]:14.6e} {local.values[i]:14.6e} {infinity.values[i]:14.6e}")


def example_convergence(sp: SpaceParams):
    """熱核を試験関数とした収束実験"""
    print("\n" + "=" * 60)
    print("例4: S_R^z f → f の収束（p = 1, z = 2.6）")
    print("=" * 60)

    print(f"\n臨界指数 Z_0(n, 1) = {critical_index(sp.n, 1.0)}")
    R_grid = sp.rho ** 2 + np.array([10.0, 100.0, 1000.0, 10000.0])
    report = convergence_experiment(sp, 2.6, heat_sample(sp, 0.5), 1.0, np.linspace(0.0, 3.0, 13), R_grid)
    for R, err in zip(report.R_grid, report.sup_errors):
        print(f"  R = {R:10.1f}: 最大誤差 {err:.3e}")
    print(f"判定: {report.verdict}（往復誤差下限 {report.floor:.2e}）")


def example_bound_check(sp: SpaceParams):
    """評価式チェックとレポート出力"""
    print("\n" + "=" * 60)
    print("例5: 評価式チェックとレポート")
    print("=" * 60)

    report = modular_check(sp)
    print(f"\n{report.name}: {'合格' if report.passed else '不合格'} ({report.message})")

    envelope = ReportEnvelope("verify", {"n": sp.n})
    envelope.add(report)
    k = heat_kernel(sp, 1.0, np.linspace(0.0, 2.0, 5))
    envelope.add(ProfileEntry(k.label, k.rs, k.values, k.floor, k.params))
    print(envelope.to_json()[:400] + "...")

    print("\n有界性に使える指数（n=3, p=1, q=4）:")
    for key, value in admissible_exponents(sp.n, 1.0, 4.0).items():
        print(f"  {key}: {value}")


def main():
    """メイン実行"""
    print("\n" + "=" * 60)
    print("双曲空間上のRiesz平均 数値検証 - 使用例")
    print("=" * 60 + "\n")

    sp = SpaceParams(3)
    example_calibration(sp)
    example_heat_kernel(sp)
    example_riesz_kernel(sp)
    example_convergence(sp)
    example_bound_check(sp)

    print("\n" + "=" * 60)
    print("すべての例の実行が完了しました")
    print("=" * 60 + "\n")


if __name__ == "__main__":
    main()
