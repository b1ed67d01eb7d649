"""
積分・球フーリエ変換・Euclidフーリエ変換・格子のユニットテスト
"""

import math

import numpy as np
import pytest
import sys
import yaml
from pathlib import Path

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.data.grids import RadialFunction, SpectralFunction, gaussian_decay_radius
from src.data.loader import CalibrationStore, load_defaults, merge_config
from src.errors import CalibrationError, ConfigError, DomainError, QuadratureError
from src.geometry.space import SpaceParams
from src.kernels.heat import heat_kernel_h3, heat_spectral_cutoff
from src.multipliers.riesz_symbols import RieszParams, eval_heat_multiplier, eval_riesz_multiplier
from src.transforms.euclidean import euclidean_inverse_ft, even_fourier_transform
from src.transforms.quadrature import QuadratureSpec, geometric_breakpoints, integrate, panel_rule
from src.transforms.spherical import (
    calibrate,
    calibration_constant,
    forward_transform,
    inverse_transform,
    inverse_transform_values,
    register_calibration,
)


def heat_profile(sp, t, lam_max):
    """H³ の閉形式熱核を動径関数として標本化する"""
    return RadialFunction.from_callable(
        sp,
        lambda r: heat_kernel_h3(t, r),
        gaussian_decay_radius(sp, t, 1e-14),
        lam_max=lam_max,
        scale=math.sqrt(t),
    )


class TestQuadrature:
    """Gauss-Legendreパネル積分のテスト"""

    def test_polynomial_exactness(self):
        """16点則は31次多項式まで厳密"""
        nodes, weights = panel_rule([0.0, 1.0], 16)
        assert nodes ** 31 @ weights == pytest.approx(1.0 / 32.0, rel=1e-13)

    def test_smooth_integral(self):
        """∫_0^π sin = 2"""
        result = integrate(np.sin, [0.0, math.pi], QuadratureSpec())
        assert float(result.value) == pytest.approx(2.0, rel=1e-12)

    def test_oscillatory_integral(self):
        """∫_0^10 cos(50x) dx = sin(500)/50"""
        result = integrate(lambda x: np.cos(50.0 * x), [0.0, 10.0], QuadratureSpec(), phase_span=np.array([500.0]))
        assert float(result.value) == pytest.approx(math.sin(500.0) / 50.0, abs=1e-12)

    def test_budget_exceeded(self):
        """パネル予算を超えると QuadratureError"""
        with pytest.raises(QuadratureError):
            integrate(np.sin, [0.0, 1.0], QuadratureSpec(max_panels=1))

    def test_invalid_spec(self):
        """1周期あたり8点未満は ConfigError"""
        with pytest.raises(ConfigError):
            QuadratureSpec(osc_points_per_period=4)

    def test_geometric_breakpoints(self):
        """右端に向かって幅が半分ずつになる"""
        assert np.allclose(geometric_breakpoints(0.0, 1.0, 3), [0.0, 0.5, 0.75, 0.875, 1.0])
        assert np.allclose(geometric_breakpoints(0.0, 1.0, 2, toward="left"), [0.0, 0.25, 0.5, 1.0])

    def test_breakpoints_must_increase(self):
        """区分点が単調でなければ ConfigError"""
        with pytest.raises(ConfigError):
            panel_rule([0.0, 1.0, 0.5], 8)


class TestGrids:
    """標本格子のテスト"""

    def test_invalid_radial_grid(self):
        """単調でない格子は ConfigError"""
        with pytest.raises(ConfigError):
            RadialFunction(np.array([0.0, 2.0, 1.0]), np.zeros(3), np.ones(3))

    def test_nonfinite_values(self):
        """非有限の値は DomainError"""
        with pytest.raises(DomainError):
            RadialFunction(np.array([0.0, 1.0]), np.array([0.0, np.nan]), np.ones(2))

    def test_add_requires_shared_grid(self):
        """格子が違う関数は足せない"""
        sp = SpaceParams(3)
        f = RadialFunction.on_grid(sp, [0.0, 1.0, 2.0], [1.0, 1.0, 1.0])
        g = RadialFunction.on_grid(sp, [0.0, 1.0, 3.0], [1.0, 1.0, 1.0])
        with pytest.raises(ConfigError):
            f + g

    def test_spectral_rule_respects_edges(self):
        """区分点は求積則のパネル境界になる"""
        edge = 2.7
        nodes, weights = SpectralFunction.rule(10.0, edges=[edge], edge_levels=6)
        assert weights[nodes < edge].sum() == pytest.approx(edge, rel=1e-13)

    def test_spectral_grid_beyond_cutoff(self):
        """格子が lam_max を超えると ConfigError"""
        with pytest.raises(ConfigError):
            SpectralFunction(np.array([0.0, 2.0]), np.zeros(2), np.ones(2), lam_max=1.0)


class TestForwardTransform:
    """球フーリエ変換のテスト"""

    def test_heat_kernel_transform(self):
        """𝓗p_t(λ) = e^{-t(λ²+ρ²)}（H³）"""
        sp = SpaceParams(3)
        t = 0.5
        f = heat_profile(sp, t, lam_max=3.0)
        lams = np.array([0.0, 1.0, 3.0])
        spec = forward_transform(sp, f, lams)
        assert np.allclose(spec.values, np.exp(-t * (lams ** 2 + 1.0)), rtol=1e-8, atol=1e-14)

    def test_zero_function(self):
        """f ≡ 0 の変換は0"""
        sp = SpaceParams(2)
        f = RadialFunction.from_callable(sp, lambda r: np.zeros(np.shape(r)), 5.0)
        spec = forward_transform(sp, f, [0.0, 1.0, 2.0])
        assert np.all(spec.values == 0.0)

    def test_linearity(self):
        """𝓗(αf + βg) = α𝓗f + β𝓗g"""
        sp = SpaceParams(3)
        f = heat_profile(sp, 0.5, lam_max=4.0)
        g = RadialFunction(f.grid, heat_kernel_h3(0.25, f.grid), f.weights, f.lam_resolved)
        lams = np.linspace(0.0, 4.0, 9)
        combined = forward_transform(sp, f.scaled(2.0) + g.scaled(-3.0), lams).values
        separate = 2.0 * forward_transform(sp, f, lams).values - 3.0 * forward_transform(sp, g, lams).values
        assert np.max(np.abs(combined - separate)) < 1e-12

    def test_slow_decay_rejected(self):
        """打ち切り半径で減衰していない関数は QuadratureError"""
        sp = SpaceParams(3)
        f = RadialFunction.from_callable(sp, lambda r: np.exp(-0.1 * r), 5.0)
        with pytest.raises(QuadratureError):
            forward_transform(sp, f, [0.0, 1.0])

    def test_lambdas_must_increase(self):
        """スペクトル点が単調でなければ ConfigError"""
        sp = SpaceParams(3)
        f = heat_profile(sp, 1.0, lam_max=2.0)
        with pytest.raises(ConfigError):
            forward_transform(sp, f, [1.0, 0.5])


class TestInverseTransform:
    """逆球フーリエ変換と較正のテスト"""

    def test_heat_kernel_h3(self, calibrated_h3):
        """逆変換 𝓗^{-1}w_t が閉形式熱核に一致する"""
        sp = calibrated_h3
        t = 1.0
        rs = np.array([0.0, 0.5, 1.0, 2.0])
        m = SpectralFunction.from_callable(
            lambda lam: eval_heat_multiplier(sp, t, lam),
            heat_spectral_cutoff(sp, t, 1e-14),
            r_max=float(rs[-1]),
        )
        values = inverse_transform(sp, m, rs).values
        assert values[0] == pytest.approx((4.0 * math.pi * t) ** -1.5 * math.exp(-t), rel=1e-6)
        assert np.allclose(values, heat_kernel_h3(t, rs), rtol=1e-6)

    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_round_trip(self, calibrated_h3, t):
        """𝓗^{-1}𝓗g = g（相対誤差1e-6以内）"""
        sp = calibrated_h3
        lam_max = heat_spectral_cutoff(sp, t, 1e-14)
        rs = np.array([0.0, 0.5, 1.0, 2.0, 3.0])
        g = heat_profile(sp, t, lam_max)
        nodes, weights = SpectralFunction.rule(lam_max, r_max=float(rs[-1]))
        spectrum = forward_transform(sp, g, nodes, weights=weights, lam_max=lam_max, r_resolved=float(rs[-1]))
        values, _ = inverse_transform_values(sp, spectrum, rs)
        target = heat_kernel_h3(t, rs)
        assert np.max(np.abs(values - target)) / np.max(np.abs(target)) <= 1e-6

    def test_zero_multiplier(self, calibrated_h2):
        """m ≡ 0 の逆変換は0"""
        m = SpectralFunction.from_callable(lambda lam: np.zeros(np.shape(lam)), 5.0, r_max=2.0)
        assert np.all(inverse_transform(calibrated_h2, m, [0.0, 1.0, 2.0]).values == 0.0)

    def test_compact_support_independent_of_cutoff(self, calibrated_h3):
        """s_R^z の逆変換は Λ_max ≥ √(R−ρ²) に依らない"""
        sp = calibrated_h3
        p = RieszParams.from_offset(sp, 16.0, 3.0)
        rs = np.array([0.0, 1.0, 2.0])
        values = []
        for lam_max in (p.edge, 2.0 * p.edge):
            m = SpectralFunction.from_callable(
                lambda lam: eval_riesz_multiplier(p, lam), lam_max, r_max=2.0, edges=[p.edge], edge_levels=4
            )
            values.append(inverse_transform(sp, m, rs).values)
        assert np.allclose(values[0], values[1], rtol=1e-8, atol=1e-12)

    def test_h3_constant(self, calibrated_h3):
        """H³ の較正定数は 1/(2π²)"""
        assert calibration_constant(calibrated_h3) == pytest.approx(1.0 / (2.0 * math.pi ** 2), rel=1e-6)

    def test_recalibration_is_stable(self, calibrated_h2):
        """再較正しても定数は1e-8以内で一致する"""
        result = calibrate(calibrated_h2, register=False)
        assert result.residual <= 1e-6
        assert result.constant == pytest.approx(calibration_constant(calibrated_h2), rel=1e-8)

    def test_uncalibrated_dimension(self):
        """較正前の次元は CalibrationError"""
        with pytest.raises(CalibrationError):
            calibration_constant(SpaceParams(11))

    def test_register_is_write_once(self):
        """登録は最初の1回だけ有効"""
        first = register_calibration(13, 1.5)
        assert register_calibration(13, 2.5) == first == 1.5


class TestEuclideanTransform:
    """Euclidフーリエ変換のテスト"""

    def test_gaussian(self):
        """(2π)^{-1}∫e^{-λ²}e^{iλH}dλ = e^{-H²/4}/(2√π)"""
        m = SpectralFunction.from_callable(lambda lam: np.exp(-lam ** 2), 9.0, r_max=5.0)
        hs = np.linspace(0.0, 5.0, 11)
        assert np.allclose(euclidean_inverse_ft(m, hs), np.exp(-hs ** 2 / 4.0) / (2.0 * math.sqrt(math.pi)), atol=1e-13)

    def test_origin_is_mean(self):
        """H = 0 では (2π)^{-1}∫m"""
        m = SpectralFunction.from_callable(lambda lam: 1.0 / (1.0 + lam ** 2) ** 3, 50.0, r_max=1.0)
        total = 2.0 * (m.values @ m.weights)
        assert euclidean_inverse_ft(m, [0.0])[0] == pytest.approx(total / (2.0 * math.pi), rel=1e-14)

    def test_even_transform_of_gaussian(self):
        """∫e^{-ξ²}e^{-iξt}dξ = √π e^{-t²/4}"""
        nodes, weights = panel_rule(np.linspace(0.0, 9.0, 10), 16)
        ts = np.array([0.0, 1.0, 3.0])
        values = even_fourier_transform(np.exp(-nodes ** 2), nodes, weights, ts)
        assert np.allclose(values, math.sqrt(math.pi) * np.exp(-ts ** 2 / 4.0), atol=1e-13)


class TestConfigLoader:
    """設定ファイルと較正ストアのテスト"""

    def test_defaults_have_sections(self):
        """既定設定は全セクションを持つ"""
        config = load_defaults()
        for section in ("quadrature", "grids", "calibration", "checks", "convergence", "cli"):
            assert section in config
        assert QuadratureSpec.from_config(config).order == config["quadrature"]["order"]

    def test_missing_file(self, tmp_path):
        """存在しないファイルは ConfigError"""
        with pytest.raises(ConfigError):
            load_defaults(tmp_path / "missing.yaml")

    def test_merge_config(self):
        """入れ子の辞書を再帰的に上書きする"""
        merged = merge_config({"a": {"b": 1, "c": 2}, "d": 3}, {"a": {"c": 5}})
        assert merged == {"a": {"b": 1, "c": 5}, "d": 3}

    def test_store_round_trip(self, tmp_path):
        """較正定数を保存して読み出せる"""
        store = CalibrationStore(tmp_path / "cal.yaml", version="9.9")
        store.put(3, 0.05066, 1e-9)
        entry = store.get(3)
        assert entry["constant"] == 0.05066
        assert store.get(2) is None

    def test_store_stale_version(self, tmp_path):
        """バージョン違いの値は使わない"""
        path = tmp_path / "cal.yaml"
        CalibrationStore(path, version="0.1").put(3, 0.05, 1e-9)
        assert CalibrationStore(path, version="0.2").get(3) is None
        assert yaml.safe_load(path.read_text(encoding="utf-8"))["constants"][3]["version"] == "0.1"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
