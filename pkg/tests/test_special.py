"""
特殊関数（Γ, Bessel, 次数パラメータ）のユニットテスト
"""

import math

import numpy as np
import pytest
import scipy.special as sps
import sys
from hypothesis import given, settings, strategies as st
from pathlib import Path

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.errors import ConfigError, DomainError
from src.special.bessel import (
    bessel_j,
    bessel_j_regimes,
    derivative_coefficients,
    derivative_terms,
    script_j,
    script_j_decay_check,
    script_j_derivative,
)
from src.special.gamma import gamma_complex, log_abs_gamma
from src.special.orders import BesselOrder, ComplexOrder


class TestGammaComplex:
    """複素ガンマ関数のテスト"""

    def test_matches_scipy(self):
        """scipy.special.gamma との一致"""
        w = np.array([0.5, 1.0, 2.5 + 3.0j, -2.5 + 0.5j, 7.0 - 4.0j, 0.1 + 20.0j, -10.3 + 1.0j])
        assert np.allclose(gamma_complex(w), sps.gamma(w), rtol=1e-11, atol=0.0)

    def test_scalar_input_returns_scalar(self):
        """スカラー入力にはスカラーを返す"""
        value = gamma_complex(5.0)
        assert np.ndim(value) == 0
        assert abs(value - 24.0) < 1e-10

    def test_half_integer(self):
        """Γ(1/2) = √π"""
        assert abs(gamma_complex(0.5) - math.sqrt(math.pi)) < 1e-13

    @pytest.mark.parametrize("pole", [0.0, -1.0, -7.0])
    def test_poles_raise(self, pole):
        """非正の整数は DomainError"""
        with pytest.raises(DomainError):
            gamma_complex(pole)

    def test_log_abs_gamma_large_imaginary(self):
        """虚部が大きくても log|Γ| は溢れない"""
        w = np.array([0.25 + 300.0j, 2.0 - 500.0j])
        assert np.allclose(log_abs_gamma(w), sps.loggamma(w).real, rtol=1e-11)

    @settings(max_examples=60, deadline=None)
    @given(
        re=st.floats(min_value=-9.7, max_value=9.7),
        im=st.floats(min_value=0.3, max_value=10.0),
    )
    def test_recurrence(self, re, im):
        """Γ(w+1) = w Γ(w)"""
        w = complex(re, im)
        lhs = gamma_complex(w + 1.0)
        rhs = w * gamma_complex(w)
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)

    @settings(max_examples=40, deadline=None)
    @given(
        re=st.floats(min_value=0.1, max_value=20.0),
        im=st.floats(min_value=-20.0, max_value=20.0),
    )
    def test_conjugate_symmetry(self, re, im):
        """Γ(w̄) = conj Γ(w)"""
        w = complex(re, im)
        assert abs(gamma_complex(w.conjugate()) - np.conj(gamma_complex(w))) <= 1e-12 * abs(gamma_complex(w))


class TestBessel:
    """Bessel関数のテスト"""

    @pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 1.5, 2.5, 3.0])
    def test_bessel_j_matches_scipy(self, nu):
        """scipy.special.jv との一致（3つの計算領域をまたぐ）"""
        t = np.concatenate([np.geomspace(1e-3, 60.0, 300), [8.0, 30.0, 30.0001]])
        assert np.allclose(bessel_j(nu, t), sps.jv(nu, t), rtol=0.0, atol=1e-11)

    def test_script_j_at_origin(self):
        """𝒥_ν(0) = 1/(2^ν Γ(ν+1))"""
        for nu in (0.0, 0.5, 2.0, 3.5):
            assert abs(script_j(nu, 0.0) - 1.0 / (2.0 ** nu * math.gamma(nu + 1.0))) < 1e-15

    def test_script_j_half_order_closed_form(self):
        """𝒥_{1/2}(t) = √(2/π) sin t / t"""
        t = np.linspace(0.1, 50.0, 200)
        expected = math.sqrt(2.0 / math.pi) * np.sin(t) / t
        assert np.allclose(script_j(0.5, t), expected, atol=1e-12)

    def test_script_j_even(self):
        """𝒥_ν は偶関数"""
        t = np.linspace(0.1, 40.0, 50)
        assert np.allclose(script_j(1.5, -t), script_j(1.5, t))

    def test_regimes_agree_at_switch(self):
        """漸化式と漸近展開が切替点付近で一致する"""
        t = np.linspace(30.0, 40.0, 21)
        for nu in (0.0, 1.5, 3.0):
            recurrence, asymptotic = bessel_j_regimes(nu, t)
            assert np.max(np.abs(recurrence - asymptotic)) < 1e-11

    def test_negative_order_rejected(self):
        """ν < -1/2 は DomainError"""
        with pytest.raises(DomainError):
            script_j(-0.75, 1.0)

    def test_negative_argument_rejected(self):
        """bessel_j は t < 0 を受け付けない"""
        with pytest.raises(DomainError):
            bessel_j(1.0, -1.0)


class TestScriptJDerivative:
    """𝒥_ν の高階微分のテスト"""

    def test_first_derivative_terms(self):
        """𝒥'_ν(t) = -t 𝒥_{ν+1}(t)"""
        assert derivative_terms(1) == ((-1, 1, 1),)

    def test_second_derivative_terms(self):
        """𝒥''_ν = -𝒥_{ν+1} + t² 𝒥_{ν+2}"""
        assert sorted(derivative_terms(2)) == [(-1, 0, 1), (1, 2, 2)]

    def test_leading_coefficient(self):
        """先頭項の係数は (-1)^a"""
        for a in range(0, 7):
            assert derivative_coefficients(a)[0] == (-1) ** a

    @pytest.mark.parametrize("a", [1, 2, 3])
    @pytest.mark.parametrize("nu", [0.0, 0.5, 1.5, 3.0])
    def test_matches_finite_differences(self, nu, a):
        """a 階微分が (a-1) 階微分の中心差分に一致する"""
        t = np.linspace(0.5, 20.0, 40)
        h = 1e-4
        numeric = (script_j_derivative(nu, a - 1, t + h) - script_j_derivative(nu, a - 1, t - h)) / (2.0 * h)
        exact = script_j_derivative(nu, a, t)
        assert np.allclose(exact, numeric, rtol=1e-6, atol=1e-8)

    def test_depth_limit(self):
        """微分階数は6まで"""
        with pytest.raises(DomainError):
            script_j_derivative(1.0, 7, 1.0)


class TestEnvelopeCheck:
    """Bessel包絡の検証のテスト"""

    def test_decay_envelope_stable(self):
        """|𝒥_ν(t)| t^{ν+1/2} の上限は窓を広げても安定"""
        report = script_j_decay_check(1.0, 1.0, 200.0)
        assert report.passed
        assert report.refined_sup_ratio == pytest.approx(math.sqrt(2.0 / math.pi), rel=0.05)

    def test_bad_window_rejected(self):
        """窓が空なら DomainError"""
        with pytest.raises(DomainError):
            script_j_decay_check(1.0, 5.0, 1.0)


class TestOrders:
    """次数パラメータのテスト"""

    def test_complex_order_rejects_negative_real_part(self):
        """Re z < 0 は ConfigError"""
        with pytest.raises(ConfigError):
            ComplexOrder(-0.5)

    def test_complex_order_coercion(self):
        """複素数から作れる"""
        z = ComplexOrder.of(2.0 + 1.0j)
        assert (z.re, z.im) == (2.0, 1.0)
        assert not z.is_real
        assert ComplexOrder.of(z) is z

    def test_bessel_order_for_riesz(self):
        """Riesz核のBessel次数は Re z + 1/2"""
        assert BesselOrder.for_riesz(ComplexOrder(2.0)).nu == 2.5

    def test_bessel_order_requires_real_z(self):
        """複素 z のBessel表示は DomainError"""
        with pytest.raises(DomainError):
            BesselOrder.for_riesz(ComplexOrder(2.0, 1.0))

    def test_bessel_order_lower_bound(self):
        """ν < -1/2 は DomainError"""
        with pytest.raises(DomainError):
            BesselOrder(-0.6)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
