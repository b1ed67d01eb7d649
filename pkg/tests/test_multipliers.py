"""
スペクトル乗数（Riesz乗数・二進分割・Mellin表示）のユニットテスト
"""

import math

import numpy as np
import pytest
import sys
from hypothesis import given, settings, strategies as st
from pathlib import Path

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.errors import ConfigError, DomainError
from src.geometry.space import SpaceParams
from src.multipliers.mellin import (
    check_dyadic_sobolev_growth,
    cutoff_profile,
    dyadic_bump,
    dyadic_imaginary_piece,
    eval_M,
    mellin_closed_form,
    mellin_reconstruct,
    mellin_transform_M,
)
from src.multipliers.partition import (
    MAX_OVERLAP,
    DyadicPiece,
    central_difference,
    check_hhat_tail,
    check_hjr_derivative_norms,
    eval_hjr,
    partition_chi,
    partition_overlap_count,
    richardson_derivative,
    support_interval,
    support_length_check,
)
from src.multipliers.riesz_symbols import (
    RieszParams,
    eval_h,
    eval_heat_multiplier,
    eval_riesz_multiplier,
    imaginary_power_multiplier,
)


@pytest.fixture
def h3():
    return SpaceParams(3)


class TestRieszMultiplier:
    """Riesz乗数のテスト"""

    def test_rejects_small_R(self, h3):
        """R < ρ² は ConfigError"""
        with pytest.raises(ConfigError):
            RieszParams(h3, 0.5, 1.0)

    def test_edge_and_offset(self, h3):
        """台の端は √(R − ρ²)"""
        p = RieszParams.from_offset(h3, 99.0, 2.0)
        assert p.R == 100.0
        assert p.r == 10.0
        assert p.edge == pytest.approx(math.sqrt(99.0))

    def test_vanishes_beyond_edge(self, h3):
        """λ ≥ 端 では厳密に0"""
        p = RieszParams(h3, 26.0, 1.5)
        lam = np.array([5.0, 5.5, 100.0])
        assert np.all(eval_riesz_multiplier(p, lam) == 0.0)

    def test_at_zero_order(self, h3):
        """z = 0 は台の内側で1"""
        p = RieszParams(h3, 26.0, 0.0)
        assert np.all(eval_riesz_multiplier(p, np.linspace(0.0, 4.9, 20)) == 1.0)

    def test_real_order_gives_real_values(self, h3):
        """実数の z では実数値"""
        p = RieszParams(h3, 10.0, 2.0)
        assert np.isrealobj(eval_riesz_multiplier(p, np.array([0.0, 1.0])))
        assert np.iscomplexobj(eval_riesz_multiplier(p.with_z(2.0 + 1.0j), np.array([0.0, 1.0])))

    @settings(max_examples=50, deadline=None)
    @given(
        offset=st.floats(min_value=0.01, max_value=1e4),
        z_re=st.floats(min_value=0.0, max_value=8.0),
        z_im=st.floats(min_value=-5.0, max_value=5.0),
    )
    def test_modulus_at_most_one(self, offset, z_re, z_im):
        """|s_R^z(λ)| ≤ 1"""
        sp = SpaceParams(3)
        p = RieszParams.from_offset(sp, offset, complex(z_re, z_im))
        lam = np.linspace(0.0, 1.2 * p.edge, 64)
        assert np.all(np.abs(eval_riesz_multiplier(p, lam)) <= 1.0 + 1e-14)

    @pytest.mark.parametrize("z", [0.5, 2.0, 3.0 + 2.0j])
    def test_factorization(self, h3, z):
        """s_R^z = h_r^z · w_{1/R}"""
        p = RieszParams(h3, 50.0, z)
        lam = np.linspace(0.0, 8.0, 81)
        product = eval_h(p, lam) * eval_heat_multiplier(h3, 1.0 / p.R, lam)
        assert np.allclose(product, eval_riesz_multiplier(p, lam), rtol=1e-13, atol=1e-15)

    def test_heat_multiplier(self, h3):
        """w_t(0) = e^{-tρ²}"""
        assert eval_heat_multiplier(h3, 2.0, 0.0) == pytest.approx(math.exp(-2.0))
        with pytest.raises(ConfigError):
            eval_heat_multiplier(h3, 0.0, 1.0)

    def test_imaginary_power_is_unimodular(self, h3):
        """|(λ²+ρ²)^{iγ}| = 1"""
        values = imaginary_power_multiplier(h3, 7.5, np.linspace(0.0, 50.0, 40))
        assert np.allclose(np.abs(values), 1.0)


class TestPartition:
    """二進分割のテスト"""

    def test_partition_of_unity(self):
        """Σ_j χ_j = 1"""
        xi = np.concatenate([np.linspace(0.0, 0.99, 400), 1.0 - np.geomspace(1e-2, 1e-6, 50)])
        total = sum(partition_chi(j, xi) for j in range(30))
        assert np.max(np.abs(total - 1.0)) < 1e-10

    def test_support(self):
        """χ_j は I_j の外で0"""
        for j in (0, 2, 5):
            lo, hi = support_interval(j)
            xi = np.linspace(0.0, 0.999, 2000)
            outside = (xi < lo) | (xi > hi)
            assert np.all(partition_chi(j, xi)[outside] == 0.0)

    def test_overlap_bounded(self):
        """同時に正となる片は高々3つ"""
        assert 1 <= partition_overlap_count() <= MAX_OVERLAP

    def test_outside_unit_interval(self):
        """[0, 1) の外は DomainError"""
        with pytest.raises(DomainError):
            partition_chi(0, 1.0)
        with pytest.raises(DomainError):
            partition_chi(0, -0.1)
        with pytest.raises(DomainError):
            partition_chi(-1, 0.5)

    def test_pieces_sum_to_h(self, h3):
        """Σ_j h_{j,r}^z = h_r^z（台の内側）"""
        p = RieszParams(h3, 400.0, 2.5)
        xi = np.linspace(0.0, 0.995 * p.edge, 300)
        total = sum(eval_hjr(DyadicPiece.of(j, p), p, xi) for j in range(40))
        assert np.allclose(total, eval_h(p, xi), rtol=1e-10, atol=1e-14)

    def test_piece_validation(self):
        """不正な片は ConfigError"""
        with pytest.raises(ConfigError):
            DyadicPiece(-1, 2.0)
        with pytest.raises(ConfigError):
            DyadicPiece(0, 0.0)

    def test_piece_scale(self):
        """尺度は r 2^{-j}"""
        assert DyadicPiece(3, 16.0).scale == 2.0


class TestFiniteDifferences:
    """数値微分のテスト"""

    def test_richardson_second_derivative(self):
        """sin'' = −sin"""
        x = np.linspace(0.0, 3.0, 31)
        assert np.allclose(richardson_derivative(np.sin, x, 2, 1e-2), -np.sin(x), atol=1e-8)

    def test_order_limit(self):
        """4階以上は DomainError"""
        with pytest.raises(DomainError):
            central_difference(np.sin, np.zeros(1), 4, 1e-2)


class TestSupportLength:
    """二進片の台の長さのテスト"""

    def test_support_length_h3(self, h3):
        """台の長さ / (r 2^{-j}) は有界で細分に安定"""
        report = support_length_check(h3, 2.0, j_max=6, points=2001)
        assert report.passed
        assert 0.5 < report.refined_sup_ratio <= 0.87
        assert report.details["overlap"] <= MAX_OVERLAP


class TestMellin:
    """Mellin表示のテスト"""

    def test_profile_values(self):
        """M(0) = 0、u ≥ 1 では −e^{−u}"""
        assert eval_M(0.0, 2.0) == 0.0
        assert eval_M(2.0, 2.0) == pytest.approx(-math.exp(-2.0))
        with pytest.raises(DomainError):
            eval_M(-1.0, 2.0)

    def test_rejects_zero_order(self):
        """Re z = 0 は ConfigError"""
        with pytest.raises(ConfigError):
            mellin_transform_M(0.0, [1.0])

    @pytest.mark.parametrize("z", [1.0, 2.5, 1.5 + 1.0j])
    def test_matches_closed_form(self, z):
        """数値積分と B(−iγ, z+1) − Γ(−iγ) の一致"""
        gammas = np.array([0.5, 3.0, 12.0, 40.0])
        numeric = mellin_transform_M(z, gammas)
        closed = mellin_closed_form(z, gammas)
        assert np.allclose(numeric, closed, rtol=1e-5, atol=0.0)

    def test_hermitian_for_real_order(self):
        """実数の z では 𝓜(−γ) = conj 𝓜(γ)"""
        gammas = np.array([1.0, 6.0])
        plus = mellin_transform_M(2.0, gammas)
        minus = mellin_transform_M(2.0, -gammas)
        assert np.allclose(minus, np.conj(plus), rtol=1e-9)

    @pytest.mark.slow
    def test_reconstruction(self):
        """逆変換で M(u) が再現される"""
        us = np.array([0.25, 0.5, 0.9, 3.0])
        recon = mellin_reconstruct(2.5, us)
        assert np.max(np.abs(recon - eval_M(us, 2.5))) < 1e-4

    def test_reconstruction_rejects_nonpositive(self):
        """u ≤ 0 は DomainError"""
        with pytest.raises(DomainError):
            mellin_reconstruct(2.0, [0.0])


class TestDyadicImaginaryPieces:
    """虚数冪の二進片のテスト"""

    def test_cutoff_profile(self):
        """b は μ ≤ 1 で1、μ ≥ 2 で0"""
        assert np.all(cutoff_profile(np.array([0.0, 0.5, 1.0])) == 1.0)
        assert np.all(cutoff_profile(np.array([2.0, 3.0])) == 0.0)

    def test_bumps_telescope(self):
        """β_0(μ) + Σ_k β_k(μ/2^k) = b(μ/2^K)"""
        mu = np.linspace(0.0, 200.0, 1001)
        K = 6
        total = dyadic_bump(0, mu) + sum(dyadic_bump(k, mu / 2.0 ** k) for k in range(1, K + 1))
        assert np.allclose(total, cutoff_profile(mu / 2.0 ** K), atol=1e-14)

    def test_piece_support(self, h3):
        """k ≥ 1 の片は [1/2, 2] の外で0"""
        mu = np.array([0.1, 0.49, 2.0, 5.0])
        assert np.all(dyadic_imaginary_piece(h3, 3.0, 2, mu) == 0.0)

    @pytest.mark.slow
    def test_sobolev_growth_h3(self, h3):
        """H³ でノルムの増大指数は [n/2]+1 = 2 以下"""
        report = check_dyadic_sobolev_growth(h3, gamma_range=tuple(np.geomspace(10.0, 100.0, 6)), k_max=3)
        assert report.details["order"] == 2
        assert report.passed


class TestDerivativeAndTailChecks:
    """微分ノルムとFourier変換の裾のチェックのテスト"""

    def test_derivative_norms_need_large_order(self, h3):
        """Re z ≤ k_max は ConfigError"""
        with pytest.raises(ConfigError):
            check_hjr_derivative_norms(RieszParams(h3, 4.0, 1.5), k_max=2)

    def test_hhat_rejects_bad_k(self, h3):
        """k は 1, 2, 3 のみ"""
        with pytest.raises(ConfigError):
            check_hhat_tail(RieszParams(h3, 400.0, 3.0), k=5)

    @pytest.mark.slow
    def test_derivative_norms_h3(self, h3):
        """j と r に対する傾きが記録される"""
        report = check_hjr_derivative_norms(RieszParams(h3, 4.0, 3.0), k_max=2)
        assert np.isfinite(report.refined_sup_ratio)
        assert {"j_k0", "r_k0"} <= set(report.slopes)
        assert report.slopes["j_k0"] == pytest.approx(-3.0, abs=0.3)

    @pytest.mark.slow
    def test_hhat_tail_h3(self, h3):
        """裾 T(s) は s について減衰する"""
        report = check_hhat_tail(RieszParams(h3, 400.0, 3.0), j=2, k=2)
        assert np.isfinite(report.refined_sup_ratio)
        assert report.slopes["s"] < 0.0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
