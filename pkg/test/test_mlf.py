#!/usr/bin/env python3
"""
Mittag-Leffler 엔진 테스트

기준값:
    E_{1/2,1}(-x) = e^{x²} erfc(x)  (scipy.special.erfcx)
    E_{1,1}(z) = e^z, E_{1,2}(z) = (e^z - 1)/z
    E_{2,1}(-x²) = cos x (α → 2 연속성)
"""
import math

import numpy as np
import pytest
from scipy import special

from src.errors import InvalidOrder, RegionTooSmall, UnsupportedRegion
from src.mlf import (
    MlfParams,
    mittag_leffler,
    mlf_asymptotic,
    mlf_derivative,
    mlf_eval,
    mlf_pole_terms,
    mlf_recurrence_residual,
    tabulate,
)


def test_trivial_values():
    """z = 0, α = 1 특수값"""
    assert mlf_eval(MlfParams(0.7, 1.0), 0.0) == 1.0
    assert mlf_eval(MlfParams(0.7, 3.0), 0.0) == pytest.approx(0.5, rel=1e-15)
    assert mlf_eval(MlfParams(1.0, 1.0), -1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert mlf_eval(MlfParams(1.0, 1.0), 1.0) == pytest.approx(math.e, rel=1e-14)
    assert mlf_eval(MlfParams(1.0, 2.0), -1e-3) == pytest.approx(math.expm1(-1e-3) / -1e-3, rel=1e-13)


@pytest.mark.parametrize("x", [0.5, 2.0, 5.0, 10.0, 15.0, 20.0, 40.0, 100.0, 1e4])
def test_half_order_matches_erfcx(x):
    """세 영역(급수, 중간, 점근) 모두 erfcx 와 일치"""
    value = mlf_eval(MlfParams(0.5, 1.0), -x)
    assert value == pytest.approx(special.erfcx(x), rel=1e-10)


def test_half_order_positive_side():
    assert mlf_eval(MlfParams(0.5, 1.0), 1.0) == pytest.approx(special.erfcx(-1.0), rel=1e-12)


def test_recurrence_random_points():
    """E_{α,μ}(z) = 1/Γ(μ) + z E_{α,μ+α}(z) 를 무작위 1000 점에서 확인"""
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        alpha = rng.uniform(0.1, 1.9)
        mu = [1.0, 2.0, alpha, alpha + 1.0][rng.integers(4)]
        z = -rng.uniform(0.0, 100.0)
        residual = abs(mlf_recurrence_residual(MlfParams(alpha, mu), z))
        worst = max(worst, residual)
    print(f"최대 점화식 잔차: {worst:.3e}")
    assert worst <= 1e-9


@pytest.mark.parametrize("delta", [1e-6, -1e-6])
def test_continuity_near_alpha_one(delta):
    """α = 1 ± 1e-6 은 e^{-x} 에 가깝다"""
    params = MlfParams(1.0 + delta, 1.0)
    for x in (0.1, 1.0, 5.0, 10.0, 30.0, 60.0):
        assert mlf_eval(params, -x) == pytest.approx(math.exp(-x), abs=1e-5)


def test_continuity_near_alpha_two():
    """α = 2 - 1e-6 은 cos x 에 가깝다 (z = -x²)"""
    params = MlfParams(2.0 - 1e-6, 1.0)
    for x in np.linspace(0.2, 10.0, 50):
        assert mlf_eval(params, -x * x) == pytest.approx(math.cos(x), abs=1e-4)


def test_sinc_near_alpha_two():
    """E_{2,2}(-x²) = sin x / x, α = 2 - 1e-6, x ∈ (0, 10]"""
    params = MlfParams(2.0 - 1e-6, 2.0)
    worst = 0.0
    for x in np.linspace(0.2, 10.0, 50):
        worst = max(worst, abs(mlf_eval(params, -x * x) - math.sin(x) / x))
    print(f"sinc 최대 오차: {worst:.3e}")
    assert worst <= 1e-5


def test_asymptotic_leading_term():
    """첫 항만 더한 점근 전개"""
    value = mlf_asymptotic(MlfParams(0.5, 1.0), -1e6, 1)
    assert value == pytest.approx(1.0 / (1e6 * math.gamma(0.5)), rel=1e-14)


def test_asymptotic_agrees_with_eval():
    """|z| = 1e4 에서 점근 전개 몇 항과 mlf_eval 비교"""
    p = MlfParams(0.7, 1.0)
    assert mlf_asymptotic(p, -1e4, 2) == pytest.approx(mlf_eval(p, -1e4), rel=1e-7)

    # 1 < α < 2 에서도 극점 항은 |z| = 1e4 에서 무시할 수 있을 만큼 작다
    p = MlfParams(1.5, 2.0)
    assert abs(mlf_pole_terms(p, -1e4)) < 1e-90
    expected = 1.0 / (1e4 * math.gamma(0.5))
    assert mlf_asymptotic(p, -1e4, 3) == pytest.approx(expected, rel=1e-7)
    assert mlf_eval(p, -1e4) == pytest.approx(expected, rel=1e-7)


def test_asymptotic_region_too_small():
    with pytest.raises(RegionTooSmall):
        mlf_asymptotic(MlfParams(0.5, 1.0), -10.0, 3)


def test_pole_terms_only_above_one():
    assert mlf_pole_terms(MlfParams(0.5, 1.0), -100.0) == 0.0
    assert mlf_pole_terms(MlfParams(1.5, 1.0), 0.5) == 0.0
    assert mlf_pole_terms(MlfParams(1.5, 1.0), -10.0) != 0.0


def test_decay_bound():
    """0 < α <= 1 에서 |E_{α,1}(-x)| <= C / (1 + x)"""
    for alpha in (0.3, 0.6, 0.9, 1.0):
        coarse = np.linspace(0.0, 200.0, 41)
        C = max(abs(mlf_eval(MlfParams(alpha, 1.0), -x)) * (1 + x) for x in coarse)
        fine = np.linspace(0.0, 200.0, 397)
        for x in fine:
            assert abs(mlf_eval(MlfParams(alpha, 1.0), -x)) <= 1.05 * C / (1 + x)


@pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
def test_completely_monotone_decay(alpha):
    """E_{α,1}(-t) 는 t 에 대해 단조 감소"""
    values = mittag_leffler(alpha, 1.0, -np.linspace(0.0, 100.0, 301))
    assert np.all(np.diff(values) < 0)
    assert np.all(values > 0)


@pytest.mark.parametrize("lam", [1.0, 10.0, 100.0])
@pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
def test_integral_derivative_relation(alpha, lam):
    """d/dt [t^α E_{α,α+1}(-λt^α)] = t^{α-1} E_{α,α}(-λt^α), t ∈ [0.1, 2]

    λ = 100 이면 인자가 중간 영역과 점근 영역까지 간다. 5점 중심차분, h = t/100.
    """

    def F(s):
        return s ** alpha * mlf_eval(MlfParams(alpha, alpha + 1.0), -lam * s ** alpha)

    worst = 0.0
    for t in np.linspace(0.1, 2.0, 9):
        h = 1e-2 * t
        numeric = (-F(t + 2 * h) + 8 * F(t + h) - 8 * F(t - h) + F(t - 2 * h)) / (12 * h)
        exact = t ** (alpha - 1.0) * mlf_eval(MlfParams(alpha, alpha), -lam * t ** alpha)
        worst = max(worst, abs(numeric / exact - 1.0))
    print(f"α={alpha}, λ={lam}: 최대 상대오차 {worst:.3e}")
    assert worst <= 1e-6


def test_mlf_derivative_matches_difference():
    alpha, lam, t = 0.6, 5.0, 0.3
    h = 1e-6

    def E(s):
        return mlf_eval(MlfParams(alpha, 1.0), -lam * s ** alpha)

    numeric = (E(t + h) - E(t - h)) / (2 * h)
    assert mlf_derivative(alpha, lam, t) == pytest.approx(numeric, rel=1e-6)
    with pytest.raises(ValueError):
        mlf_derivative(alpha, lam, 0.0)


def test_invalid_inputs():
    for alpha in (0.0, 2.0, -0.5, float("nan")):
        with pytest.raises(InvalidOrder):
            MlfParams(alpha, 1.0)
    with pytest.raises(UnsupportedRegion):
        mlf_eval(MlfParams(0.5, 1.0), 2.0)
    # InputError 는 ValueError 이기도 하다
    with pytest.raises(ValueError):
        mlf_eval(MlfParams(0.5, 1.0), float("inf"))


def test_tabulate():
    table = tabulate(MlfParams(0.5, 1.0), -10.0, 0.0, 11)
    assert list(table.columns) == ["z", "E"]
    assert len(table) == 11
    assert table["E"].iloc[-1] == 1.0
    assert np.allclose(table["E"], special.erfcx(-table["z"]), rtol=1e-10)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
