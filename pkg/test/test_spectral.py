#!/usr/bin/env python3
"""
정규형 고유값 문제 / 고유함수 전개 테스트
"""
import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from src.errors import GridMismatch, InputError, NonPositivePotential, ResolutionTooLow
from src.presets import resolve_potential
from src.spectral import (
    asymptotic_eigenvalue,
    eigen_residual,
    eigensystem_from_json,
    eigensystem_to_json,
    exact_zero_potential,
    extended_eigenvalues,
    l2_norm,
    project,
    simpson_weights,
    solve_eigensystem,
    synthesize,
)


@pytest.fixture(scope="module")
def free_system():
    return solve_eigensystem(np.zeros(2049), 20, 2049)


def test_zero_potential_eigenvalues(free_system):
    """g ≡ 0: λ_k = k²π² (상대오차 1e-6, k <= 20)"""
    k = np.arange(1, 21)
    rel = np.abs(free_system.eigenvalues / (k * np.pi) ** 2 - 1.0)
    print(f"최대 상대오차: {rel.max():.3e}")
    assert rel.max() <= 1e-6


def test_zero_potential_modes(free_system):
    exact = exact_zero_potential(3, 2049)
    assert np.allclose(free_system.modes[:3], exact.modes, atol=1e-6)
    assert np.all(free_system.modes[:, 0] == 0.0)
    assert np.all(free_system.modes[:, -1] == 0.0)
    assert np.all(free_system.modes[:, 1] > 0.0)


def test_constant_shift():
    """g ≡ 5 는 고유값을 정확히 5 만큼 올린다"""
    base = solve_eigensystem(resolve_potential("zero-potential"), 10, 1025)
    shifted = solve_eigensystem(resolve_potential("constant:5"), 10, 1025)
    assert np.allclose(shifted.eigenvalues - base.eigenvalues, 5.0, atol=1e-7)


def test_linear_potential_against_fine_grid():
    """g(x) = x: Richardson 결과와 훨씬 촘촘한 격자의 차분 고유값 비교"""
    sys = solve_eigensystem(resolve_potential("linear"), 5, 1025)
    n = 16385
    x = np.linspace(0.0, 1.0, n)
    h = x[1] - x[0]
    ref = eigh_tridiagonal(2.0 / h ** 2 + x[1:-1], np.full(n - 3, -1.0 / h ** 2),
                           eigvals_only=True, select="i", select_range=(0, 0))
    assert sys.eigenvalues[0] == pytest.approx(ref[0], rel=1e-7)


def test_orthonormal(free_system):
    """Simpson 내적에서 정규직교"""
    gram = (free_system.modes * free_system.weights) @ free_system.modes.T
    assert np.allclose(np.diag(gram), 1.0, atol=1e-10)
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) <= 1e-8


def test_project_mode_gives_unit_vector(free_system):
    c = project(free_system, free_system.modes[1]).values
    expected = np.zeros(free_system.n_modes)
    expected[1] = 1.0
    assert np.allclose(c, expected, atol=1e-10)


def test_project_synthesize_inverse(free_system):
    rng = np.random.default_rng(11)
    coeffs = rng.standard_normal(free_system.n_modes)
    v = synthesize(free_system, coeffs)
    assert np.allclose(project(free_system, v).values, coeffs, atol=1e-8)
    assert np.allclose(synthesize(free_system, project(free_system, v)), v, atol=1e-8)


def test_project_bump_closed_form(free_system):
    """x(1-x) 의 전개 계수 2√2 (1 - (-1)^k) / (kπ)³"""
    x = free_system.grid
    c = project(free_system, x * (1 - x)).values
    k = np.arange(1, free_system.n_modes + 1)
    exact = 2.0 * np.sqrt(2.0) * (1 - (-1.0) ** k) / (k * np.pi) ** 3
    assert np.allclose(c, exact, atol=1e-9)


def test_asymptotic_law():
    """λ_k - (k²π² + ∫g - ∫g cos 2kπx) 는 k 가 커지면 줄어든다"""
    sys = solve_eigensystem(resolve_potential("sine-bump"), 24, 2049)
    r10 = sys.eigenvalues[9] - asymptotic_eigenvalue(sys, 10)
    r20 = sys.eigenvalues[19] - asymptotic_eigenvalue(sys, 20)
    print(f"r_10 = {r10:.3e}, r_20 = {r20:.3e}")
    assert abs(r20) <= 0.5 * abs(r10) + 1e-6
    assert eigen_residual(sys, 1) <= 1e-3


def test_extended_eigenvalues(free_system):
    lams = extended_eigenvalues(free_system, 30)
    assert lams.size == 30
    assert np.array_equal(lams[:20], free_system.eigenvalues)
    assert lams[29] == pytest.approx((30 * np.pi) ** 2, rel=1e-12)


def test_resolution_and_input_errors():
    with pytest.raises(ResolutionTooLow):
        solve_eigensystem(np.zeros(2049), 300, 2049)
    with pytest.raises(NonPositivePotential):
        solve_eigensystem(resolve_potential("constant:-1"), 4, 257)
    with pytest.raises(GridMismatch):
        solve_eigensystem(np.zeros(100), 4, 257)
    with pytest.raises(InputError):
        solve_eigensystem(np.zeros(256), 4, 256)
    with pytest.raises(InputError):
        simpson_weights(np.linspace(0.0, 1.0, 10))


def test_project_grid_mismatch(free_system):
    with pytest.raises(GridMismatch):
        project(free_system, np.zeros(100))


def test_simpson_weights_exact_for_cubics():
    x = np.linspace(0.0, 1.0, 65)
    w = simpson_weights(x)
    assert w @ x ** 2 == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert w @ x ** 3 == pytest.approx(0.25, rel=1e-14)


def test_json_roundtrip():
    sys = solve_eigensystem(resolve_potential("linear"), 4, 129)
    back = eigensystem_from_json(eigensystem_to_json(sys))
    assert np.array_equal(back.eigenvalues, sys.eigenvalues)
    assert np.array_equal(back.modes, sys.modes)
    assert l2_norm(back, back.modes[0]) == pytest.approx(1.0, rel=1e-12)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
