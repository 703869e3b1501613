"""
정규형 Dirichlet 고유값 문제 -ω'' + g ω = λ ω  ([0, 1]) 풀이와 고유함수 전개

- 2차 중심 차분 → 대칭 삼중대각 행렬 → scipy.linalg.eigh_tridiagonal
- 격자 n, 2n-1 두 번 풀어 Richardson 외삽으로 O(h²) 편향 제거
- 모든 내적은 복합 Simpson 가중치 사용, 고유함수는 Simpson 내적에서 (Löwdin) 재직교화
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh, eigh_tridiagonal

from src.config import Config
from src.errors import GridMismatch, InputError, NonPositivePotential, ResolutionTooLow

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """고유계 (λ_k, ω_k), k = 1..n_modes"""

    grid: np.ndarray         # [0, 1] 균등 격자 (n 점)
    potential: np.ndarray    # g(grid)
    eigenvalues: np.ndarray  # (n_modes,)
    modes: np.ndarray        # (n_modes, n) 고유함수 샘플

    @property
    def n_modes(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def n_grid(self) -> int:
        return int(self.grid.size)

    @cached_property
    def weights(self) -> np.ndarray:
        return simpson_weights(self.grid)


@dataclass(frozen=True, eq=False)
class SpectralCoefficients:
    """고유함수 전개 계수 c_k = (v, ω_k)"""

    values: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise InputError("전개 계수에 유한하지 않은 값이 있습니다")

    @property
    def n_modes(self) -> int:
        return int(self.values.size)


def simpson_weights(grid: np.ndarray) -> np.ndarray:
    """균등 격자 복합 Simpson 가중치 (홀수 개 점)"""
    n = grid.size
    if n < 3 or n % 2 == 0:
        raise InputError(f"Simpson 적분에는 3 이상 홀수 개 격자점이 필요합니다: n={n}")
    h = (grid[-1] - grid[0]) / (n - 1)
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3.0


def l2_norm(sys: EigenSystem, v: np.ndarray) -> float:
    return float(np.sqrt(np.dot(sys.weights, np.asarray(v) ** 2)))


# ----------------------------------------------------------------------------
# 고유값 풀이
# ----------------------------------------------------------------------------

def _fd_eigenpairs(g_fine: Callable[[np.ndarray], np.ndarray], n: int, n_modes: int):
    x = np.linspace(0.0, 1.0, n)
    h = x[1] - x[0]
    diag = 2.0 / h ** 2 + g_fine(x[1:-1])
    off = np.full(n - 3, -1.0 / h ** 2)
    return eigh_tridiagonal(diag, off, select="i", select_range=(0, n_modes - 1))


def solve_eigensystem(
    g: Union[np.ndarray, Callable[[np.ndarray], np.ndarray]],
    n_modes: int = Config.N_MODES,
    n_grid: int = Config.N_GRID,
) -> EigenSystem:
    """정규형 연산자의 처음 n_modes 개 고유쌍 계산

    Args:
        g: [0, 1] 균등 격자(n_grid 점) 위의 포텐셜 샘플 또는 벡터 함수
        n_modes: 모드 개수 (<= n_grid / 8)
        n_grid: 격자 점 개수 (홀수)

    Returns:
        EigenSystem (λ 오름차순, ω_k(0+) > 0, Simpson 정규직교)
    """
    if n_grid < Config.MIN_GRID or n_grid % 2 == 0:
        raise InputError(f"n_grid 는 {Config.MIN_GRID} 이상의 홀수여야 합니다: {n_grid}")
    if n_modes < 1:
        raise InputError(f"n_modes 는 1 이상이어야 합니다: {n_modes}")
    if n_modes > n_grid / Config.RESOLUTION_FACTOR:
        raise ResolutionTooLow(
            f"n_modes={n_modes} > n_grid/{Config.RESOLUTION_FACTOR}={n_grid / Config.RESOLUTION_FACTOR:g}"
        )

    grid = np.linspace(0.0, 1.0, n_grid)
    if callable(g):
        g_fn = g
        g_samples = np.asarray(g(grid), dtype=float) * np.ones_like(grid)
    else:
        g_samples = np.asarray(g, dtype=float)
        if g_samples.shape != grid.shape:
            raise GridMismatch(f"포텐셜 샘플 {g_samples.shape} 이 격자 ({n_grid},) 와 다릅니다")
        g_fn = CubicSpline(grid, g_samples)
    if not np.all(np.isfinite(g_samples)):
        raise InputError("포텐셜에 유한하지 않은 값이 있습니다")
    if g_samples.min() < -1e-9 * max(1.0, float(np.abs(g_samples).max())):
        raise NonPositivePotential(f"min g = {g_samples.min():.6g} < 0")

    lam_h, _ = _fd_eigenpairs(g_fn, n_grid, n_modes)
    lam_half, vec_half = _fd_eigenpairs(g_fn, 2 * n_grid - 1, n_modes)
    eigenvalues = (4.0 * lam_half - lam_h) / 3.0

    # 세밀 격자의 짝수 점 = 원래 격자점
    modes = np.zeros((n_modes, n_grid))
    modes[:, 1:-1] = vec_half[1::2].T
    modes = _orthonormalize(modes, simpson_weights(grid))
    sign = np.sign(modes[:, 1])
    sign[sign == 0] = 1.0
    modes *= sign[:, None]

    if np.any(np.diff(eigenvalues) <= 0) or eigenvalues[0] <= 0:
        logger.warning("고유값이 단조 증가하지 않거나 양수가 아닙니다: 격자 해상도를 확인하세요")
    logger.info(
        f"고유값 계산 완료: n_modes={n_modes}, n_grid={n_grid}, "
        f"λ_1={eigenvalues[0]:.10g}, λ_{n_modes}={eigenvalues[-1]:.10g}"
    )
    return EigenSystem(grid=grid, potential=g_samples, eigenvalues=eigenvalues, modes=modes)


def _orthonormalize(modes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Simpson 내적에서 대칭(Löwdin) 정규직교화: Φ ← S^{-1/2} Φ"""
    gram = (modes * weights) @ modes.T
    vals, vecs = eigh(gram)
    inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.T
    return inv_sqrt @ modes


def exact_zero_potential(n_modes: int, n_grid: int) -> EigenSystem:
    """g ≡ 0 의 닫힌 형태 고유계 λ_k = k²π², ω_k = √2 sin(kπx)"""
    grid = np.linspace(0.0, 1.0, n_grid)
    k = np.arange(1, n_modes + 1)
    modes = np.sqrt(2.0) * np.sin(np.pi * np.outer(k, grid))
    modes[:, 0] = modes[:, -1] = 0.0
    return EigenSystem(
        grid=grid,
        potential=np.zeros_like(grid),
        eigenvalues=(k * np.pi) ** 2.0,
        modes=modes,
    )


def asymptotic_eigenvalue(sys: EigenSystem, k: int) -> float:
    """λ_k ≈ k²π² + ∫g - ∫g cos(2kπx)  (O(1/k) 항 제외)"""
    g = sys.potential
    w = sys.weights
    return float((k * np.pi) ** 2 + w @ g - w @ (g * np.cos(2 * k * np.pi * sys.grid)))


def extended_eigenvalues(sys: EigenSystem, k_max: int) -> np.ndarray:
    """k = 1..k_max 고유값. 계산된 모드는 그대로, 그 이후는 점근 법칙으로 채움"""
    resolved = sys.eigenvalues[:k_max]
    extra = [asymptotic_eigenvalue(sys, k) for k in range(sys.n_modes + 1, k_max + 1)]
    return np.concatenate([resolved, np.asarray(extra, dtype=float)])


def scale_eigenvalues(sys: EigenSystem, factor: float) -> EigenSystem:
    return dataclasses.replace(sys, eigenvalues=sys.eigenvalues * factor)


def eigen_residual(sys: EigenSystem, k: int) -> float:
    """‖ω_k'' - g ω_k + λ_k ω_k‖_{L²} (내부 점, 2차 차분)"""
    w = sys.modes[k - 1]
    h = sys.grid[1] - sys.grid[0]
    d2 = (w[:-2] - 2 * w[1:-1] + w[2:]) / h ** 2
    res = np.zeros_like(w)
    res[1:-1] = d2 - sys.potential[1:-1] * w[1:-1] + sys.eigenvalues[k - 1] * w[1:-1]
    return l2_norm(sys, res)


# ----------------------------------------------------------------------------
# 전개 / 합성
# ----------------------------------------------------------------------------

def project(sys: EigenSystem, v: np.ndarray, n_modes: Optional[int] = None) -> SpectralCoefficients:
    """c_k = (v, ω_k), Simpson 내적"""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != sys.n_grid:
        raise GridMismatch(f"샘플 길이 {v.shape[-1]} 이 격자 크기 {sys.n_grid} 와 다릅니다")
    count = sys.n_modes if n_modes is None else min(n_modes, sys.n_modes)
    return SpectralCoefficients(values=sys.modes[:count] @ (sys.weights * v))


def synthesize(sys: EigenSystem, c: Union[SpectralCoefficients, np.ndarray]) -> np.ndarray:
    """Σ c_k ω_k 를 격자에서 계산"""
    values = c.values if isinstance(c, SpectralCoefficients) else np.asarray(c, dtype=float)
    if values.size > sys.n_modes:
        raise GridMismatch(f"계수 {values.size}개가 모드 수 {sys.n_modes} 보다 많습니다")
    return values @ sys.modes[: values.size]


# ----------------------------------------------------------------------------
# JSON 입출력
# ----------------------------------------------------------------------------

def eigensystem_to_json(sys: EigenSystem) -> dict:
    return {
        "n_grid": sys.n_grid,
        "n_modes": sys.n_modes,
        "grid": sys.grid.tolist(),
        "potential": sys.potential.tolist(),
        "eigenvalues": sys.eigenvalues.tolist(),
        "modes": sys.modes.tolist(),
    }


def eigensystem_from_json(doc: dict) -> EigenSystem:
    try:
        sys = EigenSystem(
            grid=np.asarray(doc["grid"], dtype=float),
            potential=np.asarray(doc["potential"], dtype=float),
            eigenvalues=np.asarray(doc["eigenvalues"], dtype=float),
            modes=np.asarray(doc["modes"], dtype=float),
        )
    except KeyError as exc:
        raise InputError(f"고유계 JSON 에 필드가 없습니다: {exc}") from exc
    if sys.modes.shape != (sys.n_modes, sys.n_grid):
        raise GridMismatch(f"modes 모양 {sys.modes.shape} != ({sys.n_modes}, {sys.n_grid})")
    return sys
