"""
정방향 풀이: 모드별 해 V_k(t) (t > 0), W_k(t) (t < 0) 와 u(x, t) 조립

t > 0 (Caputo 분수 확산, 차수 α):
    V(t) = V0 E_{α,1}(-λt^α) + (f/λ)(1 - E_{α,1}(-λt^α))
t < 0, 문제 1 (파동, β = 2):
    W(t) = A sin(√λ t) + B cos(√λ t) + f/λ,  B = V0 - f/λ,  √λ A = f - λ V0
t < 0, 문제 2 (분수 파동, 1 < β < 2, s = -t):
    W(t) = W0 E_{β,1}(-λs^β) + t W0' E_{β,2}(-λs^β) + (f/λ)(1 - E_{β,1}(-λs^β)),
    W0 = V0,  W0' = f - λ V0

f t^α E_{α,α+1}(-λt^α) = (f/λ)(1 - E_{α,1}(-λt^α)) 항등식으로 정상상태가 정확히 유지됩니다.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import special

from src.config import Config
from src.errors import GridMismatch, InputError, InvalidOrder
from src.mlf import MlfParams, mlf_eval
from src.spectral import EigenSystem, SpectralCoefficients, l2_norm, synthesize

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """혼합형 문제 설정 (α, β, p, q, φ = u(·,q), ψ = u(·,-p))"""

    alpha: float
    beta: float
    p: float
    q: float
    phi: Optional[np.ndarray] = None
    psi: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise InvalidOrder(f"alpha 는 (0, 1] 범위여야 합니다: {self.alpha}")
        if not (self.beta == 2.0 or 1.0 < self.beta < 2.0):
            raise InvalidOrder(f"beta 는 2 또는 (1, 2) 범위여야 합니다: {self.beta}")
        if self.beta < 2.0 and self.alpha >= 1.0:
            raise InvalidOrder(f"분수 파동(1 < beta < 2)에서는 alpha 가 (0, 1) 범위여야 합니다: alpha={self.alpha}")
        if not (self.p > 0 and self.q > 0):
            raise InputError(f"p, q 는 양수여야 합니다: p={self.p}, q={self.q}")
        for name in ("phi", "psi"):
            data = getattr(self, name)
            if data is None:
                continue
            if abs(data[0]) > 1e-8 or abs(data[-1]) > 1e-8:
                raise InputError(f"{name} 는 x=0, 1 에서 0 이어야 합니다: ({data[0]:.3e}, {data[-1]:.3e})")

    @property
    def is_wave(self) -> bool:
        return self.beta == 2.0


@dataclass(frozen=True)
class ModeSolution:
    """모드 k 의 스칼라 데이터"""

    k: int
    lam: float
    f_k: float
    V0: float
    A: Optional[float] = None        # 문제 1
    B: Optional[float] = None        # 문제 1
    W0: Optional[float] = None       # 문제 2
    W0prime: Optional[float] = None  # 문제 2
    delta: Optional[float] = None    # Δ_k 또는 Δ̃_k


@dataclass(frozen=True, eq=False)
class SolutionField:
    """u(x, t) 샘플, u[i, j] = u(grid_x[j], grid_t[i])"""

    grid_x: np.ndarray
    grid_t: np.ndarray
    u: np.ndarray


def _e(alpha: float, beta: float, z: float) -> float:
    return mlf_eval(MlfParams(alpha, beta), z)


# ----------------------------------------------------------------------------
# 모드별 해
# ----------------------------------------------------------------------------

def mode_parabolic(alpha: float, lam: float, V0: float, f_k: float, t: float) -> float:
    """V_k(t), t >= 0"""
    if lam <= 0 or t < 0:
        raise InputError(f"lambda > 0, t >= 0 이어야 합니다: lambda={lam}, t={t}")
    steady = f_k / lam
    if t == 0:
        return V0
    e1 = _e(alpha, 1.0, -lam * t ** alpha)
    return V0 * e1 + steady * (1.0 - e1)


def caputo_parabolic(alpha: float, lam: float, V0: float, f_k: float, t: float) -> float:
    """C_D^α V_k(t) = (f - λV0) E_{α,1}(-λt^α), t > 0"""
    return (f_k - lam * V0) * _e(alpha, 1.0, -lam * t ** alpha)


def mode_wave(lam: float, A: float, B: float, f_k: float, t: float) -> float:
    """W_k(t), t <= 0 (β = 2)"""
    if lam <= 0 or t > 0:
        raise InputError(f"lambda > 0, t <= 0 이어야 합니다: lambda={lam}, t={t}")
    w = math.sqrt(lam)
    return A * math.sin(w * t) + B * math.cos(w * t) + f_k / lam


def wave_derivative(lam: float, A: float, B: float, t: float) -> float:
    w = math.sqrt(lam)
    return w * (A * math.cos(w * t) - B * math.sin(w * t))


def mode_fractional_wave(beta: float, lam: float, W0: float, W0prime: float, f_k: float, t: float) -> float:
    """W_k(t), t <= 0, 1 < β < 2"""
    if not (1.0 < beta < 2.0):
        raise InvalidOrder(f"beta 는 (1, 2) 범위여야 합니다: {beta}")
    if lam <= 0 or t > 0:
        raise InputError(f"lambda > 0, t <= 0 이어야 합니다: lambda={lam}, t={t}")
    if t == 0:
        return W0
    arg = -lam * (-t) ** beta
    e1 = _e(beta, 1.0, arg)
    e2 = _e(beta, 2.0, arg)
    return W0 * e1 + t * W0prime * e2 + (f_k / lam) * (1.0 - e1)


def fractional_wave_derivative(beta: float, lam: float, W0: float, W0prime: float, f_k: float, t: float) -> float:
    """W_k'(t) = (λW0 - f) s^{β-1} E_{β,β}(-λs^β) + W0' E_{β,1}(-λs^β), s = -t > 0"""
    s = -t
    arg = -lam * s ** beta
    return (lam * W0 - f_k) * s ** (beta - 1.0) * _e(beta, beta, arg) + W0prime * _e(beta, 1.0, arg)


def mode_from_source(k: int, lam: float, f_k: float, V0: float, spec: ProblemSpec,
                     delta: Optional[float] = None) -> ModeSolution:
    """접합 조건을 만족하는 음의 시간 쪽 데이터를 채운 ModeSolution"""
    if spec.is_wave:
        B = V0 - f_k / lam
        A = (f_k - lam * V0) / math.sqrt(lam)
        return ModeSolution(k=k, lam=lam, f_k=f_k, V0=V0, A=A, B=B, delta=delta)
    return ModeSolution(k=k, lam=lam, f_k=f_k, V0=V0, W0=V0, W0prime=f_k - lam * V0, delta=delta)


def mode_value(mode: ModeSolution, spec: ProblemSpec, t: float) -> float:
    """시간 부호에 맞는 분기로 모드 값 계산"""
    if t >= 0:
        return mode_parabolic(spec.alpha, mode.lam, mode.V0, mode.f_k, t)
    if spec.is_wave:
        return mode_wave(mode.lam, mode.A, mode.B, mode.f_k, t)
    return mode_fractional_wave(spec.beta, mode.lam, mode.W0, mode.W0prime, mode.f_k, t)


def mode_negative_derivative(mode: ModeSolution, spec: ProblemSpec, t: float) -> float:
    if spec.is_wave:
        return wave_derivative(mode.lam, mode.A, mode.B, t)
    return fractional_wave_derivative(spec.beta, mode.lam, mode.W0, mode.W0prime, mode.f_k, t)


# ----------------------------------------------------------------------------
# 장 조립
# ----------------------------------------------------------------------------

def time_grid(p: float, q: float, n_t: int = Config.N_T) -> np.ndarray:
    """[-p, q] 시간 격자 (-p, 0, q 포함)"""
    n_neg = max(2, int(round(n_t * p / (p + q))))
    n_pos = max(2, n_t - n_neg + 1)
    return np.concatenate([np.linspace(-p, 0.0, n_neg), np.linspace(0.0, q, n_pos)[1:]])


def _workers() -> Optional[int]:
    return Config.THREADS if Config.THREADS > 0 else None


def assemble_field(sys: EigenSystem, modes: Sequence[ModeSolution], spec: ProblemSpec,
                   grid_t: np.ndarray) -> SolutionField:
    """u(x, t) = Σ_k m_k(t) ω_k(x)"""
    if any(m.k < 1 or m.k > sys.n_modes for m in modes):
        raise GridMismatch(f"모드 번호가 고유계 범위 1..{sys.n_modes} 를 벗어납니다")
    grid_t = np.asarray(grid_t, dtype=float)

    def column(mode: ModeSolution) -> np.ndarray:
        return np.array([mode_value(mode, spec, t) for t in grid_t])

    u = np.zeros((grid_t.size, sys.n_grid))
    if modes:
        with ThreadPoolExecutor(max_workers=_workers()) as pool:
            columns = list(pool.map(column, modes))
        amplitudes = np.column_stack(columns)
        basis = sys.modes[[m.k - 1 for m in modes]]
        u = amplitudes @ basis
    return SolutionField(grid_x=sys.grid.copy(), grid_t=grid_t, u=u)


def trace(sys: EigenSystem, modes: Sequence[ModeSolution], spec: ProblemSpec, t: float) -> np.ndarray:
    """한 시각의 u(·, t)"""
    amps = np.array([mode_value(m, spec, t) for m in modes])
    basis = sys.modes[[m.k - 1 for m in modes]]
    return amps @ basis if len(modes) else np.zeros(sys.n_grid)


def gluing_residual(sys: EigenSystem, modes: Sequence[ModeSolution], spec: ProblemSpec,
                    t_small: float) -> float:
    """‖C_D^α u(·, t) - u_t(·, -t)‖_{L²}, t = t_small (Parseval 로 모드 합)"""
    if not (0.0 < t_small < min(spec.p, spec.q) / 10.0):
        raise InputError(f"t_small 은 (0, min(p,q)/10) 범위여야 합니다: {t_small}")
    diffs = [
        caputo_parabolic(spec.alpha, m.lam, m.V0, m.f_k, t_small) - mode_negative_derivative(m, spec, -t_small)
        for m in modes
    ]
    return float(math.sqrt(math.fsum(d * d for d in diffs)))


def forward_data(sys: EigenSystem, f_coeffs: SpectralCoefficients, v0_coeffs: SpectralCoefficients,
                 spec: ProblemSpec):
    """주어진 f, V(0) 로부터 측정값 φ = u(·, q), ψ = u(·, -p) 생성

    Returns:
        (phi 샘플, psi 샘플, ModeSolution 목록)
    """
    count = f_coeffs.n_modes
    if v0_coeffs.n_modes != count or count > sys.n_modes:
        raise GridMismatch(f"계수 길이 불일치: f={count}, V0={v0_coeffs.n_modes}, 모드={sys.n_modes}")
    modes = [
        mode_from_source(k + 1, float(sys.eigenvalues[k]), float(f_coeffs.values[k]), float(v0_coeffs.values[k]), spec)
        for k in range(count)
    ]
    phi_k = np.array([mode_value(m, spec, spec.q) for m in modes])
    psi_k = np.array([mode_value(m, spec, -spec.p) for m in modes])
    phi = synthesize(sys, phi_k)
    psi = synthesize(sys, psi_k)
    logger.info(f"정방향 데이터 생성: 모드 {count}개, ‖φ‖={l2_norm(sys, phi):.6g}, ‖ψ‖={l2_norm(sys, psi):.6g}")
    return phi, psi, modes


def tail_bound(sys: EigenSystem, coeffs: SpectralCoefficients) -> float:
    """절단 꼬리 추정 Σ_{k>K} |c_k| ‖ω_k‖_∞

    H⁴ 감쇠 모형 |c_k| ≈ C λ_k^{-2}, λ_k ≈ λ_K (k/K)², ‖ω_k‖_∞ ≈ √2.
    """
    K = coeffs.n_modes
    if K == 0:
        return 0.0
    lam = sys.eigenvalues[:K]
    tail_count = min(3, K)
    C = float(np.max(np.abs(coeffs.values[-tail_count:]) * lam[-tail_count:] ** 2))
    sum_inv_sq = K ** 4 / lam[-1] ** 2 * float(special.zeta(4.0, K + 1))
    return math.sqrt(2.0) * C * sum_inv_sq


# ----------------------------------------------------------------------------
# 출력 형식
# ----------------------------------------------------------------------------

def field_to_frame(field: SolutionField) -> pd.DataFrame:
    """(t, x, u) 긴 형식 표, t 우선 정렬"""
    t = np.repeat(field.grid_t, field.grid_x.size)
    x = np.tile(field.grid_x, field.grid_t.size)
    return pd.DataFrame({"t": t, "x": x, "u": field.u.ravel()})


def field_to_json(field: SolutionField) -> dict:
    return {
        "n_t": int(field.grid_t.size),
        "n_x": int(field.grid_x.size),
        "grid_t": field.grid_t.tolist(),
        "grid_x": field.grid_x.tolist(),
        "u": field.u.ravel().tolist(),
    }


def modes_to_frame(modes: List[ModeSolution]) -> pd.DataFrame:
    return pd.DataFrame([m.__dict__ for m in modes])
