"""
두 매개변수 Mittag-Leffler 함수 E_{α,β}(z) 계산 모듈

실수 z (주로 z <= 0), 0 < α < 2 에서 E_{α,β}(z) 를 상대오차 1e-10 수준으로 계산합니다.
|z| 영역에 따라 세 가지 방법을 골라 씁니다.

    |z| <= Z_SER          : Taylor 급수 (보정 합산, 조건수가 나쁘면 mpmath 확장 정밀도)
    Z_SER < |z| < Z_ASYM  : mpmath 확장 정밀도 Taylor 급수
    |z| >= Z_ASYM         : 점근 전개 (최소항에서 절단) + 1 < α < 2 의 극점(지수) 항

선택한 방법이 스스로 판정한 오차 기준을 통과하지 못하면 다른 방법으로 넘어갑니다.

사용법:
    params = MlfParams(alpha=0.5, beta=1.0)
    mlf_eval(params, -2.0)
    mittag_leffler(0.5, 1.0, np.linspace(-100, 0, 50))
"""
from __future__ import annotations

import cmath
import logging
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import mpmath
import numpy as np
import pandas as pd
from scipy import special

from src.config import Config
from src.errors import InvalidOrder, RegionTooSmall, UnsupportedRegion

logger = logging.getLogger(__name__)

_LN10 = math.log(10.0)
_EPS = np.finfo(float).eps
# mpmath 정밀도(mp.dps)는 프로세스 전역 상태
_MP_LOCK = threading.RLock()


@dataclass(frozen=True)
class MlfParams:
    """E_{α,β} 의 두 매개변수"""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0) or not math.isfinite(self.alpha):
            raise InvalidOrder(f"alpha 는 (0, 2) 범위여야 합니다: alpha={self.alpha}")
        if not math.isfinite(self.beta):
            raise InvalidOrder(f"beta 는 유한한 실수여야 합니다: beta={self.beta}")


# ----------------------------------------------------------------------------
# 계수 캐시 (α, β 조합마다 한 번만 계산)
# ----------------------------------------------------------------------------

def _is_pole(a: np.ndarray) -> np.ndarray:
    return (a <= 0) & (a == np.floor(a))


@lru_cache(maxsize=256)
def _series_coeffs(alpha: float, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """log|1/Γ(αn+β)| 와 부호 (n = 0..MAX_SERIES_TERMS-1)"""
    n = np.arange(Config.MAX_SERIES_TERMS, dtype=float)
    a = alpha * n + beta
    pole = _is_pole(a)
    with np.errstate(invalid="ignore", divide="ignore"):
        log_c = np.where(pole, -np.inf, -special.gammaln(a))
        sign = np.where(pole, 0.0, special.gammasgn(a))
    return log_c, sign


@lru_cache(maxsize=256)
def _asym_coeffs(alpha: float, beta: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """점근항 계수 log|1/Γ(β-αk)|, 부호, 크기 포락선 log(Γ(1-β+αk)/π) (k = 1..MAX_ASYM_TERMS)"""
    k = np.arange(1, Config.MAX_ASYM_TERMS + 1, dtype=float)
    a = beta - alpha * k
    pole = _is_pole(a)
    with np.errstate(invalid="ignore", divide="ignore"):
        log_c = np.where(pole, -np.inf, -special.gammaln(a))
        sign = np.where(pole, 0.0, special.gammasgn(a))
        # |1/Γ(a)| = Γ(1-a)|sin πa|/π <= Γ(1-a)/π
        reflected = 1.0 - a
        envelope = np.where(reflected >= 1.0, special.gammaln(reflected) - math.log(math.pi), np.inf)
    return log_c, sign, envelope


@lru_cache(maxsize=128)
def _mp_series_coeffs(alpha: float, beta: float, dps: int, count: int) -> tuple:
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        b = mpmath.mpf(beta)
        return tuple(mpmath.rgamma(a * n + b) for n in range(count))


# ----------------------------------------------------------------------------
# 개별 계산 방법
# ----------------------------------------------------------------------------

def _series_double(alpha: float, beta: float, z: float) -> Optional[Tuple[float, float, float]]:
    """배정밀도 Taylor 급수. (값, 조건수, 최대항 log) 또는 수렴 실패 시 None"""
    log_c, sign = _series_coeffs(alpha, beta)
    n = np.arange(log_c.size)
    log_t = log_c + n * math.log(abs(z))
    peak = float(np.max(log_t))
    keep = np.nonzero(log_t > peak - 45.0)[0]
    last = int(keep[-1])
    if last >= log_t.size - 1 or peak > 700.0:
        return None
    signs = sign[: last + 1] * (np.where(n[: last + 1] % 2 == 1, -1.0, 1.0) if z < 0 else 1.0)
    terms = signs * np.exp(log_t[: last + 1])
    value = math.fsum(terms.tolist())
    abs_sum = math.fsum(np.abs(terms).tolist())
    condition = abs_sum / abs(value) if value != 0.0 else math.inf
    return value, condition, peak


def _series_mp(alpha: float, beta: float, z: float, peak: float) -> Optional[Tuple[float, float]]:
    """mpmath 확장 정밀도 Taylor 급수 (Horner). 필요한 자릿수가 상한을 넘으면 None"""
    extra = math.ceil(max(peak, 0.0) / _LN10) + math.ceil(math.log10(1.0 + abs(z)))
    dps = 10 * math.ceil((25 + extra) / 10)
    if dps > Config.MP_MAX_DPS:
        return None

    log_c, _ = _series_coeffs(alpha, beta)
    n = np.arange(log_c.size)
    log_t = log_c + n * math.log(abs(z))
    keep = np.nonzero(log_t > peak - (dps + 3) * _LN10)[0]
    last = int(keep[-1])
    if last >= log_t.size - 1:
        return None
    count = 64 * math.ceil((last + 1) / 64)
    with _MP_LOCK:
        coeffs = _mp_series_coeffs(alpha, beta, dps, min(count, log_t.size))
        with mpmath.workdps(dps):
            x = mpmath.mpf(z)
            acc = mpmath.mpf(0)
            for c in reversed(coeffs):
                acc = acc * x + c
            value = float(acc)
    return value, abs(value) * _EPS


def _asymptotic_adaptive(alpha: float, beta: float, z: float) -> Tuple[float, float]:
    """최소항에서 절단한 대수적 점근합 -Σ z^{-k}/Γ(β-αk) 와 절단 오차 추정"""
    log_c, sign, envelope = _asym_coeffs(alpha, beta)
    lz = math.log(abs(z))
    k = np.arange(1, log_c.size + 1)
    env_t = envelope - k * lz
    k_star = int(np.argmin(env_t))  # 0-based index of the smallest envelope term
    err = math.exp(min(float(env_t[k_star]), 700.0))
    if k_star == 0:
        return 0.0, err
    log_t = np.minimum(log_c[:k_star] - k[:k_star] * lz, 700.0)
    signs = sign[:k_star] * (np.where(k[:k_star] % 2 == 1, -1.0, 1.0) if z < 0 else 1.0)
    terms = signs * np.exp(log_t)
    return -math.fsum(terms.tolist()), err


def _exp_closed_form(m: int, z: float) -> float:
    """α = 1, 정수 β = m 일 때 E_{1,m}(z) = (e^z - Σ_{n<m-1} z^n/n!) / z^{m-1}"""
    lost = (m - 1) * max(0, math.ceil(-math.log10(abs(z))))
    with _MP_LOCK, mpmath.workdps(30 + lost):
        x = mpmath.mpf(z)
        partial = mpmath.fsum(x ** n / mpmath.factorial(n) for n in range(m - 1))
        value = (mpmath.exp(x) - partial) / x ** (m - 1)
        return float(value)


# ----------------------------------------------------------------------------
# 공개 연산
# ----------------------------------------------------------------------------

def mlf_pole_terms(params: MlfParams, z: float) -> float:
    """1 < α < 2, z < 0 에서 나타나는 지수(극점 유수) 기여 (2/α) Re[s^{1-β} e^s]"""
    if not (1.0 < params.alpha < 2.0) or z >= 0:
        return 0.0
    s = abs(z) ** (1.0 / params.alpha) * cmath.exp(1j * math.pi / params.alpha)
    if s.real < -745.0:
        return 0.0
    return (2.0 / params.alpha) * (s ** (1.0 - params.beta) * cmath.exp(s)).real


def mlf_asymptotic(params: MlfParams, z: float, terms: int) -> float:
    """점근 전개 -Σ_{k=1..terms} z^{-k}/Γ(β-αk)

    Args:
        params: (α, β)
        z: |z| >= Z_ASYM 인 음의 실수
        terms: 더할 항의 개수 (>= 1)

    Returns:
        대수적 점근합 (극점 항은 포함하지 않음)
    """
    if abs(z) < Config.Z_ASYM:
        raise RegionTooSmall(f"|z|={abs(z)} 는 점근 전개 영역(|z| >= {Config.Z_ASYM})이 아닙니다")
    if terms < 1:
        raise ValueError(f"terms 는 1 이상이어야 합니다: {terms}")
    k = np.arange(1, terms + 1, dtype=float)
    a = params.beta - params.alpha * k
    coeffs = np.where(_is_pole(a), 0.0, special.rgamma(a))
    return -math.fsum((coeffs * float(z) ** (-k)).tolist())


def mlf_eval(params: MlfParams, z: float) -> float:
    """E_{α,β}(z) 계산

    Args:
        params: (α, β), 0 < α < 2
        z: z <= 1 인 실수

    Returns:
        E_{α,β}(z)
    """
    alpha, beta = params.alpha, params.beta
    z = float(z)
    if not math.isfinite(z):
        raise UnsupportedRegion(f"z 는 유한해야 합니다: z={z}")
    if z > 1.0:
        raise UnsupportedRegion(f"양의 성장 영역은 지원하지 않습니다: z={z} > 1")
    if z == 0.0:
        return float(special.rgamma(beta))
    if alpha == 1.0 and beta >= 1.0 and beta == math.floor(beta):
        return _exp_closed_form(int(beta), z)

    ax = abs(z)
    candidates = []

    def try_series(allow_double: bool) -> Optional[float]:
        attempt = _series_double(alpha, beta, z)
        if attempt is None:
            return None
        value, condition, peak = attempt
        if allow_double and condition <= Config.SERIES_MAX_CONDITION:
            return value
        candidates.append(((4.0 + abs(peak)) * _EPS * condition * abs(value), value, "series"))
        precise = _series_mp(alpha, beta, z, peak)
        if precise is None:
            return None
        return precise[0]

    def try_asymptotic() -> Optional[float]:
        if z > 0:
            return None
        value, err = _asymptotic_adaptive(alpha, beta, z)
        value += mlf_pole_terms(params, z)
        if err <= Config.ASYM_RTOL * abs(value):
            return value
        candidates.append((err, value, "asymptotic"))
        return None

    if ax <= Config.Z_SER:
        order = (lambda: try_series(True), try_asymptotic)
    elif ax < Config.Z_ASYM:
        order = (lambda: try_series(False), try_asymptotic)
    else:
        order = (try_asymptotic, lambda: try_series(False))

    for method in order:
        value = method()
        if value is not None:
            return value

    if not candidates:
        raise UnsupportedRegion(f"E_{{{alpha},{beta}}}({z}) 를 계산할 수 있는 방법이 없습니다")
    err, value, name = min(candidates, key=lambda c: c[0] / max(abs(c[1]), 1e-300))
    logger.warning(f"E_{{{alpha:g},{beta:g}}}({z:g}) 정밀도 저하: {name} 오차 추정 {err:.2e}")
    return value


def mittag_leffler(alpha: float, beta: float, z) -> np.ndarray:
    """배열 입력용 E_{α,β}(z)"""
    params = MlfParams(alpha=alpha, beta=beta)
    z_arr = np.asarray(z, dtype=float)
    out = np.array([mlf_eval(params, zi) for zi in z_arr.ravel()], dtype=float)
    return out.reshape(z_arr.shape)


def mlf_recurrence_residual(params: MlfParams, z: float) -> float:
    """E_{α,μ}(z) - 1/Γ(μ) - z E_{α,μ+α}(z) (자체 검증용, 0 에 가까워야 함)"""
    shifted = MlfParams(alpha=params.alpha, beta=params.beta + params.alpha)
    return mlf_eval(params, z) - float(special.rgamma(params.beta)) - z * mlf_eval(shifted, z)


def mlf_derivative(alpha: float, lam: float, t: float) -> float:
    """d/dt E_{α,1}(-λ t^α) = -λ t^{α-1} E_{α,α}(-λ t^α), t > 0"""
    if t <= 0:
        raise ValueError(f"t 는 양수여야 합니다: t={t}")
    return -lam * t ** (alpha - 1.0) * mlf_eval(MlfParams(alpha, alpha), -lam * t ** alpha)


def tabulate(params: MlfParams, z_min: float, z_max: float, n: int) -> pd.DataFrame:
    """(z, E) 표 생성 (mlf-table 명령)"""
    z = np.linspace(z_min, z_max, n)
    values = [mlf_eval(params, zi) for zi in z]
    return pd.DataFrame({"z": z, "E": values})
