"""
Liouville 변환 모듈

일반 자기수반 연산자 L v = (r v')' - e v  ([a, b], Dirichlet) 를
정규형 -v'' + g(z) v  ([0, 1]) 로 바꾸고, 함수와 고유값을 두 좌표계 사이에서 옮깁니다.

    K    = ∫_a^b r(s)^{-1/2} ds
    z(x) = (1/K) ∫_a^x r(s)^{-1/2} ds
    l(x) = r(x)^{1/4}
    g(z) = K² [e + r''/4 - (r')²/(16 r)]   (x = x(z))
    v̄(z) = l(x(z)) v(x(z))

정규형 고유값 λ 와 원래 연산자 고유값 μ 사이에는 λ = K² μ 관계가 있습니다.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal

from src.config import Config
from src.errors import (
    InputError,
    NonPositivePotential,
    NonPositiveR,
    SingularPotential,
)
from src.presets import function_from_csv, function_from_expression, sympy_derivatives

logger = logging.getLogger(__name__)

Function = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class OperatorSpec:
    """원래 연산자 (r, e, [a, b])

    r_prime, r_second 가 주어지면 g 계산에 해석적 도함수를 쓰고,
    없으면 4차 중심 차분을 씁니다.
    """

    a: float
    b: float
    r: Function
    e: Function
    r_prime: Optional[Function] = None
    r_second: Optional[Function] = None

    def __post_init__(self):
        if not self.a < self.b:
            raise InputError(f"구간 끝점은 a < b 여야 합니다: a={self.a}, b={self.b}")


@dataclass(frozen=True, eq=False)
class LiouvilleMap:
    """Liouville 변환 결과 (격자 샘플)"""

    K: float
    a: float
    b: float
    x_grid: np.ndarray   # [a, b] 균등 격자
    z_of_x: np.ndarray   # z(x_grid)
    z_grid: np.ndarray   # [0, 1] 균등 격자
    x_of_z: np.ndarray   # x(z_grid)
    l_x: np.ndarray      # l(x_grid)
    l_z: np.ndarray      # l(x(z_grid))
    g: np.ndarray        # g(z_grid)


# ----------------------------------------------------------------------------
# 연산자 생성
# ----------------------------------------------------------------------------

def operator_from_expressions(r_expr: str, e_expr: str, a: float, b: float) -> OperatorSpec:
    """sympy 식 문자열 (변수 x) 로 연산자 생성. r', r'' 은 sympy 로 미분"""
    r_prime, r_second = sympy_derivatives(r_expr)
    return OperatorSpec(
        a=float(a),
        b=float(b),
        r=function_from_expression(r_expr),
        e=function_from_expression(e_expr),
        r_prime=r_prime,
        r_second=r_second,
    )


def _sample_range(path: str):
    x = pd.read_csv(path).iloc[:, 0].to_numpy(dtype=float)
    return float(x.min()), float(x.max()), x.size


def operator_from_csv(path_r: str, path_e: str) -> OperatorSpec:
    """샘플 CSV 두 개 (x, r) / (x, e) 로 연산자 생성. 도함수는 차분으로 계산"""
    r = function_from_csv(path_r)
    e = function_from_csv(path_e)
    a, b, count = _sample_range(path_r)
    e_a, e_b, _ = _sample_range(path_e)
    if e_a > a or e_b < b:
        raise InputError(f"e 샘플 구간이 r 구간 [{a}, {b}] 을 덮지 않습니다")
    logger.info(f"CSV 연산자 로드: [{a}, {b}], r 샘플 {count}개")
    return OperatorSpec(a=a, b=b, r=r, e=e)


# ----------------------------------------------------------------------------
# 차분
# ----------------------------------------------------------------------------

def _fd4(f: np.ndarray, h: float):
    """4차 정확도 1계, 2계 도함수 (양 끝은 한쪽 스텐실)"""
    d1 = np.empty_like(f)
    d2 = np.empty_like(f)
    d1[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d2[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)

    def left(v):
        return (
            (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h),
            (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * h),
            (45 * v[0] - 154 * v[1] + 214 * v[2] - 156 * v[3] + 61 * v[4] - 10 * v[5]) / (12 * h * h),
            (10 * v[0] - 15 * v[1] - 4 * v[2] + 14 * v[3] - 6 * v[4] + v[5]) / (12 * h * h),
        )

    d1[0], d1[1], d2[0], d2[1] = left(f)
    r0, r1, s0, s1 = left(f[::-1])
    d1[-1], d1[-2], d2[-1], d2[-2] = -r0, -r1, s0, s1
    return d1, d2


# ----------------------------------------------------------------------------
# 공개 연산
# ----------------------------------------------------------------------------

def build_map(op: OperatorSpec, n_grid: int) -> LiouvilleMap:
    """Liouville 변환 구성

    Args:
        op: 원래 연산자
        n_grid: 두 좌표계 공통 격자 점 개수 (>= MIN_GRID)

    Returns:
        LiouvilleMap
    """
    if n_grid < Config.MIN_GRID:
        raise InputError(f"n_grid 는 {Config.MIN_GRID} 이상이어야 합니다: {n_grid}")

    x = np.linspace(op.a, op.b, n_grid)
    h = x[1] - x[0]
    r = np.asarray(op.r(x), dtype=float) * np.ones_like(x)
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        bad = x[~(r > 0)]
        raise NonPositiveR(f"r(x) <= 0 인 점이 있습니다 (첫 위치 x={bad[0]:.6g})")
    e = np.asarray(op.e(x), dtype=float) * np.ones_like(x)

    # ----- z(x), K -----
    s = r ** -0.5
    integral = cumulative_simpson(s, x=x, initial=0.0)
    K = float(integral[-1])
    z_of_x = integral / K
    z_of_x[0], z_of_x[-1] = 0.0, 1.0

    # ----- g -----
    if op.r_prime is not None and op.r_second is not None:
        dr = np.asarray(op.r_prime(x), dtype=float) * np.ones_like(x)
        d2r = np.asarray(op.r_second(x), dtype=float) * np.ones_like(x)
    else:
        dr, d2r = _fd4(r, h)
    g_x = K ** 2 * (e + d2r / 4.0 - dr ** 2 / (16.0 * r))

    z_grid = np.linspace(0.0, 1.0, n_grid)
    x_of_z = CubicSpline(z_of_x, x)(z_grid)
    x_of_z[0], x_of_z[-1] = op.a, op.b
    g = CubicSpline(z_of_x, g_x)(z_grid)

    g_max = float(np.max(np.abs(g)))
    if not np.isfinite(g_max) or g_max > Config.POTENTIAL_CAP:
        raise SingularPotential(f"|g| 최대값 {g_max:.3e} 가 상한 {Config.POTENTIAL_CAP:.1e} 을 넘습니다")
    if g.min() < -1e-9 * max(1.0, g_max):
        raise NonPositivePotential(f"min g = {g.min():.6g} < 0 (음의 고유값 가능)")

    l_x = r ** 0.25
    l_z = np.asarray(op.r(x_of_z), dtype=float) ** 0.25 * np.ones_like(z_grid)
    logger.info(f"Liouville 변환: K={K:.12g}, g 범위 [{g.min():.6g}, {g.max():.6g}]")
    return LiouvilleMap(
        K=K, a=op.a, b=op.b,
        x_grid=x, z_of_x=z_of_x, z_grid=z_grid, x_of_z=x_of_z,
        l_x=l_x, l_z=l_z, g=g,
    )


def push_function(lmap: LiouvilleMap, v: Union[Function, np.ndarray]) -> np.ndarray:
    """v̄(z) = l(x(z)) v(x(z)) 를 z 격자에서 계산 (v 는 함수 또는 x 격자 샘플)"""
    if callable(v):
        values = np.asarray(v(lmap.x_of_z), dtype=float) * np.ones_like(lmap.z_grid)
    else:
        values = CubicSpline(lmap.x_grid, np.asarray(v, dtype=float))(lmap.x_of_z)
    return lmap.l_z * values


def pull_function(lmap: LiouvilleMap, vbar: np.ndarray) -> np.ndarray:
    """push_function 의 역변환: v(x) = v̄(z(x)) / l(x) 를 x 격자에서 계산"""
    vbar = np.asarray(vbar, dtype=float)
    return CubicSpline(lmap.z_grid, vbar)(lmap.z_of_x) / lmap.l_x


def eigenvalue_pullback(lmap: LiouvilleMap, lam: float) -> float:
    """정규형 고유값 λ 를 원래 연산자 고유값 μ = λ / K² 로 변환"""
    return lam / lmap.K ** 2


def pull_eigensystem(lmap: LiouvilleMap, sys):
    """정규형 고유계의 고유값을 1/K² 배 (고유함수는 정규형 좌표 그대로)"""
    from src.spectral import scale_eigenvalues

    return scale_eigenvalues(sys, 1.0 / lmap.K ** 2)


def pull_field(lmap: LiouvilleMap, field):
    """SolutionField 의 각 시간 행을 원래 좌표로 변환"""
    u = np.vstack([pull_function(lmap, row) for row in field.u]) if field.u.size else field.u
    return dataclasses.replace(field, grid_x=lmap.x_grid.copy(), u=u)


def direct_eigenvalues(op: OperatorSpec, n_modes: int, n_grid: int) -> np.ndarray:
    """-(r v')' + e v = μ v 를 원래 구간에서 직접 푼 고유값 (Richardson 보정)

    변환 없이 계산하므로 등스펙트럼성 점검의 기준값으로 씁니다.
    """

    def solve(n: int) -> np.ndarray:
        x = np.linspace(op.a, op.b, n)
        h = x[1] - x[0]
        mid = np.asarray(op.r(0.5 * (x[:-1] + x[1:])), dtype=float) * np.ones(n - 1)
        e = np.asarray(op.e(x[1:-1]), dtype=float) * np.ones(n - 2)
        diag = (mid[:-1] + mid[1:]) / h ** 2 + e
        off = -mid[1:-1] / h ** 2
        return eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, n_modes - 1))

    coarse = solve(n_grid)
    fine = solve(2 * n_grid - 1)
    return (4.0 * fine - coarse) / 3.0
