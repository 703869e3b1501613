"""
전역 설정값 모음

수치 엔진과 CLI가 공유하는 기본값을 정의합니다.
모든 값은 .env 파일 또는 환경 변수(FRACMIX_*)로 덮어쓸 수 있습니다.
"""

import os

from dotenv import load_dotenv

# .env 파일에서 환경 변수 로드
load_dotenv()


def _env_float(name: str, default: float) -> float:
    value = os.getenv(name)
    return float(value) if value not in (None, "") else default


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value) if value not in (None, "") else default


class Config:
    # ---------------------------- Mittag-Leffler 엔진 ----------------------------
    # 급수 영역 상한 |z| (배정밀도 Taylor 급수)
    Z_SER = _env_float("FRACMIX_Z_SER", 15.0)
    # 점근 전개 영역 하한 |z|
    Z_ASYM = _env_float("FRACMIX_Z_ASYM", 50.0)
    # 배정밀도 급수를 믿을 수 있는 최대 조건수 sum|t_n| / |sum t_n|
    SERIES_MAX_CONDITION = 1e3
    # 확장 정밀도(mpmath) 급수에서 허용하는 최대 자릿수
    MP_MAX_DPS = _env_int("FRACMIX_MP_MAX_DPS", 80)
    # 점근 전개 채택 기준 (최소항 / |값|)
    ASYM_RTOL = 1e-13
    # 급수/점근 전개 최대 항 수
    MAX_SERIES_TERMS = 4000
    MAX_ASYM_TERMS = 4000

    # ---------------------------- Liouville 변환 ----------------------------
    # 정규형 포텐셜 g 의 허용 상한 (넘으면 SingularPotential)
    POTENTIAL_CAP = _env_float("FRACMIX_POTENTIAL_CAP", 1e8)
    # 최소 격자 크기
    MIN_GRID = 64

    # ---------------------------- 스펙트럼 분해 ----------------------------
    # 격자 점 개수 (Simpson 적분을 위해 홀수)
    N_GRID = _env_int("FRACMIX_N_GRID", 2049)
    # 고유모드 개수
    N_MODES = _env_int("FRACMIX_N_MODES", 64)
    # n_modes <= n_grid / RESOLUTION_FACTOR
    RESOLUTION_FACTOR = 8

    # ---------------------------- 역문제 ----------------------------
    # |Δ_k| 가 이 값보다 작으면 재구성 중단
    DELTA_FLOOR = _env_float("FRACMIX_DELTA_FLOOR", 1e-8)
    # |Δ_k| 가 이 값보다 작으면 경고만 기록
    WARN_FLOOR = _env_float("FRACMIX_WARN_FLOOR", 1e-4)
    # 0/0 모드 판정 기준 (φ_k - ψ_k)
    ZERO_DIFF_TOL = 1e-14
    # 결정식 근 검증 기준
    CATALOG_TOL = 1e-8
    # null_solution 이 받아들이는 |Δ_k(p)| 상한
    NULL_TOL = 1e-6

    # ---------------------------- 시간 격자 ----------------------------
    # t=0 근방 도함수 계산 제외 구간
    T_MIN = _env_float("FRACMIX_T_MIN", 1e-4)
    # 시간 격자 점 개수
    N_T = _env_int("FRACMIX_N_T", 201)

    # ---------------------------- 실행 환경 ----------------------------
    OUTPUT_DIR = os.getenv("FRACMIX_OUTPUT_DIR", "data/result")
    LOG_LEVEL = os.getenv("FRACMIX_LOG", "info")
    THREADS = _env_int("FRACMIX_THREADS", 0)
