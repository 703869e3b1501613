"""
fracmix 예외 클래스

입력 오류는 ValueError 를 함께 상속하므로 기존 except ValueError 코드에서도 잡힙니다.
IllPosedMode 는 입력 오류가 아니라 문제 자체의 성질이므로 따로 둡니다.
"""

from typing import Dict, List, Optional


class FracmixError(Exception):
    """fracmix 공통 예외"""


class InputError(FracmixError, ValueError):
    """잘못된 입력 또는 전제조건 위반"""


# ---------------------------- mlf ----------------------------

class InvalidOrder(InputError):
    """alpha 가 (0, 2) 범위를 벗어남"""


class UnsupportedRegion(InputError):
    """양의 성장 영역 z > 1"""


class RegionTooSmall(InputError):
    """점근 전개를 믿을 수 없는 |z|"""


# ---------------------------- liouville ----------------------------

class NonPositiveR(InputError):
    """r(x) <= 0 인 격자점 존재"""


class SingularPotential(InputError):
    """정규형 포텐셜 |g| 가 상한을 넘음"""


class NonPositivePotential(InputError):
    """min g < 0 (음의 고유값 가능)"""


# ---------------------------- spectral ----------------------------

class ResolutionTooLow(InputError):
    """n_modes > n_grid / 8"""


class GridMismatch(InputError):
    """샘플 격자와 고유계 격자가 다름"""


# ---------------------------- inverse ----------------------------

class NotIllPosed(InputError):
    """주어진 p 에서 |Δ_k| 가 0 이 아님"""


class IllPosedMode(FracmixError):
    """|Δ_k| < delta_floor 인 모드가 있어 재구성을 중단함"""

    def __init__(self, modes: List[int], deltas: Optional[Dict[int, float]] = None):
        self.modes = list(modes)
        self.deltas = dict(deltas or {})
        shown = ", ".join(str(k) for k in self.modes[:10])
        more = "" if len(self.modes) <= 10 else f" 외 {len(self.modes) - 10}개"
        super().__init__(f"|Δ_k| < delta_floor 인 모드: {shown}{more}")
