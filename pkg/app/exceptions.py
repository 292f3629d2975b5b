"""
실험실 예외 계층

모든 예외는 종료 코드(exit_code)와 상세 메시지(detail)를 가진다.
0 정상, 1 가정 위반, 2 사용법/파싱, 3 수치 오류, 4 인증 실패, 5 불변식 위반
"""
from typing import Optional


class LabError(Exception):
    """실험실 예외 기본 클래스"""

    exit_code: int = 3

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


# ===========================================
# 가정 위반 (1)
# ===========================================

class AssumptionViolationError(LabError):
    """이득 가정 위반"""
    exit_code = 1


# ===========================================
# 사용법 / 설정 오류 (2)
# ===========================================

class ConfigError(LabError):
    """설정 파싱 실패, 알 수 없는 파라미터 경로 등"""
    exit_code = 2


class InvalidParameterError(ConfigError):
    """물리 파라미터가 허용 범위를 벗어남"""


class InvalidMeshError(ConfigError):
    """메쉬가 너무 거침 (n_elems < 4)"""


# ===========================================
# 수치 오류 (3)
# ===========================================

class NumericalError(LabError):
    """수치 계산 실패"""
    exit_code = 3


class SizeLimitError(NumericalError):
    """조밀 행렬 한도 초과"""


class DegenerateFrequencyError(NumericalError):
    """s = 0 에서 특성식 평가"""


class RootFailureError(NumericalError):
    """뉴턴 반복 미수렴"""


class NotAnEigenvalueError(NumericalError):
    """경계 행렬이 풀랭크 (근이 아님)"""


class IntegratorFailureError(NumericalError):
    """중점법 선형계가 특이"""


class DivergenceError(NumericalError):
    """에너지가 유한하지 않음"""


class DimensionMismatchError(NumericalError):
    """상태 벡터 길이가 자유도 맵과 불일치"""


class DegenerateFitError(NumericalError):
    """감쇠율 피팅에 필요한 표본 부족"""


# ===========================================
# 인증 실패 (4)
# ===========================================

class CertificationError(LabError):
    """편각 원리 인증 실패"""
    exit_code = 4


class IncompleteSpectrumError(CertificationError):
    """찾은 근의 개수와 회전수 불일치"""


class ContourResolutionError(CertificationError):
    """최대 세분 후에도 위상 점프가 큼"""


# ===========================================
# 불변식 위반 (5)
# ===========================================

class InvariantBreachError(LabError):
    """에너지 단조성 등 구조적 불변식 위반 (구현 결함)"""
    exit_code = 5
