"""
모델 서비스
연성 행렬 A, B, 벡터 N 구성 및 이득 가정 검사
"""
import logging
from typing import Optional, Tuple

import numpy as np

from app.config import settings
from app.exceptions import AssumptionViolationError, InvalidParameterError
from app.models.layers import BeamParams, CouplingData, Gains, LayerStack
from app.schemas.report import AssumptionReport, ViolationItem

logger = logging.getLogger(__name__)


def build_coupling_matrices(m: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    m×(m+1) 띠 행렬 A, B

    a_ij = 1/2, b_ij = (-1)^{i+j+1}  (j = i 또는 j = i+1), 그 외 0

    Args:
        m: 코어층 개수

    Returns:
        (A, B)
    """
    if m < 1:
        raise InvalidParameterError(f"코어층 개수는 1 이상이어야 합니다: m={m}")
    A = np.zeros((m, m + 1))
    B = np.zeros((m, m + 1))
    for i in range(m):
        A[i, i] = A[i, i + 1] = 0.5
        B[i, i] = -1.0
        B[i, i + 1] = 1.0
    return A, B


def compute_N(stack: LayerStack) -> np.ndarray:
    """N = h_E⁻¹ A h_O 1_O + 1_E"""
    A, _ = build_coupling_matrices(stack.m)
    return (A @ stack.h_odd) / stack.h_even + 1.0


def coupling_data(stack: LayerStack) -> CouplingData:
    """적층으로부터 CouplingData 생성"""
    A, B = build_coupling_matrices(stack.m)
    return CouplingData(A_mat=A, B_mat=B, N_vec=compute_N(stack))


def _near(gain: float, critical: float, rtol: float) -> bool:
    return abs(gain - critical) <= rtol * abs(critical)


def validate_assumption(
    params: BeamParams,
    stack: LayerStack,
    gains: Gains,
    rtol: Optional[float] = None,
) -> AssumptionReport:
    """
    이득 가정: γ₀ ≠ √(α/K), γ_k ≠ √(ρ_k/E_k)

    Args:
        params: 보 파라미터
        stack: 적층
        gains: 피드백 이득
        rtol: 상대 허용 오차 (미지정시 설정값)

    Returns:
        위반 목록 보고서 (빈 목록이면 허용)
    """
    rtol = settings.assumption_rtol if rtol is None else rtol
    if len(gains.gamma_odd) != stack.m + 1:
        raise InvalidParameterError(
            f"gamma_odd 길이 {len(gains.gamma_odd)} 가 홀수층 수 {stack.m + 1} 와 다릅니다"
        )

    violations = []
    critical0 = float(np.sqrt(params.alpha / params.K))
    if _near(gains.gamma0, critical0, rtol):
        violations.append(ViolationItem(
            name="gamma0",
            gain=gains.gamma0,
            critical=critical0,
            rel_gap=abs(gains.gamma0 - critical0) / critical0,
        ))

    criticals = np.sqrt(stack.rho_odd / stack.E_odd)
    for k, gain, critical in zip(stack.odd_indices, gains.gamma_odd, criticals):
        if _near(gain, float(critical), rtol):
            violations.append(ViolationItem(
                name=f"gamma_odd[{k}]",
                gain=gain,
                critical=float(critical),
                rel_gap=abs(gain - critical) / critical,
            ))

    report = AssumptionReport(violations=violations, rtol=rtol)
    if not report.admissible:
        logger.warning(f"이득 가정 위반: {report.describe()}")
    return report


def require_admissible(params: BeamParams, stack: LayerStack, gains: Gains) -> AssumptionReport:
    """위반 시 AssumptionViolationError 발생"""
    report = validate_assumption(params, stack, gains)
    if not report.admissible:
        raise AssumptionViolationError(f"이득 가정 위반: {report.describe()}")
    return report
