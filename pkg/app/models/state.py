"""
시간 적분 상태 및 에너지 기록 모델
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BeamState:
    """일반화 변위/속도 계수 벡터 (z 블록 + v 블록 배치)"""
    t: float
    u_coef: np.ndarray
    v_coef: np.ndarray

    @property
    def stacked(self) -> np.ndarray:
        """1계 상태 벡터 (U, V)"""
        return np.concatenate([self.u_coef, self.v_coef])

    @classmethod
    def from_stacked(cls, t: float, y: np.ndarray) -> "BeamState":
        n = y.size // 2
        return cls(t=t, u_coef=np.array(y[:n], dtype=float), v_coef=np.array(y[n:], dtype=float))

    @classmethod
    def zeros(cls, n: int, t: float = 0.0) -> "BeamState":
        return cls(t=t, u_coef=np.zeros(n), v_coef=np.zeros(n))

    def scaled(self, factor: float) -> "BeamState":
        return BeamState(t=self.t, u_coef=self.u_coef * factor, v_coef=self.v_coef * factor)


@dataclass(frozen=True)
class EnergyTrace:
    """
    표본화된 에너지 및 경계 소산 기록

    step_identity_residuals[i] 는 직전 표본 이후 각 스텝의
    |E(t+dt) - E(t) - dt·R(중점)| / E(0) 최대값이다.
    max_energy_increase 는 전체 스텝 중 최대 에너지 증가량 / E(0) 이다.
    """
    times: np.ndarray
    energies: np.ndarray
    dissipation: np.ndarray
    step_identity_residuals: np.ndarray
    dt: float
    steps: int
    max_energy_increase: float = 0.0

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def initial_energy(self) -> float:
        return float(self.energies[0]) if self.energies.size else 0.0

    @property
    def max_step_residual(self) -> float:
        return float(self.step_identity_residuals.max()) if self.step_identity_residuals.size else 0.0

    def is_monotone(self, rtol: float = 1e-10) -> bool:
        """모든 스텝에서 에너지 비증가 여부 (반올림 허용)"""
        return self.max_energy_increase <= rtol
