"""
물리 파라미터 모델 정의

층 번호는 1부터 시작하는 홀수/짝수 규약을 따른다.
홀수층 k = 1, 3, ..., 2m+1 (강성층), 짝수층 j = 2, 4, ..., 2m (전단 코어층)
내부적으로는 두 개의 조밀 리스트에 저장하고 명시적 인덱스 맵으로 변환한다.
"""
from dataclasses import dataclass
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.exceptions import InvalidParameterError


class OddLayer(BaseModel):
    """홀수층 (강성 외피층)"""
    model_config = ConfigDict(frozen=True)

    rho: float = Field(gt=0, description="밀도")
    h: float = Field(gt=0, description="두께")
    E: float = Field(gt=0, description="영률")


class EvenLayer(BaseModel):
    """짝수층 (전단 코어층), G = 0 은 비연성 극한"""
    model_config = ConfigDict(frozen=True)

    h: float = Field(gt=0, description="두께")
    G: float = Field(ge=0, description="전단 탄성계수")


class LayerStack(BaseModel):
    """2m+1 개의 교대 적층 구조"""
    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=1, description="코어층 개수")
    odd_layers: List[OddLayer]
    even_layers: List[EvenLayer]

    @model_validator(mode="after")
    def _check_lengths(self) -> "LayerStack":
        if len(self.odd_layers) != self.m + 1:
            raise ValueError(f"odd_layers 는 m+1={self.m + 1} 개여야 합니다 (현재 {len(self.odd_layers)})")
        if len(self.even_layers) != self.m:
            raise ValueError(f"even_layers 는 m={self.m} 개여야 합니다 (현재 {len(self.even_layers)})")
        return self

    # ===========================================
    # 인덱스 맵
    # ===========================================

    @property
    def odd_indices(self) -> List[int]:
        """홀수층 번호 목록 [1, 3, ..., 2m+1]"""
        return [2 * i + 1 for i in range(self.m + 1)]

    @property
    def even_indices(self) -> List[int]:
        """짝수층 번호 목록 [2, 4, ..., 2m]"""
        return [2 * i + 2 for i in range(self.m)]

    def odd_position(self, k: int) -> int:
        """홀수층 번호 k → 리스트 위치"""
        if k % 2 != 1 or not 1 <= k <= 2 * self.m + 1:
            raise InvalidParameterError(f"홀수층 번호가 아닙니다: {k}")
        return (k - 1) // 2

    def even_position(self, j: int) -> int:
        """짝수층 번호 j → 리스트 위치"""
        if j % 2 != 0 or not 2 <= j <= 2 * self.m:
            raise InvalidParameterError(f"짝수층 번호가 아닙니다: {j}")
        return j // 2 - 1

    # ===========================================
    # 대각 행렬 성분 (벡터)
    # ===========================================

    @property
    def rho_odd(self) -> np.ndarray:
        return np.array([layer.rho for layer in self.odd_layers], dtype=float)

    @property
    def h_odd(self) -> np.ndarray:
        return np.array([layer.h for layer in self.odd_layers], dtype=float)

    @property
    def E_odd(self) -> np.ndarray:
        return np.array([layer.E for layer in self.odd_layers], dtype=float)

    @property
    def h_even(self) -> np.ndarray:
        return np.array([layer.h for layer in self.even_layers], dtype=float)

    @property
    def G_even(self) -> np.ndarray:
        return np.array([layer.G for layer in self.even_layers], dtype=float)

    @property
    def wave_speeds(self) -> np.ndarray:
        """홀수층 종파 속도 √(E/ρ)"""
        return np.sqrt(self.E_odd / self.rho_odd)

    def without_shear(self) -> "LayerStack":
        """G = 0 인 비연성 적층 (같은 타입 유지)"""
        return self.model_copy(
            update={"even_layers": [EvenLayer(h=layer.h, G=0.0) for layer in self.even_layers]}
        )

    @classmethod
    def uniform(cls, m: int, rho: float = 1.0, h: float = 1.0, E: float = 1.0,
                h_core: float = 1.0, G: float = 1.0) -> "LayerStack":
        """모든 층이 같은 값을 갖는 적층"""
        return cls(
            m=m,
            odd_layers=[OddLayer(rho=rho, h=h, E=E) for _ in range(m + 1)],
            even_layers=[EvenLayer(h=h_core, G=G) for _ in range(m)],
        )


class BeamParams(BaseModel):
    """레일리 보 파라미터"""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0, description="회전 관성 계수")
    K: float = Field(gt=0, description="굽힘 강성")
    L: float = Field(gt=0, description="보 길이")

    @property
    def beam_speed(self) -> float:
        """고주파 굽힘파 속도 √(K/α)"""
        return float(np.sqrt(self.K / self.alpha))


class Gains(BaseModel):
    """경계 피드백 이득"""
    model_config = ConfigDict(frozen=True)

    gamma0: float = Field(ge=0, description="모멘트 피드백 이득")
    gamma_odd: List[float] = Field(description="홀수층 축력 피드백 이득")

    @model_validator(mode="after")
    def _check_nonnegative(self) -> "Gains":
        if any(g < 0 for g in self.gamma_odd):
            raise ValueError("gamma_odd 는 음수가 될 수 없습니다")
        return self

    @property
    def gamma_vec(self) -> np.ndarray:
        return np.array(self.gamma_odd, dtype=float)

    @property
    def is_conservative(self) -> bool:
        """모든 이득이 0 인지 여부"""
        return self.gamma0 == 0 and all(g == 0 for g in self.gamma_odd)

    @classmethod
    def uniform(cls, m: int, gamma: float) -> "Gains":
        return cls(gamma0=gamma, gamma_odd=[gamma] * (m + 1))


@dataclass(frozen=True)
class CouplingData:
    """연성 행렬 A, B 와 벡터 N"""
    A_mat: np.ndarray
    B_mat: np.ndarray
    N_vec: np.ndarray
