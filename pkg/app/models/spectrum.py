"""
스펙트럼 모델 정의
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from app.exceptions import InvalidParameterError
from app.models.layers import BeamParams, Gains, LayerStack


SOURCE_PENCIL = "discrete-pencil"
SOURCE_ROOTS = "characteristic-roots"


@dataclass(frozen=True)
class CharacteristicParams:
    """
    특성식 파라미터

    branch 가 "rayleigh" 이면 (alpha, K, L, gamma), "wave" 이면 (rho, E, L, gamma, k)
    """
    branch: str
    L: float
    gamma: float
    alpha: Optional[float] = None
    K: Optional[float] = None
    rho: Optional[float] = None
    E: Optional[float] = None
    k: Optional[int] = None

    def __post_init__(self):
        if self.branch == "rayleigh":
            values = (self.alpha, self.K, self.L)
        elif self.branch == "wave":
            values = (self.rho, self.E, self.L)
        else:
            raise InvalidParameterError(f"알 수 없는 분기: {self.branch}")
        if any(v is None or not v > 0 for v in values):
            raise InvalidParameterError(f"{self.branch} 분기 물리량은 양수여야 합니다: {values}")
        if self.gamma < 0:
            raise InvalidParameterError(f"이득은 음수가 될 수 없습니다: {self.gamma}")

    @classmethod
    def rayleigh(cls, params: BeamParams, gains: Gains) -> "CharacteristicParams":
        return cls(branch="rayleigh", L=params.L, gamma=gains.gamma0, alpha=params.alpha, K=params.K)

    @classmethod
    def wave(cls, params: BeamParams, stack: LayerStack, gains: Gains, k: int) -> "CharacteristicParams":
        pos = stack.odd_position(k)
        layer = stack.odd_layers[pos]
        return cls(branch="wave", L=params.L, gamma=gains.gamma_odd[pos], rho=layer.rho, E=layer.E, k=k)

    @property
    def speed(self) -> float:
        """레일리 분기는 √(K/α), 파동 분기는 √(E/ρ)"""
        if self.branch == "rayleigh":
            return float(np.sqrt(self.K / self.alpha))
        return float(np.sqrt(self.E / self.rho))

    @property
    def critical_gain(self) -> float:
        """이득 가정의 임계 이득"""
        return 1.0 / self.speed

    @property
    def label(self) -> str:
        return "rayleigh" if self.branch == "rayleigh" else f"wave{self.k}"


@dataclass(frozen=True)
class Spectrum:
    """
    고유값 목록과 스펙트럼 가로좌표

    고유값은 (Im, Re) 사전식으로 정렬되어 있다.
    """
    eigenvalues: np.ndarray
    abscissa: float
    source: str
    branches: List[str]
    indices: np.ndarray
    residuals: np.ndarray
    certified: np.ndarray

    @classmethod
    def build(
        cls,
        eigenvalues: Sequence[complex],
        source: str,
        branches: Optional[Sequence[str]] = None,
        indices: Optional[Sequence[int]] = None,
        residuals: Optional[Sequence[float]] = None,
        certified: Optional[Sequence[bool]] = None,
    ) -> "Spectrum":
        """정렬 후 가로좌표를 채워 생성"""
        lam = np.asarray(eigenvalues, dtype=complex).ravel()
        count = lam.size
        branch_arr = np.asarray(list(branches) if branches is not None else ["pencil"] * count, dtype=object)
        index_arr = np.asarray(indices if indices is not None else np.arange(count), dtype=int)
        resid_arr = np.asarray(residuals if residuals is not None else np.full(count, np.nan), dtype=float)
        cert_arr = np.asarray(certified if certified is not None else np.zeros(count, dtype=bool), dtype=bool)

        order = np.lexsort((lam.real, lam.imag))
        lam = lam[order]
        abscissa = float(lam.real.max()) if count else float("nan")
        return cls(
            eigenvalues=lam,
            abscissa=abscissa,
            source=source,
            branches=[str(b) for b in branch_arr[order]],
            indices=index_arr[order],
            residuals=resid_arr[order],
            certified=cert_arr[order],
        )

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def certified_count(self) -> int:
        return int(np.count_nonzero(self.certified))

    def subset(self, mask: np.ndarray) -> "Spectrum":
        return Spectrum.build(
            self.eigenvalues[mask],
            self.source,
            [b for b, keep in zip(self.branches, mask) if keep],
            self.indices[mask],
            self.residuals[mask],
            self.certified[mask],
        )

    def resolved(self, cutoff: float) -> "Spectrum":
        """|Im λ| < cutoff 인 부분 스펙트럼"""
        return self.subset(np.abs(self.eigenvalues.imag) < cutoff)

    def conjugate_defect(self) -> float:
        """켤레 닫힘 결함 (상대값 최대)"""
        lam = self.eigenvalues
        if lam.size == 0:
            return 0.0
        worst = 0.0
        for value in lam:
            gap = np.min(np.abs(lam - np.conj(value)))
            worst = max(worst, gap / max(1.0, abs(value)))
        return float(worst)

    @staticmethod
    def merge(parts: Sequence["Spectrum"], source: str) -> "Spectrum":
        """여러 분기의 스펙트럼을 합쳐 재정렬"""
        return Spectrum.build(
            np.concatenate([p.eigenvalues for p in parts]) if parts else [],
            source,
            [b for p in parts for b in p.branches],
            np.concatenate([p.indices for p in parts]) if parts else [],
            np.concatenate([p.residuals for p in parts]) if parts else [],
            np.concatenate([p.certified for p in parts]) if parts else [],
        )
