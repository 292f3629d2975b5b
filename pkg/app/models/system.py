"""
이산화 시스템 모델 정의
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from app.exceptions import InvalidMeshError
from app.models.layers import BeamParams, Gains, LayerStack


@dataclass(frozen=True)
class Mesh:
    """
    균일 메쉬

    v 블록 요소 차수(element_order)는 1(선형) 또는 2(2차)
    """
    n_elems: int
    L: float
    element_order: int = 2

    def __post_init__(self):
        if self.n_elems < 4:
            raise InvalidMeshError(f"메쉬가 너무 거칩니다: n_elems={self.n_elems} (최소 4)")
        if self.element_order not in (1, 2):
            raise InvalidMeshError(f"지원하지 않는 요소 차수: {self.element_order}")
        if not self.L > 0:
            raise InvalidMeshError(f"보 길이는 양수여야 합니다: {self.L}")

    @property
    def h(self) -> float:
        """요소 크기"""
        return self.L / self.n_elems

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.n_elems + 1)


@dataclass(frozen=True)
class DofMap:
    """
    자유도 맵

    z 블록: 절점마다 (값, 기울기), z(0)=z'(0)=z(L)=0 제거, z'(L) 유지
    v 블록: 홀수층마다 절점값, v_k(0)=0 제거
    맵 배열의 -1 은 제거된 자유도
    """
    n_elems: int
    element_order: int
    z_map: np.ndarray
    v_maps: List[np.ndarray]
    layer_labels: List[int]
    total_dofs: int

    @property
    def z_slice(self) -> slice:
        valid = self.z_map[self.z_map >= 0]
        return slice(int(valid.min()), int(valid.max()) + 1)

    @property
    def v_slices(self) -> List[slice]:
        result = []
        for vmap in self.v_maps:
            valid = vmap[vmap >= 0]
            result.append(slice(int(valid.min()), int(valid.max()) + 1))
        return result

    @property
    def z_slope_end(self) -> int:
        """z'(L) 자유도 인덱스"""
        return int(self.z_map[2 * self.n_elems + 1])

    @property
    def v_end(self) -> List[int]:
        """각 v_k(L) 자유도 인덱스"""
        return [int(vmap[-1]) for vmap in self.v_maps]

    @property
    def boundary_dofs(self) -> List[int]:
        """감쇠가 작용하는 자유도 {z'(L), v_k(L)}"""
        dofs = []
        if self.z_map.size:
            dofs.append(self.z_slope_end)
        dofs.extend(self.v_end)
        return dofs

    def block_slices(self) -> List[slice]:
        """블록 단위 슬라이스 (z 먼저, 이후 홀수층 순서)"""
        slices = []
        if self.z_map.size:
            slices.append(self.z_slice)
        slices.extend(self.v_slices)
        return slices


@dataclass(frozen=True, eq=False)
class DiscretizedSystem:
    """
    질량/강성/경계감쇠 행렬 묶음

    S = S_base + S_shear 순서로 더해져 있으므로
    비연성 펜슬 + 연성 블록 = 연성 펜슬 이 비트 단위로 성립한다.
    """
    M: np.ndarray
    S: np.ndarray
    D: np.ndarray
    dof_map: DofMap
    coupled: bool
    S_shear: np.ndarray
    params: BeamParams
    stack: LayerStack
    gains: Gains
    mesh: Mesh
    subsystem: str = "full"
    notes: List[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def state_size(self) -> int:
        return 2 * self.n

    @property
    def energy_matrix(self) -> np.ndarray:
        """에너지 내적 행렬 blockdiag(S, M)"""
        n = self.n
        Q = np.zeros((2 * n, 2 * n))
        Q[:n, :n] = self.S
        Q[n:, n:] = self.M
        return Q

    def resolution_cutoff(self) -> float:
        """메쉬 해상도 상한 π·n_elems/(4L)·(최소 파속)"""
        speeds: List[float] = []
        if self.subsystem in ("full", "beam"):
            speeds.append(self.params.beam_speed)
        if self.subsystem == "full":
            speeds.extend(self.stack.wave_speeds.tolist())
        elif self.subsystem.startswith("wave:"):
            k = int(self.subsystem.split(":")[1])
            speeds.append(float(self.stack.wave_speeds[self.stack.odd_position(k)]))
        return float(np.pi * self.mesh.n_elems / (4.0 * self.mesh.L) * min(speeds))

    def block_label(self, index: int) -> Optional[str]:
        """블록 번호 → 라벨 ("beam", "wave:k")"""
        labels = []
        if self.dof_map.z_map.size:
            labels.append("beam")
        labels.extend(f"wave:{k}" for k in self.dof_map.layer_labels)
        return labels[index] if index < len(labels) else None
