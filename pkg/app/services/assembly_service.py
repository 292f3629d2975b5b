"""
조립 서비스
쌍선형 형식 a, c 와 경계 감쇠를 질량/강성/감쇠 행렬로 이산화한다.

- z: Hermite 3차 요소, z(0)=z'(0)=z(L)=0 제거, z'(L) 유지
- v_k: Lagrange 요소 (기본 2차), v_k(0)=0 제거
- 모멘트/축력 경계 조건은 자연 조건으로 약하게 부과
"""
import logging
from typing import List, Tuple

import numpy as np
from scipy.linalg import solve

from app.exceptions import InvalidParameterError
from app.models.layers import BeamParams, Gains, LayerStack
from app.models.system import DiscretizedSystem, DofMap, Mesh
from app.services.model_service import coupling_data, validate_assumption
from numerics.elements import gauss_points, hermite_shapes, lagrange_shapes, weighted_gram

logger = logging.getLogger(__name__)

QUAD_POINTS = 4


# ===========================================
# 자유도 맵
# ===========================================

def build_dof_map(mesh: Mesh, n_odd: int) -> DofMap:
    """
    자유도 맵 생성

    Args:
        mesh: 균일 메쉬
        n_odd: 홀수층 개수 (m+1)

    Returns:
        DofMap
    """
    n = mesh.n_elems
    z_full = 2 * (n + 1)
    eliminated = {0, 1, 2 * n}
    z_map = np.full(z_full, -1, dtype=int)
    counter = 0
    for dof in range(z_full):
        if dof not in eliminated:
            z_map[dof] = counter
            counter += 1

    v_nodes = mesh.element_order * n + 1
    v_maps = []
    for _ in range(n_odd):
        vmap = np.full(v_nodes, -1, dtype=int)
        vmap[1:] = np.arange(counter, counter + v_nodes - 1)
        counter += v_nodes - 1
        v_maps.append(vmap)

    return DofMap(
        n_elems=n,
        element_order=mesh.element_order,
        z_map=z_map,
        v_maps=v_maps,
        layer_labels=[2 * i + 1 for i in range(n_odd)],
        total_dofs=counter,
    )


def _scatter(target: np.ndarray, local: np.ndarray, dofs: np.ndarray) -> None:
    """제거된 자유도(-1)를 건너뛰고 요소 행렬을 더한다"""
    keep = np.flatnonzero(dofs >= 0)
    if keep.size == 0:
        return
    g = dofs[keep]
    target[np.ix_(g, g)] += local[np.ix_(keep, keep)]


def _check_inputs(params: BeamParams, stack: LayerStack, gains: Gains) -> None:
    # model_construct 로 생성된 값은 검증을 거치지 않는다
    scalars = [params.alpha, params.K, params.L]
    scalars += stack.rho_odd.tolist() + stack.h_odd.tolist() + stack.E_odd.tolist() + stack.h_even.tolist()
    if not all(np.isfinite(scalars)) or min(scalars) <= 0:
        raise InvalidParameterError("물리 파라미터는 모두 양수여야 합니다")
    if np.any(stack.G_even < 0):
        raise InvalidParameterError("전단 탄성계수는 음수가 될 수 없습니다")
    if len(gains.gamma_odd) != stack.m + 1:
        raise InvalidParameterError(
            f"gamma_odd 길이 {len(gains.gamma_odd)} 가 홀수층 수 {stack.m + 1} 와 다릅니다"
        )


# ===========================================
# 조립
# ===========================================

def _element_dofs(dof_map: DofMap, e: int) -> Tuple[np.ndarray, List[np.ndarray]]:
    p = dof_map.element_order
    z_dofs = dof_map.z_map[2 * e: 2 * e + 4]
    v_dofs = [vmap[p * e: p * e + p + 1] for vmap in dof_map.v_maps]
    return z_dofs, v_dofs


def _assemble_matrices(
    params: BeamParams,
    stack: LayerStack,
    gains: Gains,
    mesh: Mesh,
    dof_map: DofMap,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """M, S_base, S_shear, D 조립"""
    n = dof_map.total_dofs
    he = mesh.h
    p = mesh.element_order
    xi, w = gauss_points(QUAD_POINTS)
    wq = w * he

    N_h, dN_h, d2N_h = hermite_shapes(xi, he)
    N_l, dN_l = lagrange_shapes(xi, he, p)

    # 요소 행렬 (균일 메쉬이므로 한 번만 계산)
    Mz_e = weighted_gram(N_h, wq) + weighted_gram(dN_h, wq * params.alpha)
    Sz_e = weighted_gram(d2N_h, wq * params.K)
    gram_v = weighted_gram(N_l, wq)
    gram_dv = weighted_gram(dN_l, wq)
    Mv_e = [gram_v * (layer.h * layer.rho) for layer in stack.odd_layers]
    Sv_e = [gram_dv * (layer.h * layer.E) for layer in stack.odd_layers]

    # 전단 요소 행렬: φ_j = (B v)_j / h_j + N_j z', 에너지 G_j h_j φ_j²
    cpl = coupling_data(stack)
    n_local = 4 + (stack.m + 1) * (p + 1)
    shear_e = np.zeros((n_local, n_local))
    has_shear = False
    for j, core in enumerate(stack.even_layers):
        if core.G == 0:
            continue
        has_shear = True
        rows = np.zeros((xi.size, n_local))
        rows[:, :4] = cpl.N_vec[j] * dN_h
        for k in range(stack.m + 1):
            if cpl.B_mat[j, k] != 0:
                start = 4 + k * (p + 1)
                rows[:, start:start + p + 1] += (cpl.B_mat[j, k] / core.h) * N_l
        shear_e += weighted_gram(rows, wq * (core.G * core.h))

    M = np.zeros((n, n))
    S_base = np.zeros((n, n))
    S_shear = np.zeros((n, n))
    for e in range(mesh.n_elems):
        z_dofs, v_dofs = _element_dofs(dof_map, e)
        _scatter(M, Mz_e, z_dofs)
        _scatter(S_base, Sz_e, z_dofs)
        for k, dofs in enumerate(v_dofs):
            _scatter(M, Mv_e[k], dofs)
            _scatter(S_base, Sv_e[k], dofs)
        if has_shear:
            _scatter(S_shear, shear_e, np.concatenate([z_dofs] + v_dofs))

    D = np.zeros((n, n))
    D[dof_map.z_slope_end, dof_map.z_slope_end] = params.K * gains.gamma0
    for k, dof in enumerate(dof_map.v_end):
        layer = stack.odd_layers[k]
        D[dof, dof] = layer.h * layer.E * gains.gamma_odd[k]

    return M, S_base, S_shear, D


def assemble(
    params: BeamParams,
    stack: LayerStack,
    gains: Gains,
    mesh: Mesh,
    coupled: bool = True,
) -> DiscretizedSystem:
    """
    이산 시스템 조립

    Args:
        params: 보 파라미터
        stack: 적층
        gains: 피드백 이득
        mesh: 메쉬
        coupled: False 이면 G_E ≡ 0 으로 조립 (같은 경로)

    Returns:
        DiscretizedSystem
    """
    _check_inputs(params, stack, gains)
    if abs(mesh.L - params.L) > 1e-14 * params.L:
        raise InvalidParameterError(f"메쉬 길이 {mesh.L} 와 보 길이 {params.L} 가 다릅니다")
    validate_assumption(params, stack, gains)

    effective = stack if coupled else stack.without_shear()
    dof_map = build_dof_map(mesh, stack.m + 1)
    M, S_base, S_shear, D = _assemble_matrices(params, effective, gains, mesh, dof_map)
    S = S_base + S_shear

    logger.debug(f"조립 완료: 자유도 {dof_map.total_dofs}, 연성={coupled}")
    return DiscretizedSystem(
        M=M,
        S=S,
        D=D,
        dof_map=dof_map,
        coupled=coupled,
        S_shear=S_shear,
        params=params,
        stack=stack,
        gains=gains,
        mesh=mesh,
    )


def is_decoupled(sys: DiscretizedSystem) -> bool:
    """전단 연성이 없는지 여부"""
    return not sys.coupled or not np.any(sys.stack.G_even)


def restrict(sys: DiscretizedSystem, block: str) -> DiscretizedSystem:
    """
    비연성 시스템에서 보 블록 또는 파동 블록 하나를 추출

    Args:
        sys: 비연성 시스템
        block: "beam" 또는 "wave:k" (k 는 홀수층 번호)

    Returns:
        부분 시스템
    """
    if block == "full":
        return sys
    if not is_decoupled(sys):
        raise InvalidParameterError("연성 시스템은 블록으로 분리할 수 없습니다")

    dm = sys.dof_map
    if block == "beam":
        sl = dm.z_slice
        sub_map = DofMap(
            n_elems=dm.n_elems,
            element_order=dm.element_order,
            z_map=dm.z_map.copy(),
            v_maps=[],
            layer_labels=[],
            total_dofs=sl.stop - sl.start,
        )
    elif block.startswith("wave:"):
        k = int(block.split(":")[1])
        pos = sys.stack.odd_position(k)
        sl = dm.v_slices[pos]
        vmap = dm.v_maps[pos].copy()
        vmap[vmap >= 0] -= sl.start
        sub_map = DofMap(
            n_elems=dm.n_elems,
            element_order=dm.element_order,
            z_map=np.zeros(0, dtype=int),
            v_maps=[vmap],
            layer_labels=[k],
            total_dofs=sl.stop - sl.start,
        )
    else:
        raise InvalidParameterError(f"알 수 없는 부분 시스템: {block}")

    return DiscretizedSystem(
        M=sys.M[sl, sl].copy(),
        S=sys.S[sl, sl].copy(),
        D=sys.D[sl, sl].copy(),
        dof_map=sub_map,
        coupled=False,
        S_shear=sys.S_shear[sl, sl].copy(),
        params=sys.params,
        stack=sys.stack,
        gains=sys.gains,
        mesh=sys.mesh,
        subsystem=block,
    )


# ===========================================
# 1계 펜슬과 연성 블록
# ===========================================

def first_order_pencil(sys: DiscretizedSystem) -> Tuple[np.ndarray, np.ndarray]:
    """
    E = blockdiag(I, M), A = [[0, I], [-S, -D]]

    Returns:
        (E, A)
    """
    n = sys.n
    I = np.eye(n)
    Z = np.zeros((n, n))
    E = np.block([[I, Z], [Z, sys.M]])
    A = np.block([[Z, I], [-sys.S, -sys.D]])
    return E, A


def coupling_block(
    params: BeamParams,
    stack: LayerStack,
    gains: Gains,
    mesh: Mesh,
) -> np.ndarray:
    """
    연성 연산자의 이산 표현 (펜슬 A 의 좌하단 블록 -S_shear)

    pencil(coupled) = pencil(decoupled) + embed_coupling_block(block) 가 정확히 성립한다.
    """
    return -assemble(params, stack, gains, mesh, coupled=True).S_shear


def embed_coupling_block(block: np.ndarray) -> np.ndarray:
    """n×n 연성 블록을 2n×2n 펜슬 행렬 위치에 배치"""
    n = block.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[n:, :n] = block
    return out


def generator_matrix(sys: DiscretizedSystem, damping_scale: float = 1.0) -> np.ndarray:
    """
    E⁻¹A = [[0, I], [-M⁻¹S, -M⁻¹D]]

    Args:
        damping_scale: D 배율 (-1 이면 이득 부호 반전 A(-γ))
    """
    n = sys.n
    lower = -solve(sys.M, np.hstack([sys.S, damping_scale * sys.D]), assume_a="pos")
    G = np.zeros((2 * n, 2 * n))
    G[:n, n:] = np.eye(n)
    G[n:, :n] = lower[:, :n]
    G[n:, n:] = lower[:, n:]
    return G
