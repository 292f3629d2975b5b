"""
동역학 서비스

암시적 중점법으로 1계 시스템 E·dY/dt = A·Y 를 적분하고
에너지와 경계 소산율을 기록한다.

중점법은 선형계의 이차 에너지에 대해 이산 에너지 등식
E(t+dt) − E(t) = dt·R(중점 상태) 를 반올림 오차 수준에서 만족한다.
"""
import logging
import threading
import weakref
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from app.config import settings
from app.exceptions import (
    DimensionMismatchError,
    DivergenceError,
    IntegratorFailureError,
    InvalidParameterError,
    NumericalError,
)
from app.models.state import BeamState, EnergyTrace
from app.models.system import DiscretizedSystem, Mesh
from app.services.assembly_service import assemble, first_order_pencil, restrict
from app.services.spectral_service import ModalBasis, discrete_modes, discrete_spectrum

logger = logging.getLogger(__name__)

Profile = Callable[[np.ndarray], np.ndarray]

# 시스템별 {dt: (LU 분해, 우변 행렬)} 캐시
_factor_cache: "weakref.WeakKeyDictionary[DiscretizedSystem, Dict[float, Tuple]]" = weakref.WeakKeyDictionary()
_cache_lock = threading.Lock()


def clear_factor_cache() -> None:
    """중점법 분해 캐시 비우기"""
    with _cache_lock:
        _factor_cache.clear()


def _check_state(sys: DiscretizedSystem, state: BeamState) -> None:
    n = sys.n
    if state.u_coef.shape != (n,) or state.v_coef.shape != (n,):
        raise DimensionMismatchError(
            f"상태 크기 ({state.u_coef.size}, {state.v_coef.size}) 가 자유도 {n} 와 다릅니다"
        )


# ===========================================
# 에너지
# ===========================================

def energy(sys: DiscretizedSystem, state: BeamState) -> float:
    """E = ½(uᵀ S u + vᵀ M v)"""
    _check_state(sys, state)
    u, v = state.u_coef, state.v_coef
    return 0.5 * float(u @ sys.S @ u + v @ sys.M @ v)


def dissipation_rate(sys: DiscretizedSystem, state: BeamState) -> float:
    """R = −vᵀ D v = −Kγ₀|ż'(L)|² − Σ h_k E_k γ_k |v̇_k(L)|²"""
    _check_state(sys, state)
    v = state.v_coef
    return -float(v @ sys.D @ v)


def _energy_vec(sys: DiscretizedSystem, y: np.ndarray) -> float:
    n = sys.n
    u, v = y[:n], y[n:]
    return 0.5 * float(u @ sys.S @ u + v @ sys.M @ v)


def _dissipation_vec(sys: DiscretizedSystem, y: np.ndarray) -> float:
    v = y[sys.n:]
    return -float(v @ sys.D @ v)


# ===========================================
# 중점법
# ===========================================

def _midpoint_factors(sys: DiscretizedSystem, dt: float):
    """(E − dt/2·A) 의 LU 분해와 (E + dt/2·A), (sys, dt) 단위로 캐시"""
    with _cache_lock:
        per_system = _factor_cache.setdefault(sys, {})
        cached = per_system.get(dt)
    if cached is not None:
        return cached

    E, A = first_order_pencil(sys)
    lhs = E - 0.5 * dt * A
    rhs = E + 0.5 * dt * A
    lu, piv = lu_factor(lhs, check_finite=True)
    if np.any(np.diag(lu) == 0):
        raise IntegratorFailureError(f"중점법 행렬이 특이합니다 (dt={dt})")
    factors = ((lu, piv), rhs)

    with _cache_lock:
        _factor_cache.setdefault(sys, {})[dt] = factors
    logger.debug(f"중점법 분해 캐시 추가: 자유도 {sys.n}, dt={dt}")
    return factors


def _advance(sys: DiscretizedSystem, y: np.ndarray, dt: float) -> np.ndarray:
    factors, rhs = _midpoint_factors(sys, dt)
    return lu_solve(factors, rhs @ y)


def step_midpoint(sys: DiscretizedSystem, state: BeamState, dt: float) -> BeamState:
    """
    암시적 중점법 한 스텝

    (E − dt/2·A) Y₁ = (E + dt/2·A) Y₀

    Args:
        sys: 이산 시스템
        state: 현재 상태
        dt: 시간 간격

    Returns:
        다음 상태
    """
    if not dt > 0:
        raise InvalidParameterError(f"시간 간격은 양수여야 합니다: dt={dt}")
    _check_state(sys, state)
    y1 = _advance(sys, state.stacked, dt)
    if not np.all(np.isfinite(y1)):
        raise DivergenceError(f"t={state.t + dt} 에서 상태가 유한하지 않습니다")
    return BeamState.from_stacked(state.t + dt, y1)


def simulate(
    sys: DiscretizedSystem,
    initial: BeamState,
    T: float,
    dt: Optional[float] = None,
    sample_every: int = 1,
) -> EnergyTrace:
    """
    시간 적분과 에너지 기록

    Args:
        sys: 이산 시스템
        initial: 초기 상태
        T: 종료 시간
        dt: 시간 간격 (미지정시 auto_dt)
        sample_every: 표본 간격 (스텝 수)

    Returns:
        EnergyTrace
    """
    if not T > 0:
        raise InvalidParameterError(f"종료 시간은 양수여야 합니다: T={T}")
    if sample_every < 1:
        raise InvalidParameterError(f"sample_every 는 1 이상이어야 합니다: {sample_every}")
    dt = auto_dt(sys) if dt is None else dt
    if not dt > 0:
        raise InvalidParameterError(f"시간 간격은 양수여야 합니다: dt={dt}")
    _check_state(sys, initial)

    steps = int(np.ceil(T / dt - 1e-9))
    # 마지막 스텝이 정확히 T 에 닿도록 균등 분할
    dt = T / steps
    y = initial.stacked.astype(float)
    e0 = _energy_vec(sys, y)
    scale = e0 if e0 > 0 else 1.0

    times = [initial.t]
    energies = [e0]
    dissipation = [_dissipation_vec(sys, y)]
    residuals = [0.0]
    window_residual = 0.0
    max_increase = 0.0
    e_prev = e0

    for step in range(1, steps + 1):
        y_next = _advance(sys, y, dt)
        e_next = _energy_vec(sys, y_next)
        if not np.isfinite(e_next):
            raise DivergenceError(f"스텝 {step} 에서 에너지가 유한하지 않습니다")
        balance = e_next - e_prev - dt * _dissipation_vec(sys, 0.5 * (y + y_next))
        window_residual = max(window_residual, abs(balance) / scale)
        max_increase = max(max_increase, (e_next - e_prev) / scale)
        y, e_prev = y_next, e_next

        if step % sample_every == 0 or step == steps:
            times.append(initial.t + step * dt)
            energies.append(e_next)
            dissipation.append(_dissipation_vec(sys, y))
            residuals.append(window_residual)
            window_residual = 0.0

    logger.info(f"적분 완료: {steps} 스텝, dt={dt:.6g}, E(T)/E(0)={energies[-1] / scale:.6g}")
    return EnergyTrace(
        times=np.array(times),
        energies=np.array(energies),
        dissipation=np.array(dissipation),
        step_identity_residuals=np.array(residuals),
        dt=dt,
        steps=steps,
        max_energy_increase=max_increase,
    )


def auto_dt(sys: DiscretizedSystem) -> float:
    """
    거친 메쉬 스펙트럼의 최대 |Im λ| 로부터 dt = 2π / (20·max|Im λ|)
    """
    coarse_mesh = Mesh(
        n_elems=settings.auto_dt_coarse_elems,
        L=sys.mesh.L,
        element_order=sys.mesh.element_order,
    )
    coarse = assemble(sys.params, sys.stack, sys.gains, coarse_mesh, coupled=sys.coupled)
    coarse = restrict(coarse, sys.subsystem)
    spectrum = discrete_spectrum(coarse, with_residuals=False)
    omega = float(np.abs(spectrum.eigenvalues.imag).max())
    if omega <= 0:
        raise NumericalError("진동 모드가 없어 시간 간격을 자동으로 정할 수 없습니다")
    dt = 2.0 * np.pi / (20.0 * omega)
    logger.info(f"자동 시간 간격: dt={dt:.6g} (max|Im λ|={omega:.6g}, {coarse_mesh.n_elems} 요소)")
    return dt


# ===========================================
# 초기 데이터
# ===========================================

def _slopes(f: Profile, df: Optional[Profile], x: np.ndarray, step: float) -> np.ndarray:
    if df is not None:
        return np.asarray(df(x), dtype=float)
    return (np.asarray(f(x + step), dtype=float) - np.asarray(f(x - step), dtype=float)) / (2.0 * step)


def _z_coefficients(sys: DiscretizedSystem, f: Optional[Profile], df: Optional[Profile]) -> np.ndarray:
    dm = sys.dof_map
    out = np.zeros(sys.n)
    if f is None or not dm.z_map.size:
        return out
    x = sys.mesh.nodes
    full = np.empty(2 * x.size)
    full[0::2] = np.asarray(f(x), dtype=float)
    full[1::2] = _slopes(f, df, x, sys.mesh.h / 100.0)
    keep = dm.z_map >= 0
    out[dm.z_map[keep]] = full[keep]
    return out


def _v_coefficients(sys: DiscretizedSystem, profiles: Sequence[Optional[Profile]]) -> np.ndarray:
    dm = sys.dof_map
    out = np.zeros(sys.n)
    if len(profiles) != len(dm.v_maps):
        raise DimensionMismatchError(f"v 프로파일 {len(profiles)}개, 홀수층 블록 {len(dm.v_maps)}개")
    x = np.linspace(0.0, sys.mesh.L, dm.element_order * dm.n_elems + 1)
    for vmap, f in zip(dm.v_maps, profiles):
        if f is None:
            continue
        keep = vmap >= 0
        out[vmap[keep]] = np.asarray(f(x), dtype=float)[keep]
    return out


def interpolate_state(
    sys: DiscretizedSystem,
    z: Optional[Profile],
    v_list: Sequence[Optional[Profile]],
    z_dot: Optional[Profile] = None,
    v_dot_list: Optional[Sequence[Optional[Profile]]] = None,
    dz: Optional[Profile] = None,
    dz_dot: Optional[Profile] = None,
) -> BeamState:
    """
    닫힌 형식 함수의 절점 보간

    기울기 자유도는 해석적 도함수가 주어지면 그것을, 아니면 h/100 중심 차분을 쓴다.

    Args:
        sys: 이산 시스템
        z, z_dot: 횡변위와 속도 (None 이면 0)
        v_list, v_dot_list: 홀수층 축변위와 속도 (블록 순서)
        dz, dz_dot: z, z_dot 의 도함수

    Returns:
        t=0 상태
    """
    v_dot_list = v_dot_list if v_dot_list is not None else [None] * len(v_list)
    u = _z_coefficients(sys, z, dz) + _v_coefficients(sys, v_list)
    v = _z_coefficients(sys, z_dot, dz_dot) + _v_coefficients(sys, v_dot_list)
    return BeamState(t=0.0, u_coef=u, v_coef=v)


def _real_mode(sys: DiscretizedSystem, w: np.ndarray) -> np.ndarray:
    """복소 고유벡터를 최대 성분이 실수가 되도록 회전한 뒤 실수부, 단위 에너지"""
    pivot = w[np.argmax(np.abs(w))]
    y = np.real(w * np.conj(pivot) / abs(pivot))
    e = _energy_vec(sys, y)
    if e <= 0:
        raise NumericalError("고유벡터의 에너지가 0 입니다")
    return y / np.sqrt(e)


def modal_state(sys: DiscretizedSystem, modes: ModalBasis, index: int) -> BeamState:
    """
    고유벡터 하나로 만든 실수 초기 상태 (켤레 쌍 λ, λ̄ 만 포함, 단위 에너지)
    """
    if not 0 <= index < len(modes):
        raise InvalidParameterError(f"모드 번호 {index} 가 범위를 벗어났습니다 (0..{len(modes) - 1})")
    return BeamState.from_stacked(0.0, _real_mode(sys, modes.vectors[:, index]))


def _upper_resolved(sys: DiscretizedSystem, modes: ModalBasis) -> np.ndarray:
    lam = modes.eigenvalues
    cutoff = sys.resolution_cutoff()
    upper = lam.imag >= -1e-10 * np.maximum(1.0, np.abs(lam))
    return np.flatnonzero(upper & (np.abs(lam.imag) < cutoff))


def generic_state(
    sys: DiscretizedSystem,
    seed: Optional[int] = None,
    n_modes: int = 10,
    perturbation: float = 0.01,
    modes: Optional[ModalBasis] = None,
) -> BeamState:
    """
    일반 초기 데이터

    최저 n_modes 개 모드 (Im λ ≥ 0) 의 동일 에너지 합에
    해상 모드 좌표의 무작위 섭동 (에너지 비 perturbation) 을 더한다.
    """
    modes = discrete_modes(sys) if modes is None else modes
    resolved = _upper_resolved(sys, modes)
    if resolved.size == 0:
        raise NumericalError("해상 가능한 모드가 없습니다 (메쉬를 세분하세요)")

    y = np.zeros(sys.state_size)
    for idx in resolved[:n_modes]:
        y += _real_mode(sys, modes.vectors[:, idx])

    rng = np.random.default_rng(settings.default_seed if seed is None else seed)
    coef = rng.standard_normal(resolved.size) + 1j * rng.standard_normal(resolved.size)
    noise = np.real(modes.vectors[:, resolved] @ coef)
    e_noise = _energy_vec(sys, noise)
    if perturbation > 0 and e_noise > 0:
        y += noise * np.sqrt(perturbation * _energy_vec(sys, y) / e_noise)
    return BeamState.from_stacked(0.0, y)


def zero_state(sys: DiscretizedSystem) -> BeamState:
    return BeamState.zeros(sys.n)


def mode_indices_upper(sys: DiscretizedSystem, modes: ModalBasis) -> List[int]:
    """Im λ ≥ 0 인 해상 모드 번호 (|λ| 오름차순)"""
    return [int(i) for i in _upper_resolved(sys, modes)]
