"""
분석 서비스

감쇠율 적합, 스펙트럼 가로좌표 비교, 구조적 수치 검사
(수반 관계, 영 고유값 배제, 강안정성 여유, 리즈 기저/콤팩트성 대리 지표)

주의: 에너지는 상태의 이차식이므로 상태가 e^{μt} 로 감쇠하면 에너지는 e^{2μt} 로 감쇠한다.
가로좌표와 비교할 때는 적합된 에너지 지수를 반으로 나눈다.
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh, svdvals

from app.config import settings
from app.exceptions import DegenerateFitError, InvalidParameterError
from app.models.layers import BeamParams, Gains, LayerStack
from app.models.spectrum import Spectrum
from app.models.state import BeamState, EnergyTrace
from app.models.system import DiscretizedSystem, Mesh
from app.schemas.report import (
    FLAG_CONSERVATIVE,
    FLAG_DEGENERATE,
    FLAG_SINGLE_MODE,
    FLAG_STABILITY,
    FLAG_TRUNCATED,
    CompactnessReport,
    DecayReport,
    StabilityMargins,
)
from app.services.assembly_service import assemble, generator_matrix, is_decoupled
from app.services.spectral_service import ModalBasis, discrete_modes

logger = logging.getLogger(__name__)

MIN_FIT_SAMPLES = 10
DEFAULT_WINDOW_FRACTION = 2.0 / 3.0
# E ≤ ENERGY_FLOOR·E(0) 이면 수치적 0 으로 본다
ENERGY_FLOOR = 1e-24
SINGLE_MODE_FRACTION = 0.9


# ===========================================
# 감쇠율 적합
# ===========================================

def fit_decay_rate(
    trace: EnergyTrace,
    window: Optional[Tuple[float, float]] = None,
    window_fraction: float = DEFAULT_WINDOW_FRACTION,
) -> DecayReport:
    """
    ln E(t) 최소제곱 기울기

    Args:
        trace: 에너지 기록
        window: 적합 구간 (t_start, t_end), 미지정시 마지막 window_fraction 구간
        window_fraction: 기본 구간 비율

    Returns:
        DecayReport (mu_fit, r_squared, fit_window, flags)
    """
    t = trace.times
    e = trace.energies
    if t.size == 0:
        raise DegenerateFitError("빈 에너지 기록입니다")
    if window is None:
        if not 0 < window_fraction <= 1:
            raise InvalidParameterError(f"적합 구간 비율은 (0, 1] 이어야 합니다: {window_fraction}")
        window = (t[-1] - window_fraction * (t[-1] - t[0]), t[-1])
    t0, t1 = window
    if not t0 < t1:
        raise InvalidParameterError(f"잘못된 적합 구간: {window}")

    mask = (t >= t0 - 1e-12 * max(1.0, abs(t0))) & (t <= t1 + 1e-12 * max(1.0, abs(t1)))
    tw, ew = t[mask], e[mask]
    flags = []

    floor = ENERGY_FLOOR * trace.initial_energy
    low = np.flatnonzero(ew <= floor)
    if low.size:
        cut = int(low[0])
        logger.warning(f"에너지가 수치적 0 에 도달하여 적합 구간을 t={tw[cut]:.6g} 이전으로 줄입니다")
        tw, ew = tw[:cut], ew[:cut]
        flags.append(FLAG_TRUNCATED)

    if tw.size < MIN_FIT_SAMPLES:
        raise DegenerateFitError(f"적합 구간 표본이 {tw.size}개로 부족합니다 (최소 {MIN_FIT_SAMPLES})")

    log_e = np.log(ew)
    slope, intercept = np.polyfit(tw, log_e, 1)
    fitted = slope * tw + intercept
    ss_res = float(np.sum((log_e - fitted) ** 2))
    ss_tot = float(np.sum((log_e - log_e.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))

    return DecayReport(
        mu_fit=float(slope),
        r_squared=r_squared,
        fit_window=(float(tw[0]), float(tw[-1])),
        flags=flags,
    )


def modal_energy_content(
    sys: DiscretizedSystem,
    state: BeamState,
    modes: Optional[ModalBasis] = None,
) -> Tuple[float, complex]:
    """
    초기 상태의 켤레 쌍별 에너지 비율 중 최대값

    Returns:
        (지배 쌍 에너지 비율, 해당 고유값)
    """
    modes = discrete_modes(sys) if modes is None else modes
    Q = sys.energy_matrix
    y = state.stacked
    coef, *_ = np.linalg.lstsq(modes.vectors, y.astype(complex), rcond=None)

    lam = modes.eigenvalues
    tol = 1e-10 * np.maximum(1.0, np.abs(lam))
    energies = np.zeros(lam.size)
    for i in range(lam.size):
        if lam[i].imag < -tol[i]:
            continue
        part = np.real(modes.vectors[:, i] * coef[i])
        if lam[i].imag > tol[i]:
            part = 2.0 * part
        energies[i] = 0.5 * float(part @ Q @ part)

    total = float(energies.sum())
    if total <= 0:
        return 0.0, complex(np.nan, np.nan)
    dominant = int(np.argmax(energies))
    return float(energies[dominant] / total), complex(lam[dominant])


def compare_decay_to_spectrum(
    sys: DiscretizedSystem,
    trace: EnergyTrace,
    spectrum: Spectrum,
    initial: Optional[BeamState] = None,
    window: Optional[Tuple[float, float]] = None,
    window_fraction: float = DEFAULT_WINDOW_FRACTION,
    modes: Optional[ModalBasis] = None,
) -> DecayReport:
    """
    적합 감쇠율과 해상 스펙트럼 가로좌표 비교

    rel_mismatch = |mu_fit/2 − abscissa| / |abscissa|

    Args:
        sys: 이산 시스템
        trace: 같은 시스템의 에너지 기록
        spectrum: 같은 시스템의 스펙트럼
        initial: 초기 상태 (주어지면 모드 에너지 분포로 단일 모드 여부 판단)
        window: 적합 구간
        window_fraction: 기본 구간 비율
        modes: 미리 계산한 고유쌍 (생략시 계산)

    Returns:
        DecayReport
    """
    resolved = spectrum.resolved(sys.resolution_cutoff())
    abscissa = resolved.abscissa if len(resolved) else spectrum.abscissa
    flags = []

    try:
        fit = fit_decay_rate(trace, window, window_fraction)
    except DegenerateFitError as e:
        logger.warning(f"감쇠율 적합 불가: {e}")
        fit = DecayReport(flags=[FLAG_DEGENERATE])
    flags.extend(fit.flags)

    conservative = sys.gains.is_conservative
    if conservative:
        flags.append(FLAG_CONSERVATIVE)
    elif abscissa >= 0:
        logger.warning(f"양의 이득에서 가로좌표가 음수가 아닙니다: {abscissa}")
        flags.append(FLAG_STABILITY)

    rel_mismatch = None
    if fit.mu_fit is not None and not conservative and abscissa != 0:
        rel_mismatch = abs(fit.mu_fit / 2.0 - abscissa) / abs(abscissa)

    fraction, dominant_re = None, None
    if initial is not None and FLAG_DEGENERATE not in flags:
        share, lam = modal_energy_content(sys, initial, modes)
        fraction = share
        if share >= SINGLE_MODE_FRACTION:
            flags.append(FLAG_SINGLE_MODE)
            dominant_re = float(lam.real)

    return DecayReport(
        mu_fit=fit.mu_fit,
        mu_spec=abscissa,
        rel_mismatch=rel_mismatch,
        fit_window=fit.fit_window,
        r_squared=fit.r_squared,
        flags=flags,
        dominant_mode_fraction=fraction,
        dominant_mode_re=dominant_re,
    )


# ===========================================
# 구조 검사
# ===========================================

def system_adjoint_residual(sys: DiscretizedSystem, trials: int = 100, seed: Optional[int] = None) -> float:
    """
    조립된 생성자로 수반 관계 G(γ)* = −G(−γ) 검사 (에너지 내적)

    max |⟨G(γ)Y, Ŷ⟩ + ⟨Y, G(−γ)Ŷ⟩| / (‖Y‖‖Ŷ‖)
    """
    if trials < 1:
        raise InvalidParameterError(f"시행 횟수는 1 이상이어야 합니다: {trials}")
    Q = sys.energy_matrix
    plus = Q @ generator_matrix(sys, 1.0)
    minus = Q @ generator_matrix(sys, -1.0)

    rng = np.random.default_rng(settings.default_seed if seed is None else seed)
    Y = rng.standard_normal((sys.state_size, trials))
    Yh = rng.standard_normal((sys.state_size, trials))

    # ⟨a, b⟩_Q = bᵀ Q a
    lhs = np.einsum("it,it->t", Yh, plus @ Y)
    rhs = np.einsum("it,it->t", Y, minus @ Yh)
    norms = np.sqrt(np.einsum("it,it->t", Y, Q @ Y) * np.einsum("it,it->t", Yh, Q @ Yh))
    worst = float(np.max(np.abs(lhs + rhs) / norms))
    logger.info(f"수반 관계 잔차: {worst:.3e} ({trials}회)")
    return worst


def adjoint_residual(
    params: BeamParams,
    stack: LayerStack,
    mesh: Mesh,
    gains: Gains,
    trials: int = 100,
    seed: Optional[int] = None,
) -> float:
    """비연성 시스템을 조립해 system_adjoint_residual 적용"""
    if trials < 1:
        raise InvalidParameterError(f"시행 횟수는 1 이상이어야 합니다: {trials}")
    return system_adjoint_residual(assemble(params, stack, gains, mesh, coupled=False), trials, seed)


def zero_eigen_margin(sys: DiscretizedSystem) -> float:
    """σ_min(S)"""
    return float(svdvals(sys.S)[-1])


def strong_stability_margin(
    sys: DiscretizedSystem,
    spectrum: Spectrum,
    cutoff: Optional[float] = None,
) -> StabilityMargins:
    """
    가로좌표, 최소 |λ|, 허수축까지 최소 거리

    cutoff 가 주어지면 |Im λ| < cutoff 인 해상 부분만 사용한다.
    """
    part = spectrum.resolved(cutoff) if cutoff is not None else spectrum
    if len(part) == 0:
        raise InvalidParameterError("여유 계산에 사용할 고유값이 없습니다")
    lam = part.eigenvalues
    return StabilityMargins(
        abscissa=float(lam.real.max()),
        min_modulus=float(np.abs(lam).min()),
        axis_distance=float(np.abs(lam.real).min()),
        resolved_only=cutoff is not None,
    )


def riesz_gram_condition(sys: DiscretizedSystem, count: int = 20) -> float:
    """
    에너지 정규화된 처음 count 개 고유벡터의 에너지 Gram 행렬 조건수

    Args:
        sys: 비연성 시스템
        count: 사용할 고유벡터 개수 (|λ| 오름차순)
    """
    if not is_decoupled(sys):
        raise InvalidParameterError("리즈 지표는 비연성 시스템에서만 계산합니다")
    modes = discrete_modes(sys)
    if count > len(modes):
        raise InvalidParameterError(f"고유벡터 {count}개를 요청했지만 {len(modes)}개뿐입니다")
    W = modes.vectors[:, :count]
    Q = sys.energy_matrix
    gram = W.conj().T @ Q @ W
    scale = np.sqrt(np.real(np.diag(gram)))
    gram = gram / np.outer(scale, scale)
    return float(np.linalg.cond(gram))


def _largest_generalized(a: np.ndarray, b: np.ndarray) -> float:
    n = a.shape[0]
    sym = 0.5 * (a + a.T)
    values = eigh(sym, b, eigvals_only=True, subset_by_index=[n - 1, n - 1])
    return float(values[-1])


def compactness_proxy(
    params: BeamParams,
    stack: LayerStack,
    gains: Gains,
    meshes: Sequence[int] = (32, 64, 128),
    element_order: int = 2,
) -> CompactnessReport:
    """
    연성 블록과 비연성 생성자의 에너지 노름 (메쉬 세분 비교)

    - 연성 블록 C = −S_shear 의 노름² = λ_max(Cᵀ M⁻¹ C, S_d)
    - 생성자 G_d 의 노름² = λ_max(G_dᵀ Q G_d, Q)
    """
    coupling, gen, gen_sq = [], [], []
    for n_elems in meshes:
        mesh = Mesh(n_elems=n_elems, L=params.L, element_order=element_order)
        coupled = assemble(params, stack, gains, mesh, coupled=True)
        decoupled = assemble(params, stack, gains, mesh, coupled=False)

        C = -coupled.S_shear
        if np.any(C):
            MinvC = np.linalg.solve(decoupled.M, C)
            coupling.append(float(np.sqrt(max(_largest_generalized(C.T @ MinvC, decoupled.S), 0.0))))
        else:
            coupling.append(0.0)

        G = generator_matrix(decoupled)
        QG = decoupled.energy_matrix @ G
        sq = _largest_generalized(G.T @ QG, decoupled.energy_matrix)
        gen_sq.append(sq)
        gen.append(float(np.sqrt(sq)))
        logger.info(f"n_elems={n_elems}: ‖C‖={coupling[-1]:.6g}, ‖G_d‖={gen[-1]:.6g}")

    return CompactnessReport(
        n_elems=list(meshes),
        coupling_norms=coupling,
        generator_norms=gen,
        generator_norms_sq=gen_sq,
    )
