"""
스펙트럼 서비스

고유값을 두 가지 독립 경로로 계산한다.
1. 이산 펜슬 (E, A) 의 조밀 일반화 고유값 문제
2. 비연성 부분계의 초월 특성식 근 찾기 (레일리 보 + 홀수층 파동)
근 찾기 결과는 편각 원리로 개수를 인증한다.

레일리 보 고유값 λ = i·s, 파동 고유값 λ = i·c·θ
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import LinAlgError, eig, eigh, svd
from scipy.optimize import newton

from app.config import settings
from app.exceptions import (
    AssumptionViolationError,
    DegenerateFrequencyError,
    IncompleteSpectrumError,
    InvalidParameterError,
    NotAnEigenvalueError,
    NumericalError,
    RootFailureError,
    SizeLimitError,
)
from app.models.layers import BeamParams, Gains, LayerStack
from app.models.spectrum import SOURCE_PENCIL, SOURCE_ROOTS, CharacteristicParams, Spectrum
from app.models.system import DiscretizedSystem
from app.services.assembly_service import first_order_pencil, is_decoupled
from numerics.contour import ComplexBox, count_roots

logger = logging.getLogger(__name__)

# 열 스케일링을 시작하는 지수 크기
SCALE_CAP = 30.0
# 뉴턴 근 허용 정규화 잔차
ROOT_RESIDUAL_TOL = 1e-10
# 저차 모드 격자 세분 횟수
GRID_REFINEMENTS = 3


# ===========================================
# 레일리 보 특성식
# ===========================================

def theta_xi(s, p: CharacteristicParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    K ζ² − α s² ζ − s² = 0 의 두 근 (θ₀, −ξ₀)

    θ₀ = s²(α + w)/(2K), ξ₀ = 2/(α + w), w = √(α² + 4K/s²) (주분지)
    θ₀ 는 αs²/K 처럼 자라고 ξ₀ → 1/α 이며 θ₀ξ₀ = s²/K 이다.

    Args:
        s: 복소 주파수 (스칼라 또는 배열)
        p: 레일리 분기 파라미터

    Returns:
        (θ₀, ξ₀)
    """
    s = np.asarray(s, dtype=complex)
    if np.any(s == 0):
        raise DegenerateFrequencyError("s = 0 에서는 θ₀, ξ₀ 가 정의되지 않습니다")
    s2 = s * s
    w = np.sqrt(p.alpha**2 + 4.0 * p.K / s2)
    theta = s2 * (p.alpha + w) / (2.0 * p.K)
    xi = 2.0 / (p.alpha + w)
    if theta.ndim == 0:
        return complex(theta), complex(xi)
    return theta, xi


def _rayleigh_columns(s: np.ndarray, p: CharacteristicParams):
    """경계 행렬과 열 스케일 인자"""
    theta, xi = theta_xi(s, p)
    theta = np.asarray(theta, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    pr = np.sqrt(theta)
    qr = np.sqrt(xi)
    L = p.L
    ig = 1j * p.gamma * s

    sp, cp = np.sin(pr * L), np.cos(pr * L)
    sq, cq = np.sinh(qr * L), np.cosh(qr * L)

    mat = np.zeros(s.shape + (4, 4), dtype=complex)
    # u(0)
    mat[..., 0, 1] = 1.0
    mat[..., 0, 3] = 1.0
    # u'(0)
    mat[..., 1, 0] = 1.0
    mat[..., 1, 2] = 1.0
    # u(L)
    mat[..., 2, 0] = sp / pr
    mat[..., 2, 1] = cp
    mat[..., 2, 2] = sq / qr
    mat[..., 2, 3] = cq
    # u''(L) + iγ₀ s u'(L)
    mat[..., 3, 0] = -pr * sp + ig * cp
    mat[..., 3, 1] = -theta * cp - ig * pr * sp
    mat[..., 3, 2] = qr * sq + ig * cq
    mat[..., 3, 3] = xi * cq + ig * qr * sq

    grow_p = np.abs(pr.imag) * L
    grow_q = np.abs(qr.real) * L
    fac_p = np.where(grow_p > SCALE_CAP, np.exp(-grow_p), 1.0)
    fac_q = np.where(grow_q > SCALE_CAP, np.exp(-grow_q), 1.0)
    mat[..., :, 0:2] *= fac_p[..., None, None]
    mat[..., :, 2:4] *= fac_q[..., None, None]
    return mat, pr, qr, fac_p, fac_q


def rayleigh_boundary_matrix(s, p: CharacteristicParams) -> np.ndarray:
    """
    일반해 기저 sin(px)/p, cos(px), sinh(qx)/q, cosh(qx) 에 대한 4×4 경계 행렬

    p² = θ₀, q² = ξ₀ 이며 기저가 p, q 에 대해 짝함수이므로 행렬식은 s 에 대해 해석적이다.
    """
    if p.branch != "rayleigh":
        raise InvalidParameterError("레일리 분기 파라미터가 필요합니다")
    mat, *_ = _rayleigh_columns(np.asarray(s, dtype=complex), p)
    return mat


def rayleigh_char_residual(s, p: CharacteristicParams, normalized: bool = False):
    """
    특성 행렬식

    Args:
        s: 복소 주파수 (스칼라 또는 배열)
        p: 레일리 분기 파라미터
        normalized: True 이면 행 노름 곱 (Hadamard 상한) 으로 나눈 값

    Returns:
        복소 잔차 (λ = i·s 가 고유값이면 0)
    """
    s_arr = np.asarray(s, dtype=complex)
    mat = rayleigh_boundary_matrix(s_arr, p)
    det = np.linalg.det(mat)
    if normalized:
        det = det / np.prod(np.linalg.norm(mat, axis=-1), axis=-1)
    if s_arr.ndim == 0:
        return complex(det)
    return det


def _log_ratio(a: float) -> float:
    return float(np.log(abs((a + 1.0) / (a - 1.0))))


def rayleigh_asymptotic_sigma(n: int, p: CharacteristicParams) -> complex:
    """
    σ₀,ₙ = (i/2L)·ln|(γ₀√(K/α)+1)/(γ₀√(K/α)−1)| + nπ/L   (γ₀ > √(α/K))
    실수부는 γ₀ < √(α/K) 이면 (n+½)π/L
    """
    a = p.gamma * p.speed
    if abs(a - 1.0) <= settings.assumption_rtol:
        raise AssumptionViolationError(f"γ₀ = √(α/K) 에서는 점근식이 정의되지 않습니다 (γ₀={p.gamma})")
    real = n * np.pi / p.L if a > 1.0 else (n + 0.5) * np.pi / p.L
    return complex(real, _log_ratio(a) / (2.0 * p.L))


def rayleigh_seed(n: int, p: CharacteristicParams) -> complex:
    """θ₀ = αs²/K + 1/α + O(s⁻²) 를 이용한 뉴턴 초기값 s"""
    sigma = rayleigh_asymptotic_sigma(n, p)
    return complex(p.speed * np.sqrt(sigma * sigma - 1.0 / p.alpha + 0j))


# ===========================================
# 파동 특성식
# ===========================================

def wave_char_residual(theta, p: CharacteristicParams):
    """cos θL + iγc sin θL"""
    theta = np.asarray(theta, dtype=complex)
    value = np.cos(theta * p.L) + 1j * p.gamma * p.speed * np.sin(theta * p.L)
    return complex(value) if value.ndim == 0 else value


def wave_theta(k: int, n: int, p: CharacteristicParams) -> Tuple[complex, complex]:
    """
    홀수층 k 의 n 번째 파동 고유값

    e^{2iθL} = (γc−1)/(γc+1) 의 해, 분기는 sign(γc − 1) 로 선택

    Returns:
        (θ_k,n, λ_k,n = i·c·θ_k,n)
    """
    if p.branch != "wave":
        raise InvalidParameterError("파동 분기 파라미터가 필요합니다")
    if p.k is not None and p.k != k:
        raise InvalidParameterError(f"층 번호 불일치: {k} != {p.k}")
    a = p.gamma * p.speed
    if abs(a - 1.0) <= settings.assumption_rtol:
        raise AssumptionViolationError(f"γ_{k}·√(E/ρ) = 1 에서는 파동 분기가 정의되지 않습니다")
    real = n * np.pi / p.L if a > 1.0 else (n + 0.5) * np.pi / p.L
    theta = complex(real, _log_ratio(a) / (2.0 * p.L))
    return theta, 1j * p.speed * theta


def _wave_index_range(p: CharacteristicParams, n_max: int) -> range:
    # γc < 1 이면 θ_{-n-1} 이 θ_n 의 켤레 짝
    if p.gamma * p.speed > 1.0:
        return range(-n_max, n_max + 1)
    return range(-n_max - 1, n_max + 1)


def find_wave_roots(p: CharacteristicParams, n_max: int) -> Spectrum:
    """
    닫힌 형식 파동 고유값과 θ 평면 편각 원리 인증

    Args:
        p: 파동 분기 파라미터
        n_max: 최대 모드 번호

    Returns:
        Spectrum (source=characteristic-roots)
    """
    if n_max < 1:
        raise InvalidParameterError(f"n_max 는 1 이상이어야 합니다: {n_max}")
    indices = list(_wave_index_range(p, n_max))
    thetas = []
    eigenvalues = []
    for n in indices:
        theta, lam = wave_theta(p.k, n, p)
        thetas.append(theta)
        eigenvalues.append(lam)
    thetas = np.array(thetas)

    scale = np.abs(np.cos(thetas * p.L)) + p.gamma * p.speed * np.abs(np.sin(thetas * p.L))
    residuals = np.abs(wave_char_residual(thetas, p)) / scale

    half = 0.5 * np.pi / p.L
    im0 = thetas[0].imag
    box = ComplexBox(
        thetas.real.min() - half, thetas.real.max() + half,
        im0 - half, im0 + half,
    )
    found = count_roots_in_box(lambda z: wave_char_residual(z, p), box)
    if found != len(indices):
        raise IncompleteSpectrumError(
            f"{p.label}: 회전수 {found} 가 닫힌 형식 근 개수 {len(indices)} 와 다릅니다 (상자 {box})"
        )
    logger.info(f"{p.label} 분기 인증 완료: {found}개")
    return Spectrum.build(
        eigenvalues,
        SOURCE_ROOTS,
        branches=[p.label] * len(indices),
        indices=indices,
        residuals=residuals,
        certified=[True] * len(indices),
    )


# ===========================================
# 편각 원리
# ===========================================

def count_roots_in_box(f: Callable[[np.ndarray], np.ndarray], box: ComplexBox) -> int:
    """
    직사각형 내부 근 개수 (중복도 포함)

    경계 근접 근이 있으면 상자를 1% 확대한다.
    """
    return count_roots(
        f,
        box,
        initial_samples=settings.contour_initial_samples,
        max_refine=settings.contour_max_refine,
    )


# ===========================================
# 레일리 근 찾기
# ===========================================

def _newton_root(
    f: Callable[[complex], complex],
    x0: complex,
    tol: float,
    max_iters: int,
) -> Tuple[complex, bool, int]:
    """중심 차분 도함수를 쓰는 복소 뉴턴 반복"""

    def fprime(z):
        h = 1e-6 * max(1.0, abs(z))
        return (f(z + h) - f(z - h)) / (2.0 * h)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        root, info = newton(
            f,
            x0,
            fprime=fprime,
            tol=tol * max(1.0, abs(x0)),
            maxiter=max_iters,
            full_output=True,
            disp=False,
        )
    root = complex(root)
    return root, bool(info.converged) and np.isfinite(root), int(info.iterations)


def _dedupe(roots: List[complex], rtol: float = 1e-7) -> List[complex]:
    unique: List[complex] = []
    for r in roots:
        if all(abs(r - u) > rtol * max(1.0, abs(r)) for u in unique):
            unique.append(r)
    return unique


@dataclass(frozen=True)
class _RootStrip:
    """근 탐색 영역"""
    spacing: float
    left: float
    bottom: float
    top: float


def _strip(p: CharacteristicParams, n_max: int) -> _RootStrip:
    spacing = np.pi * p.speed / p.L
    im_asym = p.speed * rayleigh_asymptotic_sigma(n_max, p).imag
    return _RootStrip(
        spacing=spacing,
        left=0.25 * spacing,
        bottom=-0.25 * spacing,
        top=max(2.0 * spacing, 4.0 * im_asym),
    )


def _edge_after(n: int, p: CharacteristicParams) -> float:
    """n 번째와 n+1 번째 근 사이 실수 좌표"""
    if n >= 2:
        return 0.5 * (rayleigh_seed(n, p).real + rayleigh_seed(n + 1, p).real)
    return 0.5 * p.speed * (rayleigh_asymptotic_sigma(n, p).real + rayleigh_asymptotic_sigma(n + 1, p).real)


def _grid_search(
    f: Callable[[complex], complex],
    fnorm: Callable,
    box: ComplexBox,
    pitch: float,
    tol: float,
    max_iters: int,
) -> List[complex]:
    """격자 시작점 뉴턴 + 상자 내부 근만 유지"""
    xs = np.arange(box.re_min + 0.5 * pitch, box.re_max, pitch)
    ys = np.arange(box.im_min + 0.5 * pitch, box.im_max, pitch)
    roots = []
    for y in ys:
        for x in xs:
            root, ok, _ = _newton_root(f, complex(x, y), tol, max_iters)
            if ok and box.contains(root) and abs(fnorm(root)) < ROOT_RESIDUAL_TOL:
                roots.append(root)
    return sorted(_dedupe(roots), key=lambda z: (z.real, z.imag))


def _merge_roots(known: List[complex], new: List[complex]) -> List[complex]:
    """중복 제거 후 Re s 오름차순"""
    return sorted(_dedupe(list(known) + list(new)), key=lambda z: (z.real, z.imag))


def rayleigh_strip_box(p: CharacteristicParams, n_max: int, re_max: float) -> ComplexBox:
    """n_max 개 탐색에 쓰는 띠를 Re s = re_max 에서 자른 상자"""
    strip = _strip(p, n_max + 1)
    return ComplexBox(strip.left, re_max, strip.bottom, strip.top)


def _certified_box(roots: List[complex], n_max: int, p: CharacteristicParams) -> ComplexBox:
    """n_max 번째와 n_max+1 번째 근 사이에서 끝나는 띠 상자"""
    return rayleigh_strip_box(p, n_max, 0.5 * (roots[n_max - 1].real + roots[n_max].real))


def find_rayleigh_roots(
    p: CharacteristicParams,
    n_max: int,
    n0: Optional[int] = None,
    tol: Optional[float] = None,
    max_iters: Optional[int] = None,
) -> Spectrum:
    """
    레일리 보 특성식 근 s₀,ₙ (Re s > 0) 와 반사로 채운 켤레

    - 저차 상자 (교차 번호 n0 의 점근 위치까지): 격자 탐색 + 뉴턴, 회전수로 개수 확인
    - 그 위: 점근 초기값 뉴턴, 새 근이 n_max+1 개가 될 때까지 초기값 번호를 올린다
    - 번호 n 은 띠 안의 근을 Re s 순으로 센 값 (1..n_max 빠짐 없음)
    - 1..n_max 번째 근만 담는 상자의 회전수 = n_max 로 인증, 어긋나면 띠 전체 격자 탐색으로 보충

    점근 번호 m (σ₀,ₘ 와 가장 가까운 번호) 은 n 과 다를 수 있다. rayleigh_asymptotic_match 참고.

    Args:
        p: 레일리 분기 파라미터
        n_max: 최대 모드 번호
        n0: 교차 번호 (미지정시 설정값)
        tol: 뉴턴 허용 오차
        max_iters: 뉴턴 최대 반복

    Returns:
        Spectrum (source=characteristic-roots), λ = i·s
    """
    if p.branch != "rayleigh":
        raise InvalidParameterError("레일리 분기 파라미터가 필요합니다")
    if n_max < 1:
        raise InvalidParameterError(f"n_max 는 1 이상이어야 합니다: {n_max}")
    n0 = settings.crossover_n0 if n0 is None else n0
    tol = settings.newton_tol if tol is None else tol
    max_iters = settings.newton_max_iters if max_iters is None else max_iters

    def f(z):
        return rayleigh_char_residual(z, p)

    def fnorm(z):
        return rayleigh_char_residual(z, p, normalized=True)

    strip = _strip(p, n_max + 1)
    n_low = max(1, min(n0, n_max))

    # 저차 모드: 격자 탐색
    low_box = ComplexBox(strip.left, _edge_after(n_low, p), strip.bottom, strip.top)
    expected_low = count_roots_in_box(fnorm, low_box)
    pitch = 0.5 * strip.spacing
    low_roots: List[complex] = []
    for attempt in range(GRID_REFINEMENTS + 1):
        low_roots = _grid_search(f, fnorm, low_box, pitch, tol, max_iters)
        if len(low_roots) == expected_low:
            break
        logger.info(f"저차 모드 {len(low_roots)}/{expected_low}개, 격자 간격 절반으로 재시도")
        pitch *= 0.5
    else:
        raise IncompleteSpectrumError(
            f"저차 모드 탐색 불완전: 찾은 근 {len(low_roots)}개, 회전수 {expected_low} (상자 {low_box})"
        )
    if len(low_roots) != n_low:
        logger.info(f"저차 상자 근 {len(low_roots)}개, 교차 번호 {n_low} (점근 번호와 순서 번호가 다름)")

    # 고차 모드: 점근 초기값 뉴턴 (번호는 이어 붙이고 초기값은 계속 올린다)
    roots = list(low_roots)
    seed_index = n_low + 1
    seed_cap = n_max + 2 * n_low + 3
    while len(roots) < n_max + 1:
        if seed_index > seed_cap:
            raise IncompleteSpectrumError(
                f"초기값 번호 {seed_cap} 까지 근 {len(roots)}개만 찾았습니다 (필요 {n_max + 1})"
            )
        seed = rayleigh_seed(seed_index, p)
        root, ok, iters = _newton_root(f, seed, tol, max_iters)
        resid = abs(fnorm(root)) if ok else float("inf")
        if not ok or resid >= ROOT_RESIDUAL_TOL:
            logger.warning(f"뉴턴 실패 m={seed_index}: 초기값 {seed}, 최종 {root}, 반복 {iters}, 잔차 {resid:.3e}")
            raise RootFailureError(
                f"m={seed_index} 뉴턴 미수렴: 초기값 {seed:.6g}, 최종 {root:.6g}, 반복 {iters}, 정규화 잔차 {resid:.3e}"
            )
        if root.real <= strip.left or not strip.bottom < root.imag < strip.top:
            logger.debug(f"띠 밖 근 무시 m={seed_index}: {root}")
        else:
            roots = _merge_roots(roots, [root])
        seed_index += 1

    strip_box = _certified_box(roots, n_max, p)
    counted = count_roots_in_box(fnorm, strip_box)
    if counted != n_max:
        logger.warning(f"회전수 {counted} ≠ {n_max}, 띠 전체 격자 탐색으로 보충 (상자 {strip_box})")
        extra = _grid_search(f, fnorm, strip_box, 0.25 * strip.spacing, tol, max_iters)
        roots = _merge_roots(roots, extra)
        strip_box = _certified_box(roots, n_max, p)
        counted = count_roots_in_box(fnorm, strip_box)
    inside = sum(1 for r in roots[:n_max] if strip_box.contains(r))
    if counted != n_max or inside != n_max:
        raise IncompleteSpectrumError(
            f"인증 불일치: 회전수 {counted}, 상자 내부 근 {inside}, 필요 {n_max} (상자 {strip_box})"
        )
    logger.info(f"레일리 근 인증 완료: {counted}개 (상자 {strip_box})")

    labelled = list(enumerate(roots[:n_max], start=1))
    eigenvalues, indices, residuals = [], [], []
    for n, s in labelled:
        lam = 1j * s
        r = abs(fnorm(s))
        eigenvalues += [lam, np.conj(lam)]
        indices += [n, -n]
        residuals += [r, r]
        if lam.real >= 0 and p.gamma > 0:
            logger.warning(f"Re λ ≥ 0 인 레일리 근: n={n}, λ={lam}")
    count = len(eigenvalues)
    return Spectrum.build(
        eigenvalues,
        SOURCE_ROOTS,
        branches=["rayleigh"] * count,
        indices=indices,
        residuals=residuals,
        certified=[True] * count,
    )


def rayleigh_frequencies(spectrum: Spectrum) -> Dict[int, complex]:
    """스펙트럼에서 n > 0 인 레일리 근 s = -iλ 추출"""
    return {
        int(n): complex(lam / 1j)
        for lam, n, branch in zip(spectrum.eigenvalues, spectrum.indices, spectrum.branches)
        if branch == "rayleigh" and n > 0
    }


def rayleigh_asymptotic_match(s: complex, p: CharacteristicParams) -> Tuple[int, float]:
    """
    근 s 와 가장 가까운 점근 위치 √(K/α)·σ₀,ₘ

    Returns:
        (m, |s − √(K/α)·σ₀,ₘ|), 고유값 기준으로는 |λ − i√(K/α)σ₀,ₘ| 와 같다
    """
    s = complex(s)
    shift = 0.0 if p.gamma * p.speed > 1.0 else 0.5
    guess = int(round(s.real * p.L / (np.pi * p.speed) - shift))
    candidates = [m for m in (guess - 1, guess, guess + 1) if m >= 0]
    gaps = {m: abs(s - p.speed * rayleigh_asymptotic_sigma(m, p)) for m in candidates}
    best = min(gaps, key=gaps.get)
    return best, float(gaps[best])


@dataclass(frozen=True)
class ModeShape:
    """표본화된 모드 u(x) 와 정규화된 (u'', s·u')"""
    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    d2u: np.ndarray
    s: complex

    @property
    def profile(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.d2u, self.s * self.du


def rayleigh_mode_shape(s: complex, p: CharacteristicParams, x_samples: np.ndarray) -> ModeShape:
    """
    경계 행렬 영공간 벡터로 모드 계수를 구하고 ‖(u'', s·u')‖ = 1 로 정규화

    Args:
        s: 인증된 근
        p: 레일리 분기 파라미터
        x_samples: 표본 위치 (0 과 L 포함 권장)

    Returns:
        ModeShape
    """
    s = complex(s)
    mat, pr, qr, fac_p, fac_q = _rayleigh_columns(np.asarray(s), p)
    singular = svd(mat, compute_uv=False)
    if singular[-1] > 1e-8 * singular[0]:
        raise NotAnEigenvalueError(
            f"s={s} 는 근이 아닙니다 (σ_min/σ_max = {singular[-1] / singular[0]:.3e})"
        )
    _, _, vh = svd(mat)
    coef = np.conj(vh[-1])
    coef = coef * np.array([fac_p, fac_p, fac_q, fac_q], dtype=complex).ravel()
    pr, qr = complex(pr), complex(qr)

    x = np.asarray(x_samples, dtype=float)
    sp, cp = np.sin(pr * x), np.cos(pr * x)
    sq, cq = np.sinh(qr * x), np.cosh(qr * x)
    u = coef[0] * sp / pr + coef[1] * cp + coef[2] * sq / qr + coef[3] * cq
    du = coef[0] * cp - coef[1] * pr * sp + coef[2] * cq + coef[3] * qr * sq
    d2u = -coef[0] * pr * sp - coef[1] * pr**2 * cp + coef[2] * qr * sq + coef[3] * qr**2 * cq

    norm = np.sqrt(trapezoid(np.abs(d2u) ** 2 + np.abs(s * du) ** 2, x))
    return ModeShape(x=x, u=u / norm, du=du / norm, d2u=d2u / norm, s=s)


def asymptotic_vertical_lines(params: BeamParams, stack: LayerStack, gains: Gains) -> Dict[str, float]:
    """
    분기별 점근 수직선 Re λ

    보: −√(K/α)·Im σ₀, 파동 k: −c_k·Im θ_k
    """
    lines = {}
    beam = CharacteristicParams.rayleigh(params, gains)
    lines[beam.label] = -beam.speed * rayleigh_asymptotic_sigma(0, beam).imag
    for k in stack.odd_indices:
        wave = CharacteristicParams.wave(params, stack, gains, k)
        _, lam = wave_theta(k, 0, wave)
        lines[wave.label] = float(lam.real)
    return lines


def roots_spectrum(params: BeamParams, stack: LayerStack, gains: Gains, n_max: int,
                   n0: Optional[int] = None) -> Spectrum:
    """비연성 시스템의 특성식 스펙트럼 (레일리 + 모든 파동 분기)"""
    parts = [find_rayleigh_roots(CharacteristicParams.rayleigh(params, gains), n_max, n0=n0)]
    for k in stack.odd_indices:
        parts.append(find_wave_roots(CharacteristicParams.wave(params, stack, gains, k), n_max))
    return Spectrum.merge(parts, SOURCE_ROOTS)


# ===========================================
# 이산 펜슬 스펙트럼
# ===========================================

def _check_size(sys: DiscretizedSystem, dense_limit: Optional[int]) -> None:
    limit = settings.dense_limit if dense_limit is None else dense_limit
    if sys.n > limit:
        logger.error(f"자유도 {sys.n} 가 조밀 한도 {limit} 를 넘습니다")
        raise SizeLimitError(f"자유도 {sys.n} 가 조밀 한도 {limit} 를 넘습니다 (n_elems 를 줄이세요)")


def pencil_backward_errors(E: np.ndarray, A: np.ndarray, lam: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """‖(A − λE)w‖ / ((‖A‖ + |λ|‖E‖)‖w‖)"""
    norm_a = np.linalg.norm(A, 1)
    norm_e = np.linalg.norm(E, 1)
    resid = A @ vecs - (E @ vecs) * lam[None, :]
    return np.linalg.norm(resid, axis=0) / ((norm_a + np.abs(lam) * norm_e) * np.linalg.norm(vecs, axis=0))


def _pencil_eig(sys: DiscretizedSystem, vectors: bool):
    E, A = first_order_pencil(sys)
    try:
        if not np.any(sys.D):
            # 보존계: S φ = μ M φ, λ = ±i√μ (정확히 허수축)
            mu, phi = eigh(sys.S, sys.M)
            omega = np.sqrt(np.maximum(mu, 0.0))
            lam = np.concatenate([1j * omega, -1j * omega])
            if not vectors:
                return lam, None, E, A
            top = np.hstack([phi, phi]).astype(complex)
            W = np.vstack([top, top * lam[None, :]])
            return lam, W, E, A
        if vectors:
            lam, W = eig(A, E)
        else:
            lam = eig(A, E, right=False)
            W = None
    except LinAlgError as e:
        raise NumericalError(f"고유값 계산 실패: {e}") from e
    if not np.all(np.isfinite(lam)):
        raise NumericalError("유한하지 않은 고유값이 계산되었습니다")
    return lam, W, E, A


def discrete_spectrum(
    sys: DiscretizedSystem,
    dense_limit: Optional[int] = None,
    with_residuals: bool = True,
) -> Spectrum:
    """
    1계 펜슬의 모든 일반화 고유값

    Args:
        sys: 이산 시스템
        dense_limit: 자유도 한도 (미지정시 설정값)
        with_residuals: 고유쌍 후방 오차 계산 여부

    Returns:
        Spectrum (source=discrete-pencil)
    """
    _check_size(sys, dense_limit)
    lam, W, E, A = _pencil_eig(sys, vectors=with_residuals)
    residuals = pencil_backward_errors(E, A, lam, W) if with_residuals else None
    label = "pencil" if sys.subsystem == "full" else f"pencil:{sys.subsystem}"
    spectrum = Spectrum.build(lam, SOURCE_PENCIL, branches=[label] * lam.size, residuals=residuals)

    defect = spectrum.conjugate_defect()
    if defect > settings.conj_pair_tol:
        logger.warning(f"켤레 쌍 결함 {defect:.3e} 가 허용치 {settings.conj_pair_tol} 를 넘습니다")
    return spectrum


@dataclass(frozen=True)
class ModalBasis:
    """고유값과 상태공간 고유벡터 (열), |λ| 오름차순"""
    eigenvalues: np.ndarray
    vectors: np.ndarray

    def __len__(self) -> int:
        return int(self.eigenvalues.size)


def _sorted_basis(lam: np.ndarray, W: np.ndarray) -> ModalBasis:
    order = np.lexsort((lam.imag, np.abs(lam)))
    return ModalBasis(eigenvalues=lam[order], vectors=W[:, order])


def discrete_modes(sys: DiscretizedSystem, dense_limit: Optional[int] = None) -> ModalBasis:
    """
    고유값과 상태공간 고유벡터

    비연성 시스템은 블록별로 풀어서 전체 상태 벡터에 끼워 넣는다.
    """
    _check_size(sys, dense_limit)
    slices = sys.dof_map.block_slices()
    if not is_decoupled(sys) or len(slices) == 1:
        lam, W, _, _ = _pencil_eig(sys, vectors=True)
        return _sorted_basis(lam, W)

    n = sys.n
    all_lam, all_vecs = [], []
    for sl in slices:
        sub = _block_system(sys, sl)
        lam, W, _, _ = _pencil_eig(sub, vectors=True)
        nb = sl.stop - sl.start
        full = np.zeros((2 * n, lam.size), dtype=complex)
        full[sl, :] = W[:nb, :]
        full[n + sl.start:n + sl.stop, :] = W[nb:, :]
        all_lam.append(lam)
        all_vecs.append(full)
    return _sorted_basis(np.concatenate(all_lam), np.hstack(all_vecs))


def _block_system(sys: DiscretizedSystem, sl: slice) -> DiscretizedSystem:
    """블록 슬라이스만 잘라낸 시스템 (고유값 계산 전용)"""
    return DiscretizedSystem(
        M=sys.M[sl, sl],
        S=sys.S[sl, sl],
        D=sys.D[sl, sl],
        dof_map=sys.dof_map,
        coupled=False,
        S_shear=sys.S_shear[sl, sl],
        params=sys.params,
        stack=sys.stack,
        gains=sys.gains,
        mesh=sys.mesh,
        subsystem=sys.subsystem,
    )
