"""
편각 원리 기반 근 개수 세기

직사각형 경계를 따라 f 의 위상 변화를 누적하여 회전수를 구한다.
인접 표본 간 위상 점프가 크면 해당 구간에 중점을 삽입해 적응적으로 세분한다.
모든 구간을 한 번 더 이분해 구간별 위상 변화가 바뀌지 않는지 확인한 뒤에만 결과를 낸다.
"""
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from app.exceptions import ContourResolutionError

logger = logging.getLogger(__name__)

# 세분 기준 위상 점프 (라디안)
REFINE_JUMP = np.pi / 4
# 최대 세분 후 허용 위상 점프
MAX_JUMP = np.pi / 2
MAX_POINTS = 400_000


@dataclass(frozen=True)
class ComplexBox:
    """복소 평면 직사각형 [re_min, re_max] × [im_min, im_max]"""
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ValueError(f"잘못된 직사각형: {self}")

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def dilated(self, factor: float) -> "ComplexBox":
        """중심 기준 factor 배 확대"""
        c = self.center
        hw = 0.5 * (self.re_max - self.re_min) * factor
        hh = 0.5 * (self.im_max - self.im_min) * factor
        return ComplexBox(c.real - hw, c.real + hw, c.imag - hh, c.imag + hh)

    def contains(self, z: complex) -> bool:
        return self.re_min < z.real < self.re_max and self.im_min < z.imag < self.im_max

    @classmethod
    def around(cls, z: complex, radius: float) -> "ComplexBox":
        return cls(z.real - radius, z.real + radius, z.imag - radius, z.imag + radius)

    def boundary_point(self, t: np.ndarray) -> np.ndarray:
        """
        반시계 방향 경계 매개화, t ∈ [0, 4]

        0→1 아래변, 1→2 오른변, 2→3 윗변, 3→4 왼변
        """
        t = np.asarray(t, dtype=float)
        corners = np.array([
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
            complex(self.re_min, self.im_min),
        ])
        edge = np.minimum(np.floor(t).astype(int), 3)
        frac = t - edge
        return corners[edge] + frac * (corners[edge + 1] - corners[edge])


class RootOnContour(Exception):
    """경계 위 또는 매우 가까이에 근이 있음 (내부 신호)"""


def _evaluate(f: Callable, z: np.ndarray) -> np.ndarray:
    values = np.asarray(f(z), dtype=complex)
    if values.shape != z.shape:
        values = np.array([complex(f(point)) for point in z])
    return values


def _check_values(values: np.ndarray, box: ComplexBox, zero_tol: float) -> None:
    mags = np.abs(values)
    if not np.all(np.isfinite(mags)):
        raise ContourResolutionError(f"경계에서 함수값이 유한하지 않습니다: {box}")
    if mags.min() <= zero_tol * mags.max():
        raise RootOnContour(str(box))


def _phase_jumps(values: np.ndarray) -> np.ndarray:
    return np.angle(values[1:] / values[:-1])


def _resolve_jumps(f, box: ComplexBox, t: np.ndarray, values: np.ndarray, max_refine: int, zero_tol: float):
    """인접 위상 점프가 REFINE_JUMP 이하가 될 때까지 해당 구간에 중점 삽입"""
    for _ in range(max_refine + 1):
        _check_values(values, box, zero_tol)
        bad = np.flatnonzero(np.abs(_phase_jumps(values)) > REFINE_JUMP)
        if bad.size == 0:
            return t, values
        if t.size + bad.size > MAX_POINTS:
            raise ContourResolutionError(f"표본 수 한도 {MAX_POINTS} 초과 (상자 {box})")
        t_new = 0.5 * (t[bad] + t[bad + 1])
        v_new = _evaluate(f, box.boundary_point(t_new))
        t = np.insert(t, bad + 1, t_new)
        values = np.insert(values, bad + 1, v_new)

    worst = float(np.abs(_phase_jumps(values)).max())
    if worst > MAX_JUMP:
        raise ContourResolutionError(
            f"위상 점프 {worst:.3f} rad 가 최대 세분 후에도 남아 있습니다 (상자 {box}, 표본 {t.size})"
        )
    return t, values


def _bisect_all(f, box: ComplexBox, t: np.ndarray, values: np.ndarray):
    """모든 구간에 중점 추가 (기존 표본 위치는 그대로)"""
    size = 2 * t.size - 1
    if size > MAX_POINTS:
        raise ContourResolutionError(f"표본 수 한도 {MAX_POINTS} 초과 (상자 {box})")
    mids = 0.5 * (t[:-1] + t[1:])
    t_fine = np.empty(size)
    t_fine[0::2] = t
    t_fine[1::2] = mids
    v_fine = np.empty(size, dtype=complex)
    v_fine[0::2] = values
    v_fine[1::2] = _evaluate(f, box.boundary_point(mids))
    return t_fine, v_fine


def winding_number(
    f: Callable[[np.ndarray], np.ndarray],
    box: ComplexBox,
    initial_samples: int = 64,
    max_refine: int = 16,
    zero_tol: float = 1e-12,
) -> int:
    """
    직사각형 경계에 대한 f 의 회전수

    점프 기준 세분만으로는 한 구간 안에서 위상이 2π 의 배수만큼 더 돌아도 알 수 없다.
    그래서 모든 구간을 한 번 더 이분해서 구간별 위상 변화가 그대로인지 확인하고,
    달라진 구간이 있으면 세분된 표본을 새 기준으로 삼아 반복한다.

    Args:
        f: 벡터화된 복소 함수
        box: 직사각형
        initial_samples: 변마다 초기 표본 수
        max_refine: 최대 세분 횟수 (점프 세분, 이분 확인 각각)
        zero_tol: min|f| ≤ zero_tol·max|f| 이면 경계 위 근으로 판단

    Returns:
        회전수 (내부 근 개수, 중복도 포함)

    Raises:
        ContourResolutionError: 표본 수 한도 초과 또는 이분 확인이 수렴하지 않음
    """
    t = np.linspace(0.0, 4.0, 4 * initial_samples + 1)
    values = _evaluate(f, box.boundary_point(t))
    t, values = _resolve_jumps(f, box, t, values, max_refine, zero_tol)

    for _ in range(max_refine + 1):
        coarse = _phase_jumps(values)
        t_fine, v_fine = _bisect_all(f, box, t, values)
        t_fine, v_fine = _resolve_jumps(f, box, t_fine, v_fine, max_refine, zero_tol)

        # 거친 표본 구간마다 세분된 위상 변화 합
        cumulative = np.concatenate([[0.0], np.cumsum(_phase_jumps(v_fine))])
        positions = np.searchsorted(t_fine, t)
        fine = np.diff(cumulative[positions])
        if np.all(np.abs(fine - coarse) < np.pi):
            return int(round(cumulative[-1] / (2.0 * np.pi)))
        logger.debug(f"이분 확인 불일치 {int(np.sum(np.abs(fine - coarse) >= np.pi))}개 구간, 표본 {t_fine.size}")
        t, values = t_fine, v_fine

    raise ContourResolutionError(f"회전수가 이분 확인 {max_refine + 1}회 안에 안정되지 않았습니다 (상자 {box})")


def count_roots(
    f: Callable[[np.ndarray], np.ndarray],
    box: ComplexBox,
    initial_samples: int = 64,
    max_refine: int = 16,
    zero_tol: float = 1e-12,
    max_dilations: int = 5,
) -> int:
    """
    경계 위 근을 피하기 위해 1% 씩 확대하며 회전수를 구한다.

    Returns:
        근 개수
    """
    current = box
    for attempt in range(max_dilations + 1):
        try:
            return winding_number(f, current, initial_samples, max_refine, zero_tol)
        except RootOnContour:
            logger.warning(f"경계 근접 근 감지, 상자 1% 확대 ({attempt + 1}/{max_dilations})")
            current = current.dilated(1.01)
    raise ContourResolutionError(f"경계에서 근을 피할 수 없습니다: {box}")
