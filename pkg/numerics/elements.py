"""
1차원 유한요소 형상함수 및 가우스 구적

- Hermite 3차 요소: 절점마다 (값, 기울기) 자유도, H² 적합
- Lagrange 1차/2차 요소: 절점값 자유도, H¹ 적합
모든 함수는 참조 구간 ξ ∈ [0, 1] 에서 평가하고 물리 좌표 미분은 요소 크기로 환산한다.
"""
from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=8)
def gauss_points(n_points: int = 4) -> Tuple[np.ndarray, np.ndarray]:
    """
    [0, 1] 구간 가우스-르장드르 점과 가중치

    Args:
        n_points: 구적점 수 (차수 2n-1 다항식까지 정확)

    Returns:
        (점, 가중치)
    """
    x, w = leggauss(n_points)
    return 0.5 * (x + 1.0), 0.5 * w


def hermite_shapes(xi: np.ndarray, he: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Hermite 3차 형상함수와 1, 2계 물리 미분

    자유도 순서: (w_a, w'_a, w_b, w'_b)

    Args:
        xi: 참조 좌표 배열
        he: 요소 크기

    Returns:
        (N, dN/dx, d²N/dx²), 각각 shape (len(xi), 4)
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    x2 = xi * xi
    x3 = x2 * xi
    N = np.stack([
        1.0 - 3.0 * x2 + 2.0 * x3,
        he * (xi - 2.0 * x2 + x3),
        3.0 * x2 - 2.0 * x3,
        he * (-x2 + x3),
    ], axis=1)
    dN = np.stack([
        (-6.0 * xi + 6.0 * x2) / he,
        1.0 - 4.0 * xi + 3.0 * x2,
        (6.0 * xi - 6.0 * x2) / he,
        -2.0 * xi + 3.0 * x2,
    ], axis=1)
    d2N = np.stack([
        (-6.0 + 12.0 * xi) / he**2,
        (-4.0 + 6.0 * xi) / he,
        (6.0 - 12.0 * xi) / he**2,
        (-2.0 + 6.0 * xi) / he,
    ], axis=1)
    return N, dN, d2N


def lagrange_shapes(xi: np.ndarray, he: float, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Lagrange 형상함수와 1계 물리 미분

    Args:
        xi: 참조 좌표 배열
        he: 요소 크기
        order: 1 (절점 0, 1) 또는 2 (절점 0, 1/2, 1)

    Returns:
        (N, dN/dx), 각각 shape (len(xi), order+1)
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if order == 1:
        N = np.stack([1.0 - xi, xi], axis=1)
        dN = np.stack([-np.ones_like(xi), np.ones_like(xi)], axis=1) / he
    elif order == 2:
        N = np.stack([
            2.0 * (xi - 0.5) * (xi - 1.0),
            -4.0 * xi * (xi - 1.0),
            2.0 * xi * (xi - 0.5),
        ], axis=1)
        dN = np.stack([
            4.0 * xi - 3.0,
            -8.0 * xi + 4.0,
            4.0 * xi - 1.0,
        ], axis=1) / he
    else:
        raise ValueError(f"지원하지 않는 요소 차수: {order}")
    return N, dN


def weighted_gram(rows: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """
    Σ_q w_q · outer(r_q, r_q)

    외적을 먼저 만든 뒤 스칼라를 곱하므로 결과는 비트 단위로 대칭이다.
    """
    out = np.zeros((rows.shape[1], rows.shape[1]))
    for row, weight in zip(rows, weights):
        out += np.outer(row, row) * weight
    return out
