"""
스펙트럼 서비스 테스트

- 레일리 특성식 (θ₀, ξ₀, 행렬식, 근 찾기, 모드 형상)
- 파동 닫힌 형식과 인증
- 이산 펜슬 고유값과 특성식 근의 일치
"""
import numpy as np
import pytest
from scipy.integrate import trapezoid

from app.exceptions import (
    AssumptionViolationError,
    DegenerateFrequencyError,
    NotAnEigenvalueError,
    SizeLimitError,
)
from app.models import BeamParams, CharacteristicParams, Gains, LayerStack, Mesh, SOURCE_PENCIL, SOURCE_ROOTS
from app.services import (
    assemble,
    asymptotic_vertical_lines,
    discrete_modes,
    discrete_spectrum,
    find_rayleigh_roots,
    find_wave_roots,
    first_order_pencil,
    rayleigh_asymptotic_match,
    rayleigh_asymptotic_sigma,
    rayleigh_char_residual,
    rayleigh_mode_shape,
    rayleigh_strip_box,
    restrict,
    theta_xi,
    wave_char_residual,
    wave_theta,
)
from app.services.spectral_service import count_roots_in_box, rayleigh_frequencies
from numerics.contour import ComplexBox

LOG2_HALF = np.log(2.0) / 2.0


def _rayleigh(gamma0: float = 3.0, L: float = np.pi) -> CharacteristicParams:
    return CharacteristicParams.rayleigh(
        BeamParams(alpha=1.0, K=1.0, L=L), Gains(gamma0=gamma0, gamma_odd=[3.0, 3.0])
    )


def _wave(gamma: float = 3.0) -> CharacteristicParams:
    params = BeamParams(alpha=1.0, K=1.0, L=1.0)
    return CharacteristicParams.wave(params, LayerStack.uniform(1), Gains.uniform(1, gamma), 1)


@pytest.fixture(scope="module")
def rayleigh_roots():
    return find_rayleigh_roots(_rayleigh(), 8)


@pytest.fixture(scope="module")
def rayleigh_roots_40():
    return find_rayleigh_roots(_rayleigh(), 40)


# ===========================================
# θ₀, ξ₀
# ===========================================

def test_theta_xi_at_unit_frequency():
    theta, xi = theta_xi(1.0, _rayleigh())
    assert theta == pytest.approx((1 + np.sqrt(5)) / 2)
    assert xi == pytest.approx((np.sqrt(5) - 1) / 2)


def test_theta_xi_product_and_limit():
    p = _rayleigh()
    s = np.array([2.3 + 0.4j, 10.0 - 1.0j, 150.0 + 3.0j])
    theta, xi = theta_xi(s, p)
    np.testing.assert_allclose(theta * xi, s * s / p.K, rtol=1e-12)
    assert abs(xi[-1] - 1.0 / p.alpha) < 1e-3


def test_theta_xi_zero_frequency():
    with pytest.raises(DegenerateFrequencyError):
        theta_xi(0.0, _rayleigh())


# ===========================================
# 레일리 특성식
# ===========================================

def test_char_residual_vectorized_shape():
    s = np.array([[1.0 + 0.1j, 2.0], [3.0 - 0.2j, 4.5 + 1.0j]])
    values = rayleigh_char_residual(s, _rayleigh())
    assert values.shape == s.shape
    assert values[0, 1] == pytest.approx(rayleigh_char_residual(2.0, _rayleigh()))


def test_char_residual_reflection_symmetry():
    """f(−s̄) = conj f(s)"""
    p = _rayleigh()
    s = 2.3 + 0.4j
    lhs = rayleigh_char_residual(-np.conj(s), p)
    rhs = np.conj(rayleigh_char_residual(s, p))
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_char_residual_real_without_feedback():
    value = rayleigh_char_residual(2.7, _rayleigh(gamma0=0.0))
    assert abs(value.imag) <= 1e-12 * max(1.0, abs(value))


def test_asymptotic_sigma_branches():
    """γ₀√(K/α) > 1 이면 nπ/L, < 1 이면 (n+½)π/L"""
    strong = rayleigh_asymptotic_sigma(4, _rayleigh(gamma0=3.0))
    weak = rayleigh_asymptotic_sigma(4, _rayleigh(gamma0=0.5))
    assert strong == pytest.approx(4.0 + 1j * np.log(2.0) / (2 * np.pi))
    assert weak == pytest.approx(4.5 + 1j * np.log(3.0) / (2 * np.pi))


def test_asymptotic_sigma_critical_gain():
    with pytest.raises(AssumptionViolationError):
        rayleigh_asymptotic_sigma(1, _rayleigh(gamma0=1.0))


def test_rayleigh_roots_residuals_and_labels(rayleigh_roots):
    spectrum = rayleigh_roots
    assert spectrum.source == SOURCE_ROOTS
    assert len(spectrum) == 16
    assert spectrum.certified_count == 16
    assert float(spectrum.residuals.max()) < 1e-10
    assert sorted(rayleigh_frequencies(spectrum)) == list(range(1, 9))
    assert spectrum.conjugate_defect() < 1e-12


def test_rayleigh_roots_are_damped(rayleigh_roots):
    assert rayleigh_roots.abscissa < 0
    assert np.all(rayleigh_roots.eigenvalues.real < 0)


def test_rayleigh_roots_approach_asymptotics(rayleigh_roots):
    p = _rayleigh()
    roots = rayleigh_frequencies(rayleigh_roots)
    m_low, gap_low = rayleigh_asymptotic_match(roots[2], p)
    m_high, gap_high = rayleigh_asymptotic_match(roots[8], p)
    assert m_high > m_low
    assert gap_high < gap_low


def test_rayleigh_labels_follow_real_part_without_gaps(rayleigh_roots_40):
    roots = rayleigh_frequencies(rayleigh_roots_40)
    assert sorted(roots) == list(range(1, 41))
    re = np.array([roots[n].real for n in range(1, 41)])
    assert np.all(np.diff(re) > 0)
    matched = [rayleigh_asymptotic_match(roots[n], _rayleigh())[0] for n in range(10, 41)]
    assert np.all(np.diff(matched) == 1)


def test_rayleigh_roots_stable_in_n_max(rayleigh_roots, rayleigh_roots_40):
    small = rayleigh_frequencies(rayleigh_roots)
    large = rayleigh_frequencies(rayleigh_roots_40)
    for n in range(1, 9):
        assert abs(small[n] - large[n]) <= 1e-8 * abs(large[n])


def test_certified_box_counts_exactly_n_max(rayleigh_roots_40):
    p = _rayleigh()
    roots = rayleigh_frequencies(rayleigh_roots_40)
    box = rayleigh_strip_box(p, 39, 0.5 * (roots[39].real + roots[40].real))
    assert count_roots_in_box(lambda z: rayleigh_char_residual(z, p, normalized=True), box) == 39


def test_root_count_is_one_per_root_and_additive(rayleigh_roots):
    p = _rayleigh()
    roots = rayleigh_frequencies(rayleigh_roots)

    def f(z):
        return rayleigh_char_residual(z, p, normalized=True)

    def around(s, r=0.2):
        return ComplexBox(s.real - r, s.real + r, s.imag - r, s.imag + r)

    a, b = roots[4], roots[5]
    assert count_roots_in_box(f, around(a)) == 1
    assert count_roots_in_box(f, around(b)) == 1
    union = ComplexBox(a.real - 0.2, b.real + 0.2, min(a.imag, b.imag) - 0.2, max(a.imag, b.imag) + 0.2)
    assert count_roots_in_box(f, union) == 2


def test_rayleigh_real_parts_cluster_on_vertical_line(rayleigh_roots_40):
    p = _rayleigh()
    lam = {n: 1j * s for n, s in rayleigh_frequencies(rayleigh_roots_40).items()}
    line = -p.speed * rayleigh_asymptotic_sigma(0, p).imag
    early = np.mean([abs(lam[n].real - line) for n in range(8, 13)])
    late = np.mean([abs(lam[n].real - line) for n in range(36, 41)])
    assert late < 0.5 * early
    spread = [max(abs(lam[k].real - lam[40].real) for k in range(n, 41)) for n in (10, 20, 30)]
    assert spread[0] >= spread[1] >= spread[2]


def test_conservative_roots_on_axis():
    spectrum = find_rayleigh_roots(_rayleigh(gamma0=0.0), 6)
    lam = spectrum.eigenvalues
    assert np.all(np.abs(lam.real) <= 1e-8 * np.abs(lam))


def test_pencil_matches_rayleigh_roots(rayleigh_roots):
    """보 블록 이산 고유값은 특성식 근에 수렴"""
    params = BeamParams(alpha=1.0, K=1.0, L=np.pi)
    gains = Gains(gamma0=3.0, gamma_odd=[3.0, 3.0])
    full = assemble(params, LayerStack.uniform(1, G=0.0), gains, Mesh(n_elems=32, L=np.pi), coupled=False)
    pencil = discrete_spectrum(restrict(full, "beam"))
    roots = rayleigh_frequencies(rayleigh_roots)
    for n in range(1, 5):
        lam = 1j * roots[n]
        nearest = pencil.eigenvalues[np.argmin(np.abs(pencil.eigenvalues - lam))]
        assert abs(nearest - lam) / abs(lam) < 1e-3


def test_beam_block_gap_shrinks_with_refinement(rayleigh_roots):
    params = BeamParams(alpha=1.0, K=1.0, L=np.pi)
    gains = Gains(gamma0=3.0, gamma_odd=[3.0, 3.0])
    roots = rayleigh_frequencies(rayleigh_roots)
    gaps = []
    for n_elems in (16, 32, 64):
        full = assemble(params, LayerStack.uniform(1, G=0.0), gains, Mesh(n_elems=n_elems, L=np.pi), coupled=False)
        lam = discrete_spectrum(restrict(full, "beam"), with_residuals=False).eigenvalues
        gaps.append([float(np.min(np.abs(lam - 1j * roots[n]))) for n in (1, 2, 3)])
    gaps = np.array(gaps)
    assert np.all(np.diff(gaps, axis=0) < 0)


def test_mode_shape_satisfies_boundary_conditions(rayleigh_roots):
    p = _rayleigh()
    s = rayleigh_frequencies(rayleigh_roots)[3]
    x = np.linspace(0.0, p.L, 401)
    shape = rayleigh_mode_shape(s, p, x)
    assert abs(shape.u[0]) < 1e-8
    assert abs(shape.du[0]) < 1e-8
    assert abs(shape.u[-1]) < 1e-8
    assert abs(shape.d2u[-1] + 1j * p.gamma * s * shape.du[-1]) < 1e-7
    d2u, sdu = shape.profile
    assert trapezoid(np.abs(d2u) ** 2 + np.abs(sdu) ** 2, x) == pytest.approx(1.0)


def _mode_deviation(s: complex, p: CharacteristicParams) -> float:
    """정규화된 |u''| 와 점근 형상 |cos σx|/c 의 최대 차"""
    m, _ = rayleigh_asymptotic_match(s, p)
    sigma = rayleigh_asymptotic_sigma(m, p)
    x = np.linspace(0.0, p.L, 2001)
    shape = rayleigh_mode_shape(s, p, x)
    cos, sin = np.abs(np.cos(sigma * x)), np.abs(np.sin(sigma * x))
    c = np.sqrt(trapezoid(cos**2 + p.speed**2 * sin**2, x))
    return float(np.max(np.abs(np.abs(shape.d2u) - cos / c)))


def test_mode_shape_approaches_asymptotic_profile(rayleigh_roots_40):
    p = _rayleigh()
    by_match = {rayleigh_asymptotic_match(s, p)[0]: s for s in rayleigh_frequencies(rayleigh_roots_40).values()}
    assert _mode_deviation(by_match[30], p) < _mode_deviation(by_match[10], p)


def test_mode_shape_rejects_non_root():
    with pytest.raises(NotAnEigenvalueError):
        rayleigh_mode_shape(1.234 + 0.5j, _rayleigh(), np.linspace(0.0, np.pi, 11))


# ===========================================
# 파동 분기
# ===========================================

def test_wave_closed_form():
    theta, lam = wave_theta(1, 3, _wave(3.0))
    assert lam == pytest.approx(-LOG2_HALF + 3j * np.pi)
    assert abs(wave_char_residual(theta, _wave(3.0))) < 1e-12

    _, lam_weak = wave_theta(1, 0, _wave(0.5))
    assert lam_weak == pytest.approx(-np.log(3.0) / 2 + 0.5j * np.pi)


def test_wave_roots_certified():
    strong = find_wave_roots(_wave(3.0), 5)
    weak = find_wave_roots(_wave(0.5), 5)
    assert len(strong) == 11
    assert len(weak) == 12
    assert strong.certified_count == len(strong)
    assert strong.abscissa == pytest.approx(-LOG2_HALF)
    assert weak.conjugate_defect() < 1e-12
    assert set(strong.branches) == {"wave1"}


def test_wave_critical_gain():
    with pytest.raises(AssumptionViolationError):
        wave_theta(1, 0, _wave(1.0))


def test_vertical_lines(unit_params, unit_stack, damped_gains):
    lines = asymptotic_vertical_lines(unit_params, unit_stack, damped_gains)
    assert set(lines) == {"rayleigh", "wave1", "wave3"}
    for value in lines.values():
        assert value == pytest.approx(-LOG2_HALF)


def test_pencil_matches_wave_closed_form(unit_params, damped_gains):
    full = assemble(unit_params, LayerStack.uniform(1, G=0.0), damped_gains, Mesh(n_elems=32, L=1.0), coupled=False)
    pencil = discrete_spectrum(restrict(full, "wave:1"))
    for n in range(5):
        _, exact = wave_theta(1, n, _wave(3.0))
        nearest = pencil.eigenvalues[np.argmin(np.abs(pencil.eigenvalues - exact))]
        assert abs(nearest - exact) / abs(exact) < 1e-3


# ===========================================
# 이산 펜슬
# ===========================================

def test_discrete_spectrum_structure(coupled_system):
    spectrum = discrete_spectrum(coupled_system)
    assert spectrum.source == SOURCE_PENCIL
    assert len(spectrum) == coupled_system.state_size
    assert spectrum.conjugate_defect() < 1e-8
    assert float(spectrum.residuals.max()) < 1e-10
    assert spectrum.abscissa < 0
    assert set(spectrum.branches) == {"pencil"}


def test_discrete_spectrum_sorted(coupled_system):
    lam = discrete_spectrum(coupled_system, with_residuals=False).eigenvalues
    keys = list(zip(lam.imag, lam.real))
    assert keys == sorted(keys)


def test_conservative_spectrum_exactly_imaginary(conservative_system):
    spectrum = discrete_spectrum(conservative_system)
    assert np.all(spectrum.eigenvalues.real == 0)
    assert float(spectrum.residuals.max()) < 1e-10


def test_subsystem_branch_label(decoupled_system):
    spectrum = discrete_spectrum(restrict(decoupled_system, "wave:1"))
    assert set(spectrum.branches) == {"pencil:wave:1"}


def test_dense_limit(coupled_system):
    with pytest.raises(SizeLimitError) as exc:
        discrete_spectrum(coupled_system, dense_limit=10)
    assert exc.value.exit_code == 3


def test_blockwise_modes_are_eigenpairs(decoupled_system):
    modes = discrete_modes(decoupled_system)
    assert len(modes) == decoupled_system.state_size
    E, A = first_order_pencil(decoupled_system)
    W = modes.vectors
    lam = modes.eigenvalues
    resid = np.linalg.norm(A @ W - (E @ W) * lam[None, :], axis=0)
    scale = (np.linalg.norm(A, 1) + np.abs(lam) * np.linalg.norm(E, 1)) * np.linalg.norm(W, axis=0)
    assert float((resid / scale).max()) < 1e-10
    assert np.all(np.diff(np.abs(modes.eigenvalues)) >= -1e-12 * np.abs(modes.eigenvalues[1:]))


def test_blockwise_and_full_eigenvalues_agree(decoupled_system):
    blockwise = discrete_modes(decoupled_system).eigenvalues
    full = discrete_spectrum(decoupled_system, with_residuals=False).eigenvalues
    assert blockwise.size == full.size
    for value in blockwise:
        assert np.min(np.abs(full - value)) <= 1e-8 * max(1.0, abs(value))
