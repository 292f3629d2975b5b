"""
분석 서비스 테스트 (감쇠율 적합, 가로좌표 비교, 구조 검사)
"""
import dataclasses

import numpy as np
import pytest

from app.exceptions import DegenerateFitError, InvalidParameterError
from app.models import BeamParams, EnergyTrace, EvenLayer, Gains, LayerStack, Mesh, OddLayer
from app.schemas.report import (
    FLAG_CONSERVATIVE,
    FLAG_DEGENERATE,
    FLAG_SINGLE_MODE,
    FLAG_TRUNCATED,
)
from app.services import (
    adjoint_residual,
    assemble,
    compactness_proxy,
    compare_decay_to_spectrum,
    discrete_modes,
    discrete_spectrum,
    fit_decay_rate,
    generic_state,
    modal_energy_content,
    modal_state,
    restrict,
    riesz_gram_condition,
    simulate,
    strong_stability_margin,
    system_adjoint_residual,
    zero_eigen_margin,
)
from app.services.dynamics_service import mode_indices_upper, zero_state


def _trace(times, energies):
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    zeros = np.zeros_like(times)
    return EnergyTrace(
        times=times,
        energies=energies,
        dissipation=zeros,
        step_identity_residuals=zeros,
        dt=float(times[1] - times[0]),
        steps=times.size - 1,
    )


# ===========================================
# 감쇠율 적합
# ===========================================

def test_fit_pure_exponential():
    t = np.linspace(0.0, 40.0, 401)
    report = fit_decay_rate(_trace(t, np.exp(-0.2 * t)))
    assert report.mu_fit == pytest.approx(-0.2, abs=1e-10)
    assert report.r_squared == pytest.approx(1.0, abs=1e-12)
    assert report.fit_window[0] == pytest.approx(40.0 / 3.0, abs=0.1)
    assert report.flags == []


def test_fit_window_isolates_slow_mode():
    t = np.linspace(0.0, 40.0, 401)
    e = np.exp(-0.2 * t) + 5.0 * np.exp(-2.0 * t)
    report = fit_decay_rate(_trace(t, e), window=(20.0, 40.0))
    assert report.mu_fit == pytest.approx(-0.2, abs=1e-8)
    assert report.fit_window == pytest.approx((20.0, 40.0))


def test_fit_constant_energy():
    t = np.linspace(0.0, 10.0, 101)
    report = fit_decay_rate(_trace(t, np.full(t.size, 2.5)))
    assert report.mu_fit == pytest.approx(0.0, abs=1e-10)
    assert report.r_squared == 1.0


def test_fit_too_few_samples():
    t = np.linspace(0.0, 1.0, 9)
    with pytest.raises(DegenerateFitError):
        fit_decay_rate(_trace(t, np.exp(-t)), window=(0.0, 1.0))


def test_fit_truncates_at_numerical_zero():
    t = np.linspace(0.0, 40.0, 401)
    e = np.exp(-0.5 * t)
    e[300:] = 0.0
    report = fit_decay_rate(_trace(t, e))
    assert FLAG_TRUNCATED in report.flags
    assert report.fit_window[1] < 30.0
    assert report.mu_fit == pytest.approx(-0.5, abs=1e-8)


def test_fit_rejects_bad_window():
    t = np.linspace(0.0, 1.0, 20)
    with pytest.raises(InvalidParameterError):
        fit_decay_rate(_trace(t, np.exp(-t)), window=(1.0, 0.5))
    with pytest.raises(InvalidParameterError):
        fit_decay_rate(_trace(t, np.exp(-t)), window_fraction=1.5)


# ===========================================
# 가로좌표 비교
# ===========================================

@pytest.fixture(scope="module")
def wave_block():
    params = BeamParams(alpha=1.0, K=1.0, L=1.0)
    full = assemble(params, LayerStack.uniform(1, G=0.0), Gains.uniform(1, 3.0), Mesh(n_elems=16, L=1.0), coupled=False)
    return restrict(full, "wave:1")


def test_wave_decay_matches_abscissa(wave_block):
    """모든 파동 모드의 실수부가 같으므로 적합 지수의 절반이 가로좌표와 일치"""
    modes = discrete_modes(wave_block)
    initial = generic_state(wave_block, seed=3, modes=modes)
    trace = simulate(wave_block, initial, T=40.0, sample_every=5)
    spectrum = discrete_spectrum(wave_block, with_residuals=False)
    report = compare_decay_to_spectrum(wave_block, trace, spectrum, initial=initial, modes=modes)
    assert report.mu_spec < 0
    assert report.rel_mismatch < 0.05
    assert report.mu_fit == pytest.approx(-np.log(2.0), rel=0.05)
    assert 0 < report.dominant_mode_fraction < 0.9
    assert FLAG_SINGLE_MODE not in report.flags


def test_single_mode_flag(wave_block):
    modes = discrete_modes(wave_block)
    index = mode_indices_upper(wave_block, modes)[2]
    initial = modal_state(wave_block, modes, index)
    share, lam = modal_energy_content(wave_block, initial, modes)
    assert share == pytest.approx(1.0, abs=1e-6)
    assert lam == pytest.approx(modes.eigenvalues[index])

    trace = simulate(wave_block, initial, T=10.0, dt=0.01, sample_every=10)
    report = compare_decay_to_spectrum(
        wave_block, trace, discrete_spectrum(wave_block), initial=initial, modes=modes
    )
    assert FLAG_SINGLE_MODE in report.flags
    assert report.dominant_mode_re == pytest.approx(modes.eigenvalues[index].real)


def test_conservative_flag(conservative_system):
    initial = generic_state(conservative_system, seed=1)
    trace = simulate(conservative_system, initial, T=2.0, dt=0.01, sample_every=10)
    report = compare_decay_to_spectrum(conservative_system, trace, discrete_spectrum(conservative_system))
    assert FLAG_CONSERVATIVE in report.flags
    assert report.rel_mismatch is None


def test_zero_initial_degenerate(coupled_system):
    trace = simulate(coupled_system, zero_state(coupled_system), T=1.0, dt=0.01)
    report = compare_decay_to_spectrum(coupled_system, trace, discrete_spectrum(coupled_system))
    assert FLAG_DEGENERATE in report.flags
    assert report.mu_fit is None
    assert report.rel_mismatch is None


# ===========================================
# 구조 검사
# ===========================================

@pytest.mark.parametrize("gamma", [0.0, 3.0])
def test_adjoint_residual(unit_params, unit_stack, gamma):
    residual = adjoint_residual(unit_params, unit_stack, Mesh(n_elems=16, L=1.0), Gains.uniform(1, gamma), seed=11)
    assert residual < 1e-10


def test_adjoint_residual_seeded(unit_params, unit_stack, damped_gains, small_mesh):
    a = adjoint_residual(unit_params, unit_stack, small_mesh, damped_gains, trials=5, seed=2)
    b = adjoint_residual(unit_params, unit_stack, small_mesh, damped_gains, trials=5, seed=2)
    assert a == b
    with pytest.raises(InvalidParameterError):
        adjoint_residual(unit_params, unit_stack, small_mesh, damped_gains, trials=0)


def test_adjoint_residual_detects_nonsymmetric_damping(decoupled_system):
    assert system_adjoint_residual(decoupled_system, trials=20, seed=3) < 1e-10
    D = decoupled_system.D.copy()
    i = decoupled_system.dof_map.boundary_dofs[0]
    D[i, 0] += 1.0
    broken = dataclasses.replace(decoupled_system, D=D)
    assert system_adjoint_residual(broken, trials=20, seed=3) > 1e-8


def test_adjoint_residual_detects_generator_sign_bug(monkeypatch, decoupled_system):
    import app.services.analysis_service as analysis

    correct = analysis.generator_matrix
    monkeypatch.setattr(analysis, "generator_matrix", lambda sys, damping_scale=1.0: correct(sys, 1.0))
    assert system_adjoint_residual(decoupled_system, trials=20, seed=3) > 1e-8


def test_zero_eigen_margin_positive(coupled_system, decoupled_system):
    assert zero_eigen_margin(coupled_system) > 0
    assert zero_eigen_margin(decoupled_system) > 0


def test_zero_eigen_margin_scales_with_moduli(unit_params, damped_gains, small_mesh):
    """K, E, G 를 c 배 하면 S 도 c 배"""
    c = 3.0
    stack = LayerStack.uniform(1)
    scaled_params = BeamParams(alpha=1.0, K=c, L=1.0)
    scaled_stack = LayerStack(
        m=1,
        odd_layers=[OddLayer(rho=1.0, h=1.0, E=c)] * 2,
        even_layers=[EvenLayer(h=1.0, G=c)],
    )
    scaled_gains = Gains(gamma0=3.0 / np.sqrt(c), gamma_odd=[3.0 / np.sqrt(c)] * 2)
    base = zero_eigen_margin(assemble(unit_params, stack, damped_gains, small_mesh))
    scaled = zero_eigen_margin(assemble(scaled_params, scaled_stack, scaled_gains, small_mesh))
    assert scaled == pytest.approx(c * base, rel=1e-8)


def test_strong_stability_margin(coupled_system, conservative_system):
    margins = strong_stability_margin(coupled_system, discrete_spectrum(coupled_system))
    assert margins.abscissa < 0
    assert margins.axis_distance > 0
    assert margins.min_modulus > 0
    assert not margins.resolved_only

    flat = strong_stability_margin(conservative_system, discrete_spectrum(conservative_system))
    assert flat.axis_distance == 0.0


def test_strong_stability_margin_resolved(coupled_system):
    spectrum = discrete_spectrum(coupled_system)
    margins = strong_stability_margin(coupled_system, spectrum, cutoff=coupled_system.resolution_cutoff())
    assert margins.resolved_only
    assert margins.abscissa <= strong_stability_margin(coupled_system, spectrum).abscissa


def test_strong_stability_margin_stable_under_refinement(unit_params, unit_stack, damped_gains):
    coarse = assemble(unit_params, unit_stack, damped_gains, Mesh(n_elems=32, L=1.0))
    fine = assemble(unit_params, unit_stack, damped_gains, Mesh(n_elems=64, L=1.0))
    cutoff = coarse.resolution_cutoff()
    a = strong_stability_margin(coarse, discrete_spectrum(coarse, with_residuals=False), cutoff=cutoff)
    b = strong_stability_margin(fine, discrete_spectrum(fine, with_residuals=False), cutoff=cutoff)
    for name in ("abscissa", "min_modulus", "axis_distance"):
        x, y = getattr(a, name), getattr(b, name)
        assert abs(x - y) <= 0.2 * abs(y), name


def test_riesz_gram_condition(decoupled_system, coupled_system):
    cond = riesz_gram_condition(decoupled_system, count=20)
    assert np.isfinite(cond)
    assert cond >= 1.0
    with pytest.raises(InvalidParameterError):
        riesz_gram_condition(coupled_system)
    with pytest.raises(InvalidParameterError):
        riesz_gram_condition(decoupled_system, count=10_000)


def test_compactness_proxy(unit_params, unit_stack, damped_gains):
    report = compactness_proxy(unit_params, unit_stack, damped_gains, meshes=(8, 16, 32))
    assert report.n_elems == [8, 16, 32]
    assert max(report.coupling_norms) / min(report.coupling_norms) < 2.0
    assert all(r > 1.5 for r in report.generator_ratios)
    assert report.generator_sq_ratios == pytest.approx([r * r for r in report.generator_ratios])


def test_compactness_proxy_without_shear(unit_params, damped_gains):
    report = compactness_proxy(unit_params, LayerStack.uniform(1, G=0.0), damped_gains, meshes=(8, 16))
    assert report.coupling_norms == [0.0, 0.0]
