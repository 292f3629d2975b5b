"""
서비스 패키지

모델 → 조립 → 스펙트럼 → 동역학 → 분석 순서로 의존하고, 실험 서비스가 설정 한 건 단위로 이들을 묶는다.
"""
from app.services.model_service import (
    build_coupling_matrices,
    compute_N,
    coupling_data,
    require_admissible,
    validate_assumption,
)
from app.services.assembly_service import (
    assemble,
    coupling_block,
    embed_coupling_block,
    first_order_pencil,
    generator_matrix,
    is_decoupled,
    restrict,
)
from app.services.spectral_service import (
    asymptotic_vertical_lines,
    discrete_modes,
    discrete_spectrum,
    find_rayleigh_roots,
    find_wave_roots,
    rayleigh_asymptotic_match,
    rayleigh_asymptotic_sigma,
    rayleigh_char_residual,
    rayleigh_mode_shape,
    rayleigh_strip_box,
    roots_spectrum,
    theta_xi,
    wave_char_residual,
    wave_theta,
)
from app.services.dynamics_service import (
    auto_dt,
    dissipation_rate,
    energy,
    generic_state,
    interpolate_state,
    modal_state,
    simulate,
    step_midpoint,
)
from app.services.analysis_service import (
    adjoint_residual,
    compactness_proxy,
    compare_decay_to_spectrum,
    fit_decay_rate,
    modal_energy_content,
    riesz_gram_condition,
    strong_stability_margin,
    system_adjoint_residual,
    zero_eigen_margin,
)
from app.services.experiment_service import DecayRun, ExperimentService

__all__ = [
    "build_coupling_matrices",
    "compute_N",
    "coupling_data",
    "require_admissible",
    "validate_assumption",
    "assemble",
    "coupling_block",
    "embed_coupling_block",
    "first_order_pencil",
    "generator_matrix",
    "is_decoupled",
    "restrict",
    "asymptotic_vertical_lines",
    "discrete_modes",
    "discrete_spectrum",
    "find_rayleigh_roots",
    "find_wave_roots",
    "rayleigh_asymptotic_match",
    "rayleigh_asymptotic_sigma",
    "rayleigh_char_residual",
    "rayleigh_mode_shape",
    "rayleigh_strip_box",
    "roots_spectrum",
    "theta_xi",
    "wave_char_residual",
    "wave_theta",
    "auto_dt",
    "dissipation_rate",
    "energy",
    "generic_state",
    "interpolate_state",
    "modal_state",
    "simulate",
    "step_midpoint",
    "adjoint_residual",
    "compactness_proxy",
    "compare_decay_to_spectrum",
    "fit_decay_rate",
    "modal_energy_content",
    "riesz_gram_condition",
    "strong_stability_margin",
    "system_adjoint_residual",
    "zero_eigen_margin",
    "DecayRun",
    "ExperimentService",
]
