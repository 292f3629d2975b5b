"""
실험 서비스

설정 한 건 (RunConfig) 에 대한 조립, 스펙트럼, 초기 데이터, 적분, 비교를 묶는다.
명령 하나 또는 스윕 점 하나마다 새로 만든다.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from app.exceptions import AssumptionViolationError, ConfigError
from app.models.spectrum import CharacteristicParams, Spectrum, SOURCE_ROOTS
from app.models.state import BeamState, EnergyTrace
from app.models.system import DiscretizedSystem
from app.schemas.report import AssumptionReport, DecayReport
from app.schemas.run_config import RunConfig
from app.services.analysis_service import compare_decay_to_spectrum, system_adjoint_residual
from app.services.assembly_service import assemble, restrict
from app.services.dynamics_service import (
    generic_state,
    modal_state,
    mode_indices_upper,
    simulate,
    zero_state,
)
from app.services.model_service import validate_assumption
from app.services.spectral_service import (
    ModalBasis,
    discrete_modes,
    discrete_spectrum,
    find_rayleigh_roots,
    find_wave_roots,
)

logger = logging.getLogger(__name__)


@dataclass
class DecayRun:
    """시뮬레이션 한 번의 산출물"""
    system: DiscretizedSystem
    trace: EnergyTrace
    spectrum: Spectrum
    report: DecayReport


class ExperimentService:
    """설정 한 건의 실험 실행"""

    def __init__(
        self,
        config: RunConfig,
        coupled: Optional[bool] = None,
        seed: Optional[int] = None,
        force: bool = False,
    ):
        self.config = config
        self.coupled = config.coupled if coupled is None else coupled
        self.seed = config.analysis.seed if seed is None else seed
        self.force = force

    def check_admissible(self) -> AssumptionReport:
        """
        이득 가정 검사

        Raises:
            AssumptionViolationError: 위반이고 force 가 아닐 때
        """
        config = self.config
        report = validate_assumption(config.beam, config.layers, config.gains)
        if not report.admissible:
            if not self.force:
                raise AssumptionViolationError(f"이득 가정 위반: {report.describe()}")
            logger.warning(f"이득 가정 위반 무시 (force): {report.describe()}")
        return report

    def build_system(self, coupled: Optional[bool] = None) -> DiscretizedSystem:
        """설정으로부터 (부분) 시스템 조립"""
        coupled = self.coupled if coupled is None else coupled
        config = self.config
        if config.subsystem != "full" and coupled:
            raise ConfigError(f"subsystem={config.subsystem} 는 --decoupled 에서만 사용할 수 있습니다")
        full = assemble(config.beam, config.layers, config.gains, config.build_mesh(), coupled=coupled)
        return restrict(full, config.subsystem)

    def roots_spectrum(self) -> Spectrum:
        """비연성 (부분) 시스템의 특성식 스펙트럼"""
        if self.coupled:
            raise ConfigError("roots 방법은 --decoupled 에서만 사용할 수 있습니다")
        config = self.config
        sp = config.spectral
        parts = []
        if config.subsystem in ("full", "beam"):
            parts.append(find_rayleigh_roots(
                CharacteristicParams.rayleigh(config.beam, config.gains),
                sp.n_max,
                n0=sp.crossover_n0,
                tol=sp.newton_tol,
                max_iters=sp.newton_max_iters,
            ))
        layers = config.layers.odd_indices
        if config.subsystem.startswith("wave:"):
            layers = [int(config.subsystem.split(":")[1])]
        elif config.subsystem == "beam":
            layers = []
        for k in layers:
            p = CharacteristicParams.wave(config.beam, config.layers, config.gains, k)
            parts.append(find_wave_roots(p, sp.n_max))
        return Spectrum.merge(parts, SOURCE_ROOTS)

    def pencil_spectrum(self, system: Optional[DiscretizedSystem] = None) -> Spectrum:
        system = system or self.build_system()
        return discrete_spectrum(system, dense_limit=self.config.spectral.dense_limit)

    def initial_state(
        self,
        system: DiscretizedSystem,
        modes: Optional[ModalBasis] = None,
    ) -> Tuple[BeamState, Optional[ModalBasis]]:
        """설정의 initial 항목으로 초기 상태 생성 (사용한 고유쌍도 반환)"""
        initial = self.config.initial
        if initial.kind == "zero":
            return zero_state(system), modes
        if modes is None:
            modes = discrete_modes(system, dense_limit=self.config.spectral.dense_limit)
        if initial.kind == "mode":
            upper = mode_indices_upper(system, modes)
            if initial.mode_index >= len(upper):
                raise ConfigError(f"initial.mode_index={initial.mode_index} 가 해상 모드 수 {len(upper)} 이상입니다")
            return modal_state(system, modes, upper[initial.mode_index]), modes
        return generic_state(system, seed=self.seed, modes=modes), modes

    def run_decay(self) -> DecayRun:
        """시뮬레이션 + 가로좌표 비교"""
        config = self.config
        system = self.build_system()
        initial, modes = self.initial_state(system)
        trace = simulate(system, initial, config.time.T, dt=config.time.dt, sample_every=config.time.sample_every)
        spectrum = discrete_spectrum(system, dense_limit=config.spectral.dense_limit, with_residuals=False)
        report = compare_decay_to_spectrum(
            system,
            trace,
            spectrum,
            initial=None if config.initial.kind == "zero" else initial,
            window_fraction=config.analysis.fit_window_fraction,
            modes=modes,
        )
        return DecayRun(system=system, trace=trace, spectrum=spectrum, report=report)

    def adjoint_check(self) -> float:
        """비연성 시스템의 수반 관계 잔차 (analysis.trials 회, 실험 시드)"""
        system = self.build_system(coupled=False)
        return system_adjoint_residual(system, trials=self.config.analysis.trials, seed=self.seed)
