"""
보고서 스키마 (JSON 직렬화 대상)
"""
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field


# 감쇠 보고서 플래그
FLAG_CONSERVATIVE = "conservative-case"
FLAG_SINGLE_MODE = "single-mode"
FLAG_DEGENERATE = "degenerate-fit"
FLAG_TRUNCATED = "window-truncated"
FLAG_STABILITY = "stability-violation"

# 스윕 플래그
FLAG_ASSUMPTION = "assumption-violation"
FLAG_NUMERICAL = "numerical-failure"


class ViolationItem(BaseModel):
    """이득 가정 위반 항목"""
    name: str = Field(description="위반된 제약 이름 (예: gamma0, gamma_odd[3])")
    gain: float
    critical: float
    rel_gap: float


class AssumptionReport(BaseModel):
    """이득 가정 검사 결과, 빈 목록이면 허용"""
    violations: List[ViolationItem] = Field(default_factory=list)
    rtol: float

    @property
    def admissible(self) -> bool:
        return not self.violations

    def describe(self) -> str:
        if self.admissible:
            return "허용 (위반 없음)"
        return ", ".join(
            f"{v.name}={v.gain:.17g} ≈ {v.critical:.17g}" for v in self.violations
        )


class DecayReport(BaseModel):
    """
    감쇠율 보고서

    mu_fit 은 에너지 지수 (E ~ e^{2μt}), mu_spec 은 상태 지수 (스펙트럼 가로좌표)
    rel_mismatch = |mu_fit/2 - mu_spec| / |mu_spec|
    """
    mu_fit: Optional[float] = None
    mu_spec: Optional[float] = None
    rel_mismatch: Optional[float] = None
    fit_window: Optional[Tuple[float, float]] = None
    r_squared: Optional[float] = None
    flags: List[str] = Field(default_factory=list)
    dominant_mode_fraction: Optional[float] = None
    dominant_mode_re: Optional[float] = None


class SpectrumSummary(BaseModel):
    """스펙트럼 요약"""
    abscissa: Optional[float]
    n_eigenvalues: int
    certified_count: int


class SweepRow(BaseModel):
    """스윕 결과 한 행"""
    param_value: float
    abscissa: Optional[float] = None
    mu_fit: Optional[float] = None
    rel_mismatch: Optional[float] = None
    flags: List[str] = Field(default_factory=list)


class StabilityMargins(BaseModel):
    """강안정성 여유 (가로좌표, 최소 |λ|, 허수축까지 최소 거리)"""
    abscissa: float
    min_modulus: float
    axis_distance: float
    resolved_only: bool = False


class CompactnessReport(BaseModel):
    """
    메쉬 세분에 따른 연산자 노름

    연성 블록 노름은 유계, 비연성 생성자 노름은 h⁻¹ (제곱은 h⁻²) 로 증가
    """
    n_elems: List[int]
    coupling_norms: List[float]
    generator_norms: List[float]
    generator_norms_sq: List[float]

    @staticmethod
    def _ratios(values: List[float]) -> List[float]:
        return [b / a for a, b in zip(values[:-1], values[1:])]

    @property
    def coupling_ratios(self) -> List[float]:
        return self._ratios(self.coupling_norms)

    @property
    def generator_ratios(self) -> List[float]:
        return self._ratios(self.generator_norms)

    @property
    def generator_sq_ratios(self) -> List[float]:
        return self._ratios(self.generator_norms_sq)
