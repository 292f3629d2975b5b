"""
Pydantic 스키마 패키지
"""
from app.schemas.report import (
    AssumptionReport,
    CompactnessReport,
    DecayReport,
    SpectrumSummary,
    StabilityMargins,
    SweepRow,
    ViolationItem,
)
from app.schemas.run_config import RunConfig, config_from_dict, load_config

__all__ = [
    "AssumptionReport",
    "CompactnessReport",
    "DecayReport",
    "SpectrumSummary",
    "StabilityMargins",
    "SweepRow",
    "ViolationItem",
    "RunConfig",
    "config_from_dict",
    "load_config",
]
