"""
실행 설정 스키마

JSON 한 문서로 실험 전체를 기술한다. '_' 로 시작하는 키는 주석으로 보고 제거한다.
생략된 선택 항목은 Settings 기본값으로 채운다.
"""
import json
import re
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator

from app.config import settings
from app.exceptions import ConfigError
from app.models.layers import BeamParams, Gains, LayerStack
from app.models.system import Mesh

SUBSYSTEM_PATTERN = re.compile(r"^(full|beam|wave:\d+)$")


class MeshSection(BaseModel):
    """메쉬 설정"""
    model_config = ConfigDict(extra="forbid")

    n_elems: int = Field(default=64, ge=4)
    element_order: Literal[1, 2] = 2


class SpectralSection(BaseModel):
    """스펙트럼 설정"""
    model_config = ConfigDict(extra="forbid")

    n_max: int = Field(default=40, ge=1)
    newton_tol: float = Field(default_factory=lambda: settings.newton_tol, gt=0)
    newton_max_iters: int = Field(default_factory=lambda: settings.newton_max_iters, ge=1)
    crossover_n0: int = Field(default_factory=lambda: settings.crossover_n0, ge=1)
    dense_limit: int = Field(default_factory=lambda: settings.dense_limit, ge=1)


class TimeSection(BaseModel):
    """시간 적분 설정 (dt 생략시 자동)"""
    model_config = ConfigDict(extra="forbid")

    dt: Optional[float] = Field(default=None, gt=0)
    T: float = Field(default=40.0, gt=0)
    sample_every: int = Field(default=10, ge=1)


class AnalysisSection(BaseModel):
    """분석 설정"""
    model_config = ConfigDict(extra="forbid")

    fit_window_fraction: float = Field(default=2.0 / 3.0, gt=0, le=1)
    trials: int = Field(default=100, ge=1)
    seed: int = Field(default_factory=lambda: settings.default_seed)


class InitialSection(BaseModel):
    """초기 데이터 선택"""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["generic", "zero", "mode"] = "generic"
    mode_index: int = Field(default=0, ge=0)


class RunConfig(BaseModel):
    """실행 설정"""
    model_config = ConfigDict(extra="forbid")

    beam: BeamParams
    layers: LayerStack
    gains: Gains
    mesh: MeshSection = Field(default_factory=MeshSection)
    spectral: SpectralSection = Field(default_factory=SpectralSection)
    time: TimeSection = Field(default_factory=TimeSection)
    analysis: AnalysisSection = Field(default_factory=AnalysisSection)
    initial: InitialSection = Field(default_factory=InitialSection)
    subsystem: str = "full"
    coupled: bool = True
    output_dir: str = Field(default_factory=lambda: settings.output_dir)

    @field_validator("subsystem")
    @classmethod
    def _check_subsystem(cls, value: str) -> str:
        if not SUBSYSTEM_PATTERN.match(value):
            raise ValueError(f"subsystem 은 full, beam, wave:<k> 중 하나여야 합니다: {value}")
        return value

    @field_validator("gains")
    @classmethod
    def _check_gain_count(cls, value: Gains, info: ValidationInfo) -> Gains:
        layers = info.data.get("layers")
        if layers is not None and len(value.gamma_odd) != layers.m + 1:
            raise ValueError(
                f"gamma_odd 길이 {len(value.gamma_odd)} 가 홀수층 수 {layers.m + 1} 와 다릅니다"
            )
        return value

    def build_mesh(self) -> Mesh:
        return Mesh(n_elems=self.mesh.n_elems, L=self.beam.L, element_order=self.mesh.element_order)

    def echo(self) -> Dict[str, Any]:
        """설정 요약 (출력용)"""
        return self.model_dump(mode="json")


# ===========================================
# 로더
# ===========================================

def strip_comments(data: Any) -> Any:
    """'_' 로 시작하는 키를 재귀적으로 제거"""
    if isinstance(data, dict):
        return {k: strip_comments(v) for k, v in data.items() if not str(k).startswith("_")}
    if isinstance(data, list):
        return [strip_comments(v) for v in data]
    return data


def _format_validation(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"])
        lines.append(f"{path}: {item['msg']}")
    return "; ".join(lines)


def config_from_dict(data: Dict[str, Any]) -> RunConfig:
    """dict → RunConfig (검증 실패시 ConfigError)"""
    try:
        return RunConfig.model_validate(strip_comments(data))
    except ValidationError as e:
        raise ConfigError(f"설정 검증 실패: {_format_validation(e)}") from e


def load_config(path: Union[str, Path]) -> RunConfig:
    """
    JSON 설정 파일 로드

    Args:
        path: 설정 파일 경로

    Returns:
        RunConfig

    Raises:
        ConfigError: 파일 없음, JSON 문법 오류 (줄/열 포함), 검증 실패 (필드 경로 포함)
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"설정 파일을 읽을 수 없습니다: {path} ({e})") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: JSON 문법 오류 ({e.msg})") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: 최상위 값은 객체여야 합니다")
    return config_from_dict(data)


# ===========================================
# 파라미터 경로 (스윕)
# ===========================================

def _walk(node: Any, parts: List[str], path: str) -> Any:
    for part in parts:
        if isinstance(node, dict) and part in node:
            node = node[part]
        elif isinstance(node, list) and part.isdigit() and int(part) < len(node):
            node = node[int(part)]
        else:
            raise ConfigError(f"알 수 없는 파라미터 경로: {path}")
    return node


def check_param_path(config: RunConfig, path: str) -> None:
    """경로가 숫자 값을 가리키는지 확인 (예: gains.gamma0, layers.odd_layers.0.rho)"""
    value = _walk(config.model_dump(mode="python"), path.split("."), path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"숫자 파라미터가 아닙니다: {path}")


def with_param(config: RunConfig, path: str, value: float) -> RunConfig:
    """
    경로의 값을 바꾼 새 설정

    Raises:
        ConfigError: 경로 없음 또는 변경 후 검증 실패
    """
    check_param_path(config, path)
    data = config.model_dump(mode="python")
    parts = path.split(".")
    parent = _walk(data, parts[:-1], path)
    key = parts[-1]
    if isinstance(parent, list):
        parent[int(key)] = value
    else:
        parent[key] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{path}={value}: {_format_validation(e)}") from e


def parse_values(raw: str) -> List[float]:
    """쉼표 구분 숫자 목록"""
    items = [item.strip() for item in raw.split(",") if item.strip()]
    if not items:
        raise ConfigError("스윕 값 목록이 비어 있습니다")
    try:
        return [float(item) for item in items]
    except ValueError as e:
        raise ConfigError(f"숫자가 아닌 스윕 값: {raw}") from e
