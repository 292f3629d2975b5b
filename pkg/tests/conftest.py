"""
공통 픽스처

모든 물리량이 1 인 단위 문제와 작은 메쉬를 사용한다.
"""
import json

import pytest

from app.logging_config import setup_logging
from app.models import BeamParams, Gains, LayerStack, Mesh
from app.services import assemble
from app.services.dynamics_service import clear_factor_cache


@pytest.fixture(scope="session", autouse=True)
def _quiet_logging():
    # 파일 로그를 남기지 않도록 먼저 설정해 둔다
    setup_logging(log_file="")


@pytest.fixture(autouse=True)
def _fresh_cache():
    yield
    clear_factor_cache()


@pytest.fixture
def unit_params():
    return BeamParams(alpha=1.0, K=1.0, L=1.0)


@pytest.fixture
def unit_stack():
    return LayerStack.uniform(1)


@pytest.fixture
def damped_gains():
    return Gains.uniform(1, 3.0)


@pytest.fixture
def zero_gains():
    return Gains.uniform(1, 0.0)


@pytest.fixture
def small_mesh():
    return Mesh(n_elems=8, L=1.0)


@pytest.fixture
def coupled_system(unit_params, unit_stack, damped_gains, small_mesh):
    return assemble(unit_params, unit_stack, damped_gains, small_mesh, coupled=True)


@pytest.fixture
def decoupled_system(unit_params, unit_stack, damped_gains, small_mesh):
    return assemble(unit_params, unit_stack, damped_gains, small_mesh, coupled=False)


@pytest.fixture
def conservative_system(unit_params, unit_stack, zero_gains, small_mesh):
    return assemble(unit_params, unit_stack, zero_gains, small_mesh, coupled=True)


@pytest.fixture
def config_dict():
    """작은 메쉬의 연성 설정 (CLI 테스트용)"""
    return {
        "_comment": "테스트 설정",
        "beam": {"alpha": 1.0, "K": 1.0, "L": 1.0},
        "layers": {
            "m": 1,
            "odd_layers": [{"rho": 1.0, "h": 1.0, "E": 1.0}, {"rho": 1.0, "h": 1.0, "E": 1.0}],
            "even_layers": [{"h": 1.0, "G": 1.0}],
        },
        "gains": {"gamma0": 3.0, "gamma_odd": [3.0, 3.0]},
        "mesh": {"n_elems": 4, "element_order": 2},
        "spectral": {"n_max": 5},
        "time": {"T": 2.0, "sample_every": 1},
        "analysis": {"seed": 7},
    }


@pytest.fixture
def write_config(tmp_path):
    """dict 를 JSON 설정 파일로 저장하고 경로를 돌려준다"""
    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path
    return _write
