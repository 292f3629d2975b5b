"""
모델 서비스 테스트 (연성 행렬, 이득 가정 검사)
"""
import numpy as np
import pytest
from pydantic import ValidationError

from app.exceptions import AssumptionViolationError, InvalidParameterError
from app.models import BeamParams, EvenLayer, Gains, LayerStack, OddLayer
from app.services import build_coupling_matrices, compute_N, require_admissible, validate_assumption


def test_coupling_matrices_banded():
    A, B = build_coupling_matrices(2)
    np.testing.assert_array_equal(A, [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5]])
    np.testing.assert_array_equal(B, [[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]])


def test_coupling_matrices_reject_empty_core():
    with pytest.raises(InvalidParameterError):
        build_coupling_matrices(0)


def test_compute_N_uniform_and_mixed():
    """N = A h_O / h_E + 1"""
    np.testing.assert_allclose(compute_N(LayerStack.uniform(1)), [2.0])
    stack = LayerStack(
        m=1,
        odd_layers=[OddLayer(rho=1, h=1, E=1), OddLayer(rho=1, h=3, E=1)],
        even_layers=[EvenLayer(h=2, G=1)],
    )
    np.testing.assert_allclose(compute_N(stack), [2.0])


def test_admissible_gains():
    report = validate_assumption(BeamParams(alpha=1, K=1, L=1), LayerStack.uniform(1), Gains.uniform(1, 3.0))
    assert report.admissible
    assert report.violations == []


def test_gamma0_violation_named():
    params = BeamParams(alpha=4.0, K=1.0, L=1.0)
    gains = Gains(gamma0=2.0, gamma_odd=[3.0, 3.0])
    report = validate_assumption(params, LayerStack.uniform(1), gains)
    assert [v.name for v in report.violations] == ["gamma0"]
    assert report.violations[0].critical == pytest.approx(2.0)


def test_odd_layer_violation_uses_layer_number():
    """두 번째 홀수층은 층 번호 3"""
    stack = LayerStack(
        m=1,
        odd_layers=[OddLayer(rho=1, h=1, E=1), OddLayer(rho=4, h=1, E=1)],
        even_layers=[EvenLayer(h=1, G=1)],
    )
    gains = Gains(gamma0=3.0, gamma_odd=[3.0, 2.0])
    report = validate_assumption(BeamParams(alpha=1, K=1, L=1), stack, gains)
    assert [v.name for v in report.violations] == ["gamma_odd[3]"]


def test_relative_tolerance_boundary():
    params = BeamParams(alpha=1.0, K=1.0, L=1.0)
    stack = LayerStack.uniform(1)
    near = Gains(gamma0=1.0 + 1e-14, gamma_odd=[3.0, 3.0])
    far = Gains(gamma0=1.0 + 1e-9, gamma_odd=[3.0, 3.0])
    assert not validate_assumption(params, stack, near).admissible
    assert validate_assumption(params, stack, far).admissible


def test_gain_length_mismatch():
    with pytest.raises(InvalidParameterError):
        validate_assumption(BeamParams(alpha=1, K=1, L=1), LayerStack.uniform(2), Gains.uniform(1, 3.0))


def test_require_admissible_exit_code():
    gains = Gains(gamma0=1.0, gamma_odd=[3.0, 3.0])
    with pytest.raises(AssumptionViolationError) as exc:
        require_admissible(BeamParams(alpha=1, K=1, L=1), LayerStack.uniform(1), gains)
    assert exc.value.exit_code == 1
    assert "gamma0" in str(exc.value)


def test_stack_length_validation():
    with pytest.raises(ValidationError):
        LayerStack(m=2, odd_layers=[OddLayer(rho=1, h=1, E=1)] * 2, even_layers=[EvenLayer(h=1, G=1)] * 2)


def test_negative_values_rejected():
    with pytest.raises(ValidationError):
        Gains(gamma0=1.0, gamma_odd=[-0.1, 1.0])
    with pytest.raises(ValidationError):
        BeamParams(alpha=0.0, K=1.0, L=1.0)
    with pytest.raises(ValidationError):
        EvenLayer(h=1.0, G=-1.0)


def test_layer_index_map():
    stack = LayerStack.uniform(2)
    assert stack.odd_indices == [1, 3, 5]
    assert stack.even_indices == [2, 4]
    assert stack.odd_position(5) == 2
    assert stack.even_position(4) == 1
    with pytest.raises(InvalidParameterError):
        stack.odd_position(2)
    with pytest.raises(InvalidParameterError):
        stack.even_position(6)
