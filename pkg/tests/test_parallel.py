"""
스윕 병렬 실행 테스트
"""
import time

import pytest

from app.exceptions import AssumptionViolationError, SizeLimitError
from app.parallel import PointOutcome, SweepRunner, run_in_thread


@pytest.mark.asyncio
async def test_run_in_thread():
    assert await run_in_thread(lambda a, b=0: a + b, 2, b=3) == 5


@pytest.mark.asyncio
async def test_outcomes_keep_input_order():
    def work(item):
        time.sleep(0.01 * (5 - item))
        return item * item

    outcomes = await SweepRunner(concurrency=2).process(list(range(5)), work)
    assert [o.value for o in outcomes] == [0, 1, 4, 9, 16]
    assert all(o.ok for o in outcomes)
    assert [o.label for o in outcomes] == ["0", "1", "2", "3", "4"]


@pytest.mark.asyncio
async def test_failures_stay_in_place_and_are_counted_by_exit_code():
    def work(item):
        if item == 1:
            raise AssumptionViolationError("gamma0")
        if item == 2:
            raise SizeLimitError("too big")
        if item == 3:
            raise ValueError("boom")
        return item + 1

    runner = SweepRunner(concurrency=3)
    outcomes = await runner.process([0, 1, 2, 3, 4], work, labels=["a", "b", "c", "d", "e"])
    assert outcomes[0].value == 1 and outcomes[4].value == 5
    assert isinstance(outcomes[1].error, AssumptionViolationError)
    assert [o.exit_code for o in outcomes] == [0, 1, 3, 3, 0]
    assert outcomes[3].label == "d"
    assert runner.stats == {"processed": 2, "errors": 3, "by_exit_code": {1: 1, 3: 2}}


def test_sync_entry():
    outcomes = SweepRunner(concurrency=2).run([1, 2, 3], lambda x: -x)
    assert [o.value for o in outcomes] == [-1, -2, -3]
    assert all(o.seconds >= 0.0 for o in outcomes)


def test_label_length_mismatch():
    with pytest.raises(ValueError):
        SweepRunner().run([1, 2], lambda x: x, labels=["only-one"])


def test_invalid_concurrency():
    with pytest.raises(ValueError):
        SweepRunner(concurrency=0)


def test_outcome_without_error_is_ok():
    outcome = PointOutcome(label="x", value=3)
    assert outcome.ok and outcome.exit_code == 0
