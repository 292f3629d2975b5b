"""
스윕 병렬 실행

파라미터 스윕의 각 점은 서로 독립인 조립/고유값/적분 계산이다.
스레드 풀에서 동시에 돌리고 결과는 입력 순서대로 돌려준다.
"""
import asyncio
import logging
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Generic, List, Optional, Sequence, TypeVar

from app.exceptions import LabError

logger = logging.getLogger(__name__)

T = TypeVar("T")

# numpy/scipy 는 LAPACK 호출 중 GIL 을 푼다
_executor: Optional[ThreadPoolExecutor] = None


def get_executor(max_workers: int = 4) -> ThreadPoolExecutor:
    """전역 ThreadPoolExecutor 반환 (싱글톤)"""
    global _executor
    if _executor is None or _executor._shutdown:
        _executor = ThreadPoolExecutor(max_workers=max_workers, thread_name_prefix="sweep")
    return _executor


def shutdown_executor():
    """전역 ThreadPoolExecutor 종료"""
    global _executor
    if _executor is not None:
        _executor.shutdown(wait=True)
        _executor = None


async def run_in_thread(func: Callable[..., T], *args, **kwargs) -> T:
    """동기 계산을 스레드 풀에서 실행"""
    loop = asyncio.get_running_loop()
    return await loop.run_in_executor(get_executor(), lambda: func(*args, **kwargs))


@dataclass
class PointOutcome(Generic[T]):
    """스윕 한 점의 결과 (value 또는 error 중 하나)"""
    label: str
    value: Optional[T] = None
    error: Optional[BaseException] = None
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def exit_code(self) -> int:
        """실패 원인의 종료 코드 (LabError 가 아니면 수치 오류로 본다)"""
        if self.error is None:
            return 0
        if isinstance(self.error, LabError):
            return self.error.exit_code
        return 3


class SweepRunner:
    """
    스윕 점 배치 실행기

    한 점의 실패가 나머지를 멈추지 않는다. 실패는 PointOutcome.error 에 남고
    종료 코드별로 집계된다.
    """

    def __init__(self, concurrency: int = 4):
        if concurrency < 1:
            raise ValueError(f"concurrency 는 1 이상이어야 합니다: {concurrency}")
        self.concurrency = concurrency
        self._failures: Counter = Counter()
        self._processed = 0

    async def process(
        self,
        points: Sequence[Any],
        func: Callable[[Any], T],
        labels: Optional[Sequence[str]] = None,
    ) -> List[PointOutcome[T]]:
        """
        점마다 func 실행

        Args:
            points: 스윕 점 목록
            func: 점 하나를 계산하는 동기 함수
            labels: 로그용 이름 (기본: str(point))

        Returns:
            입력 순서의 PointOutcome 목록
        """
        labels = list(labels) if labels is not None else [str(p) for p in points]
        if len(labels) != len(points):
            raise ValueError("labels 와 points 의 길이가 다릅니다")
        semaphore = asyncio.Semaphore(self.concurrency)

        async def one(point, label: str) -> PointOutcome[T]:
            async with semaphore:
                started = time.perf_counter()
                try:
                    value = await run_in_thread(func, point)
                except Exception as e:
                    outcome = PointOutcome(label=label, error=e, seconds=time.perf_counter() - started)
                    self._failures[outcome.exit_code] += 1
                    logger.error(f"스윕 점 실패 ({label}, 코드 {outcome.exit_code}): {e}")
                    return outcome
                self._processed += 1
                elapsed = time.perf_counter() - started
                logger.debug(f"스윕 점 완료 ({label}): {elapsed:.2f}초")
                return PointOutcome(label=label, value=value, seconds=elapsed)

        return await asyncio.gather(*(one(p, lab) for p, lab in zip(points, labels)))

    def run(
        self,
        points: Sequence[Any],
        func: Callable[[Any], T],
        labels: Optional[Sequence[str]] = None,
    ) -> List[PointOutcome[T]]:
        """동기 진입점"""
        return asyncio.run(self.process(points, func, labels))

    @property
    def stats(self) -> dict:
        return {
            "processed": self._processed,
            "errors": sum(self._failures.values()),
            "by_exit_code": dict(sorted(self._failures.items())),
        }
