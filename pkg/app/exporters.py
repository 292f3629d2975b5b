"""
결과 파일 출력

- CSV 실수는 17 유효숫자 ('{:.17g}'), 정의되지 않은 값은 NaN
- JSON 실수는 최단 왕복 표현, 정의되지 않은 값은 null
- 행렬 텍스트: 첫 줄 "rows cols nnz", 이후 "i j value" (0 기반)
"""
import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Union

import numpy as np

from app.models.spectrum import Spectrum
from app.models.state import EnergyTrace
from app.schemas.report import SweepRow

SPECTRUM_HEADER = ["branch", "n", "re_lambda", "im_lambda", "residual", "certified"]
TRACE_HEADER = ["t", "energy", "dissipation_rate", "step_residual"]
SWEEP_HEADER = ["param_value", "abscissa", "mu_fit", "rel_mismatch", "flags"]

PathLike = Union[str, Path]


def fmt_float(value: Optional[float]) -> str:
    if value is None or math.isnan(value):
        return "NaN"
    return "{:.17g}".format(value)


def _open_csv(path: PathLike, header: Sequence[str]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle = path.open("w", encoding="utf-8", newline="")
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(header)
    return handle, writer


def write_spectrum_csv(path: PathLike, spectrum: Spectrum) -> Path:
    handle, writer = _open_csv(path, SPECTRUM_HEADER)
    with handle:
        for lam, branch, n, resid, cert in zip(
            spectrum.eigenvalues, spectrum.branches, spectrum.indices,
            spectrum.residuals, spectrum.certified,
        ):
            writer.writerow([
                branch,
                int(n),
                fmt_float(float(lam.real)),
                fmt_float(float(lam.imag)),
                fmt_float(float(resid)),
                int(bool(cert)),
            ])
    return Path(path)


def write_trace_csv(path: PathLike, trace: EnergyTrace) -> Path:
    handle, writer = _open_csv(path, TRACE_HEADER)
    with handle:
        for row in zip(trace.times, trace.energies, trace.dissipation, trace.step_identity_residuals):
            writer.writerow([fmt_float(float(v)) for v in row])
    return Path(path)


def write_sweep_csv(path: PathLike, rows: Iterable[SweepRow]) -> Path:
    handle, writer = _open_csv(path, SWEEP_HEADER)
    with handle:
        for row in rows:
            writer.writerow([
                fmt_float(row.param_value),
                fmt_float(row.abscissa),
                fmt_float(row.mu_fit),
                fmt_float(row.rel_mismatch),
                ";".join(row.flags),
            ])
    return Path(path)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_json(path: PathLike, payload: Any) -> Path:
    """dict 또는 pydantic 모델을 JSON 으로 저장 (키 순서 유지)"""
    if hasattr(payload, "model_dump"):
        payload = payload.model_dump(mode="python")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(payload), ensure_ascii=False, indent=2, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def write_matrix(path: PathLike, matrix: np.ndarray) -> Path:
    """0 이 아닌 성분만 좌표 형식으로 저장"""
    rows, cols = np.nonzero(matrix)
    lines: List[str] = [f"{matrix.shape[0]} {matrix.shape[1]} {rows.size}"]
    lines.extend(f"{i} {j} {fmt_float(float(matrix[i, j]))}" for i, j in zip(rows, cols))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_matrix(path: PathLike) -> np.ndarray:
    """write_matrix 형식 읽기"""
    with Path(path).open(encoding="utf-8") as handle:
        rows, cols, nnz = (int(v) for v in handle.readline().split())
        out = np.zeros((rows, cols))
        for _ in range(nnz):
            i, j, value = handle.readline().split()
            out[int(i), int(j)] = float(value)
    return out
