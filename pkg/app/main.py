"""
샌드위치 보 안정화 실험실 - 명령행 진입점

사용법:
    python -m app.main validate --config configs/sample.json
    python -m app.main spectrum --config configs/rayleigh_roots.json --decoupled --method roots
    python -m app.main simulate --config configs/wave_benchmark.json
    python -m app.main sweep --config configs/sample.json --param gains.gamma0 --values 0.5,2,3

종료 코드: 0 정상, 1 가정 위반, 2 사용법/파싱, 3 수치 오류, 4 인증 실패, 5 불변식 위반
"""
import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

from app.config import settings
from app.exceptions import (
    AssumptionViolationError,
    ConfigError,
    InvariantBreachError,
    LabError,
)
from app.exporters import write_json, write_matrix, write_spectrum_csv, write_sweep_csv, write_trace_csv
from app.logging_config import setup_logging
from app.models.spectrum import Spectrum
from app.parallel import SweepRunner
from app.schemas.report import FLAG_ASSUMPTION, FLAG_NUMERICAL, DecayReport, SpectrumSummary, SweepRow
from app.schemas.run_config import RunConfig, check_param_path, load_config, parse_values, with_param
from app.services.experiment_service import ExperimentService
from app.services.model_service import validate_assumption

# 불변식 허용치 (E(0) 대비)
ENERGY_INCREASE_TOL = 1e-10
BALANCE_TOL = 1e-10


# ===========================================
# 공통
# ===========================================

def _output_dir(args, config: RunConfig) -> Path:
    path = Path(args.output or config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _service(args, config: RunConfig) -> ExperimentService:
    service = ExperimentService(config, coupled=args.coupled, seed=args.seed, force=args.force)
    report = service.check_admissible()
    if not report.admissible:
        print(f"⚠️  이득 가정 위반을 무시하고 진행합니다 (--force): {report.describe()}")
    return service


def _summary(spectrum: Spectrum) -> SpectrumSummary:
    abscissa = spectrum.abscissa
    return SpectrumSummary(
        abscissa=abscissa if math.isfinite(abscissa) else None,
        n_eigenvalues=len(spectrum),
        certified_count=spectrum.certified_count,
    )


# ===========================================
# 명령
# ===========================================

def cmd_validate(args) -> int:
    """이득 가정 검사와 설정 출력"""
    config = load_config(args.config)
    report = validate_assumption(config.beam, config.layers, config.gains)
    out = _output_dir(args, config)
    write_json(out / "validate.json", {"admissible": report.admissible, **report.model_dump(mode="python")})

    print("=" * 60)
    print("🔎 설정 검사")
    print("=" * 60)
    print(json.dumps(config.echo(), ensure_ascii=False, indent=2))
    if report.admissible:
        print("✅ 이득 가정 만족: 위반 없음")
        return 0
    for item in report.violations:
        print(f"❌ {item.name}: gain={item.gain!r}, critical={item.critical!r}")
    raise AssumptionViolationError(f"이득 가정 위반: {report.describe()}")


def cmd_spectrum(args) -> int:
    """스펙트럼 CSV + 요약 JSON"""
    config = load_config(args.config)
    service = _service(args, config)
    out = _output_dir(args, config)

    print("=" * 60)
    print(f"📈 스펙트럼 계산 (방법: {args.method}, 연성: {service.coupled}, 부분계: {config.subsystem})")
    print("=" * 60)

    system = None
    if args.method == "roots":
        spectrum = service.roots_spectrum()
    else:
        system = service.build_system()
        print(f"   🧮 자유도 {system.n}, 펜슬 크기 {system.state_size}")
        spectrum = service.pencil_spectrum(system)

    write_spectrum_csv(out / "spectrum.csv", spectrum)
    summary = _summary(spectrum)
    write_json(out / "spectrum_summary.json", summary)

    if args.export_matrices:
        system = system or service.build_system()
        for name, matrix in (("M", system.M), ("S", system.S), ("D", system.D)):
            write_matrix(out / f"{name}.txt", matrix)
        print("   💾 M, S, D 행렬 저장 완료")

    print(f"✅ 고유값 {summary.n_eigenvalues}개 (인증 {summary.certified_count}개), 가로좌표 {summary.abscissa!r}")
    print(f"   출력: {out}")
    return 0


def cmd_simulate(args) -> int:
    """에너지 기록 CSV + 감쇠 보고서 JSON"""
    config = load_config(args.config)
    service = _service(args, config)
    out = _output_dir(args, config)

    print("=" * 60)
    print(f"⏱️  시간 적분 (T={config.time.T}, 연성: {service.coupled}, 초기 데이터: {config.initial.kind})")
    print("=" * 60)

    run = service.run_decay()
    trace, report = run.trace, run.report
    write_trace_csv(out / "trace.csv", trace)
    write_json(out / "decay_report.json", report)

    print(f"   📊 스텝 {trace.steps}, dt={trace.dt:.6g}, 표본 {len(trace)}")
    print(f"   mu_fit={report.mu_fit!r}, abscissa={report.mu_spec!r}, rel_mismatch={report.rel_mismatch!r}")
    if report.flags:
        print(f"   🏷️  플래그: {', '.join(report.flags)}")

    if trace.initial_energy > 0:
        if trace.max_energy_increase > ENERGY_INCREASE_TOL:
            raise InvariantBreachError(f"에너지가 증가했습니다: 최대 증가량 {trace.max_energy_increase:.3e}·E(0)")
        if trace.max_step_residual > BALANCE_TOL:
            raise InvariantBreachError(f"에너지 등식 잔차 {trace.max_step_residual:.3e}·E(0) 가 허용치를 넘습니다")
    print(f"✅ 완료, 출력: {out}")
    return 0


def _sweep_point(service: ExperimentService) -> DecayReport:
    service.check_admissible()
    return service.run_decay().report


def cmd_sweep(args) -> int:
    """파라미터 스윕 CSV (입력 순서 유지)"""
    config = load_config(args.config)
    if not args.param:
        raise ConfigError("--param 이 필요합니다")
    check_param_path(config, args.param)
    values = parse_values(args.values or "")
    out = _output_dir(args, config)

    services = [
        ExperimentService(with_param(config, args.param, v), coupled=args.coupled, seed=args.seed, force=args.force)
        for v in values
    ]

    print("=" * 60)
    print(f"🔁 파라미터 스윕: {args.param} ∈ {values}")
    print(f"   ⚡ 병렬 처리: 동시 {settings.sweep_concurrency}건")
    print("=" * 60)

    runner = SweepRunner(concurrency=settings.sweep_concurrency)
    outcomes = runner.run(services, _sweep_point, labels=[f"{args.param}={v:g}" for v in values])
    rows: List[SweepRow] = []
    for value, outcome in zip(values, outcomes):
        if outcome.ok:
            report = outcome.value
            rows.append(SweepRow(
                param_value=value,
                abscissa=report.mu_spec,
                mu_fit=report.mu_fit,
                rel_mismatch=report.rel_mismatch,
                flags=report.flags,
            ))
        elif isinstance(outcome.error, AssumptionViolationError):
            rows.append(SweepRow(param_value=value, flags=[FLAG_ASSUMPTION]))
        else:
            rows.append(SweepRow(param_value=value, flags=[FLAG_NUMERICAL]))

    write_sweep_csv(out / "sweep.csv", rows)
    stats = runner.stats
    print(f"✅ 스윕 완료: {len(rows)}행 (성공 {stats['processed']}, 실패 {stats['errors']})")
    print(f"   출력: {out}")
    return 0


# ===========================================
# 진입점
# ===========================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="샌드위치 보 경계 피드백 안정화 실험실")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, coupling: bool = True):
        p.add_argument("--config", required=True, help="JSON 설정 파일 경로")
        p.add_argument("--output", default=None, help="출력 디렉토리 (기본: 설정의 output_dir)")
        p.add_argument("--seed", type=int, default=None, help="난수 시드")
        p.add_argument("--force", action="store_true", help="이득 가정 위반이어도 진행")
        if coupling:
            group = p.add_mutually_exclusive_group()
            group.add_argument("--coupled", dest="coupled", action="store_true", default=None, help="연성 시스템")
            group.add_argument("--decoupled", dest="coupled", action="store_false", help="비연성 시스템 (G=0)")
            p.set_defaults(coupled=None)

    p_validate = sub.add_parser("validate", help="이득 가정 검사")
    common(p_validate, coupling=False)
    p_validate.set_defaults(handler=cmd_validate)

    p_spectrum = sub.add_parser("spectrum", help="스펙트럼 계산")
    common(p_spectrum)
    p_spectrum.add_argument("--method", choices=["pencil", "roots"], default="pencil")
    p_spectrum.add_argument("--export-matrices", action="store_true", help="M, S, D 텍스트 행렬 저장")
    p_spectrum.set_defaults(handler=cmd_spectrum)

    p_simulate = sub.add_parser("simulate", help="시간 적분과 감쇠율 비교")
    common(p_simulate)
    p_simulate.set_defaults(handler=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="파라미터 스윕")
    common(p_sweep)
    p_sweep.add_argument("--param", help="파라미터 경로 (예: gains.gamma0)")
    p_sweep.add_argument("--values", help="쉼표 구분 값 목록")
    p_sweep.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """명령 실행 후 종료 코드 반환"""
    setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else ConfigError.exit_code
    try:
        return args.handler(args)
    except LabError as e:
        print(f"❌ {e.detail}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
