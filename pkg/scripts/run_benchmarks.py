#!/usr/bin/env python
"""
검증 벤치마크 실행 스크립트

닫힌 형식 해, 특성식 근 인증, 두 방법 일치, 에너지 등식, 감쇠율 대 가로좌표,
구조 검사, 리즈 기저/콤팩트성 대리 지표를 차례로 실행하고 결과를 출력한다.
"""
import argparse
import sys
import time
from pathlib import Path
from datetime import datetime

import numpy as np

# 프로젝트 루트를 경로에 추가
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.logging_config import setup_logging
from app.models import BeamParams, CharacteristicParams, EvenLayer, Gains, LayerStack, Mesh, OddLayer
from app.schemas.run_config import load_config
from app.services import (
    asymptotic_vertical_lines,
    assemble,
    compactness_proxy,
    discrete_spectrum,
    find_rayleigh_roots,
    generic_state,
    rayleigh_asymptotic_match,
    rayleigh_char_residual,
    rayleigh_strip_box,
    restrict,
    riesz_gram_condition,
    simulate,
    strong_stability_margin,
    validate_assumption,
    wave_theta,
    zero_eigen_margin,
)
from app.services.experiment_service import ExperimentService
from app.services.spectral_service import count_roots_in_box, rayleigh_frequencies

CONFIG_DIR = Path(__file__).parent.parent / "configs"


def _unit_problem(G: float = 1.0, gamma: float = 3.0, m: int = 1, L: float = 1.0):
    params = BeamParams(alpha=1.0, K=1.0, L=L)
    stack = LayerStack.uniform(m, G=G)
    gains = Gains.uniform(m, gamma)
    return params, stack, gains


def _check(name: str, ok: bool, detail: str) -> bool:
    mark = "✅" if ok else "❌"
    print(f"   {mark} {name}: {detail}")
    return ok


def bench_wave_closed_form(n_elems: int) -> bool:
    """파동 블록 이산 고유값 대 닫힌 형식 λ_n = −ln2/2 + inπ"""
    params, stack, gains = _unit_problem(G=0.0)
    sys_full = assemble(params, stack, gains, Mesh(n_elems=n_elems, L=1.0), coupled=False)
    spectrum = discrete_spectrum(restrict(sys_full, "wave:1"))
    p = CharacteristicParams.wave(params, stack, gains, 1)
    worst = 0.0
    for n in range(5):
        _, exact = wave_theta(1, n, p)
        nearest = spectrum.eigenvalues[np.argmin(np.abs(spectrum.eigenvalues - exact))]
        worst = max(worst, abs(nearest - exact) / abs(exact))
    return _check("파동 닫힌 형식 (n=0..4)", worst < 1e-3, f"최대 상대 오차 {worst:.3e} (< 1e-3)")


def bench_rayleigh_roots(n_max: int) -> bool:
    """레일리 근 잔차, 번호 완전성, 회전수 인증, 점근 간격 기울기, 수직선 군집"""
    params = BeamParams(alpha=1.0, K=1.0, L=np.pi)
    gains = Gains(gamma0=3.0, gamma_odd=[3.0, 3.0])
    p = CharacteristicParams.rayleigh(params, gains)
    spectrum = find_rayleigh_roots(p, n_max + 1)
    extended = rayleigh_frequencies(spectrum)
    roots = {n: s for n, s in extended.items() if n <= n_max}
    resid = max(abs(rayleigh_char_residual(s, p, normalized=True)) for s in roots.values())
    ok = _check("뉴턴 잔차", resid < 1e-10, f"최대 {resid:.3e}")
    ok &= _check("번호 1..n_max", sorted(roots) == list(range(1, n_max + 1)), f"{len(roots)} / {n_max}")

    box = rayleigh_strip_box(p, n_max, 0.5 * (extended[n_max].real + extended[n_max + 1].real))
    counted = count_roots_in_box(lambda z: rayleigh_char_residual(z, p, normalized=True), box)
    ok &= _check("회전수", counted == n_max, f"{counted} / {n_max} (상자 {box})")

    matched = [rayleigh_asymptotic_match(s, p) for s in roots.values()]
    pairs = np.array([(m, gap) for m, gap in matched if 10 <= m <= n_max])
    if len(pairs) >= 2:
        slope = np.polyfit(np.log(pairs[:, 0]), np.log(pairs[:, 1]), 1)[0]
        ok &= _check("점근 간격 기울기", -1.5 <= slope <= -0.5, f"{slope:.3f} ([-1.5, -0.5])")

    re = {n: -s.imag for n, s in roots.items()}
    spread = [max(abs(re[k] - re[n_max]) for k in range(n, n_max + 1)) for n in range(10, n_max + 1, 5)]
    ok &= _check("수직선 군집", all(a >= b for a, b in zip(spread, spread[1:])),
                 f"max|Re λ − Re λ_nmax| {[f'{v:.2e}' for v in spread]}")
    return ok


def bench_two_oracles(meshes) -> bool:
    """비연성 펜슬 고유값과 특성식 근의 차이가 세분에 따라 단조 감소"""
    params = BeamParams(alpha=1.0, K=1.0, L=np.pi)
    gains = Gains(gamma0=3.0, gamma_odd=[3.0, 3.0])
    p = CharacteristicParams.rayleigh(params, gains)
    roots = rayleigh_frequencies(find_rayleigh_roots(p, 5))
    wave = CharacteristicParams.wave(params, LayerStack.uniform(1, G=0.0), gains, 1)
    exact_wave = [wave_theta(1, n, wave)[1] for n in range(1, 4)]

    gaps = []
    for n_elems in meshes:
        full = assemble(params, LayerStack.uniform(1, G=0.0), gains, Mesh(n_elems=n_elems, L=np.pi), coupled=False)
        beam = discrete_spectrum(restrict(full, "beam"), with_residuals=False).eigenvalues
        waves = discrete_spectrum(restrict(full, "wave:1"), with_residuals=False).eigenvalues
        row = [float(np.min(np.abs(beam - 1j * roots[n]))) for n in (1, 2, 3)]
        row += [float(np.min(np.abs(waves - lam))) for lam in exact_wave]
        gaps.append(row)
        print(f"   📐 n_elems={n_elems}: {', '.join(f'{g:.2e}' for g in row)}")
    gaps = np.array(gaps)
    return _check("세분 단조 감소", bool(np.all(np.diff(gaps, axis=0) < 0)), f"메쉬 {list(meshes)}")


def bench_energy_identity(n_elems: int, steps: int) -> bool:
    """연성계 에너지 등식, 단조성, 보존계 드리프트"""
    ok = True
    for gamma, label in ((3.0, "감쇠"), (0.0, "보존")):
        params, stack, gains = _unit_problem(gamma=gamma)
        system = assemble(params, stack, gains, Mesh(n_elems=n_elems, L=1.0), coupled=True)
        dt = 0.01
        trace = simulate(system, generic_state(system), T=steps * dt, dt=dt, sample_every=100)
        ok &= _check(f"{label}: 스텝 등식 잔차", trace.max_step_residual < 1e-10,
                     f"{trace.max_step_residual:.3e} (< 1e-10)")
        if gamma > 0:
            ok &= _check(f"{label}: 에너지 단조 감소", trace.is_monotone(), f"최대 증가 {trace.max_energy_increase:.3e}")
        else:
            drift = abs(trace.energies[-1] - trace.energies[0]) / trace.energies[0]
            ok &= _check(f"{label}: 에너지 드리프트", drift < 1e-10, f"{drift:.3e} (< 1e-10)")
    return ok


def bench_decay_vs_abscissa() -> bool:
    """파동 벤치마크 5%, 연성 벤치마크 10%"""
    ok = True
    for name, limit in (("wave_benchmark.json", 0.05), ("coupled_benchmark.json", 0.10)):
        report = ExperimentService(load_config(CONFIG_DIR / name)).run_decay().report
        mismatch = report.rel_mismatch if report.rel_mismatch is not None else float("nan")
        ok &= _check(name, mismatch < limit,
                     f"mu_fit/2={report.mu_fit / 2:.6g}, abscissa={report.mu_spec:.6g}, 상대 차 {mismatch:.3%}")
    params, stack, gains = _unit_problem(G=0.0)
    lines = asymptotic_vertical_lines(params, stack, gains)
    print(f"   ℹ️  점근 수직선: {', '.join(f'{k}={v:.6g}' for k, v in lines.items())}")
    return ok


def _random_problem(rng: np.random.Generator):
    m = int(rng.integers(1, 3))
    params = BeamParams(alpha=rng.uniform(0.5, 2.0), K=rng.uniform(0.5, 2.0), L=1.0)
    stack = LayerStack(
        m=m,
        odd_layers=[OddLayer(rho=rng.uniform(0.5, 2), h=rng.uniform(0.5, 2), E=rng.uniform(0.5, 2)) for _ in range(m + 1)],
        even_layers=[EvenLayer(h=rng.uniform(0.5, 2), G=rng.uniform(0.1, 2)) for _ in range(m)],
    )
    gains = Gains(gamma0=rng.uniform(0.0, 3.0), gamma_odd=list(rng.uniform(0.0, 3.0, m + 1)))
    return params, stack, gains


def bench_structure(n_elems: int, seed: int) -> bool:
    """수반 관계, 영 고유값 배제, 켤레 대칭, 강안정성 여유"""
    params, stack, gains = _unit_problem()
    mesh = Mesh(n_elems=n_elems, L=1.0)
    config = load_config(CONFIG_DIR / "coupled_benchmark.json")
    residual = ExperimentService(config, seed=seed).adjoint_check()
    ok = _check("수반 관계 잔차", residual < 1e-10,
                f"{residual:.3e} (< 1e-10, {config.analysis.trials}회)")

    rng = np.random.default_rng(seed)
    margins = []
    drawn = 0
    while drawn < 20:
        p, s, g = _random_problem(rng)
        if not validate_assumption(p, s, g).admissible:
            continue
        margins.append(zero_eigen_margin(assemble(p, s, g, Mesh(n_elems=n_elems, L=1.0))))
        drawn += 1
    ok &= _check("σ_min(S) > 0 (20회)", min(margins) > 0, f"최소 {min(margins):.3e}")

    system = assemble(params, stack, gains, mesh, coupled=True)
    spectrum = discrete_spectrum(system)
    defect = spectrum.conjugate_defect()
    ok &= _check("켤레 대칭", defect < 1e-8, f"{defect:.3e}")
    stability = strong_stability_margin(system, spectrum)
    ok &= _check("가로좌표 < 0", stability.abscissa < 0, f"{stability.abscissa:.6g}")
    ok &= _check("허수축 거리 > 0", stability.axis_distance > 0, f"{stability.axis_distance:.6g}")
    return ok


def bench_riesz(meshes) -> bool:
    """비연성 고유벡터 20개의 에너지 Gram 조건수"""
    params, stack, gains = _unit_problem(G=0.0)
    conds = []
    for n_elems in meshes:
        system = assemble(params, stack, gains, Mesh(n_elems=n_elems, L=1.0), coupled=False)
        conds.append(riesz_gram_condition(system, count=20))
        print(f"   📐 n_elems={n_elems}: cond={conds[-1]:.6g}")
    ok = _check("조건수 ≤ 1e3", max(conds) <= 1e3, f"최대 {max(conds):.6g}")
    ok &= _check("메쉬 간 변화 < 2배", max(conds) / min(conds) < 2.0, f"{max(conds) / min(conds):.3f}")
    return ok


def bench_compactness(meshes) -> bool:
    """연성 블록 노름 유계, 비연성 생성자 노름 증가"""
    params, stack, gains = _unit_problem()
    report = compactness_proxy(params, stack, gains, meshes=meshes)
    coupling = report.coupling_norms
    ok = _check("연성 블록 노름 변화 < 2배", max(coupling) / min(coupling) < 2.0,
                f"{[round(c, 6) for c in coupling]}")
    ratios = report.generator_sq_ratios
    ok &= _check("생성자 노름² 증가 ≥ 4배", min(ratios) >= 3.6,
                 f"비 {[round(r, 3) for r in ratios]} (노름 비 {[round(r, 3) for r in report.generator_ratios]})")
    return ok


def main():
    parser = argparse.ArgumentParser(description="검증 벤치마크")
    parser.add_argument("--only", default=None, help="실행할 항목 (예: wave,roots)")
    parser.add_argument("--quick", action="store_true", help="작은 메쉬로 빠르게 실행")
    parser.add_argument("--seed", type=int, default=20240601, help="난수 시드")
    args = parser.parse_args()
    setup_logging(log_file="")

    quick = args.quick
    benches = {
        "wave": ("파동 닫힌 형식", lambda: bench_wave_closed_form(64 if quick else 256)),
        "roots": ("레일리 특성식 근", lambda: bench_rayleigh_roots(20 if quick else 40)),
        "oracles": ("두 방법 일치", lambda: bench_two_oracles((16, 32, 64) if quick else (64, 128, 256))),
        "energy": ("에너지 등식", lambda: bench_energy_identity(16 if quick else 64, 1000 if quick else 10_000)),
        "decay": ("감쇠율 대 가로좌표", bench_decay_vs_abscissa),
        "structure": ("구조 검사", lambda: bench_structure(16 if quick else 64, args.seed)),
        "riesz": ("리즈 기저 대리 지표", lambda: bench_riesz((16, 32, 64) if quick else (64, 128, 256))),
        "compact": ("콤팩트성 대리 지표", lambda: bench_compactness((8, 16, 32) if quick else (32, 64, 128))),
    }
    selected = args.only.split(",") if args.only else list(benches)

    print("=" * 60)
    print("🧪 검증 벤치마크")
    print(f"   시작 시간: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print("=" * 60)

    results = {}
    for key in selected:
        title, func = benches[key]
        print(f"\n📌 {title}")
        started = time.perf_counter()
        try:
            results[key] = func()
        except Exception as e:
            print(f"   ❌ 실행 실패: {e}")
            results[key] = False
        print(f"   ⏱️  {time.perf_counter() - started:.1f}초")

    print("\n" + "=" * 60)
    passed = sum(1 for v in results.values() if v)
    print(f"{'✅' if passed == len(results) else '⚠️'} 통과 {passed}/{len(results)}")
    print("=" * 60)
    return 0 if passed == len(results) else 1


if __name__ == "__main__":
    sys.exit(main())
