"""
fracmix 배치 실행기

설정 JSON 한 개를 읽어 liouville → spectral → inverse/forward 를 차례로 실행하고
결과를 output 디렉토리에 저장합니다.

사용법:
    python main.py --config configs/invert_sine.json
    python main.py --config configs/roundtrip_problem2.json --output data/rt --threads 4

종료 코드: 0 성공, 1 입력 오류, 2 비적정 모드(IllPosedMode)
"""
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

import click
import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.config import Config
from src.errors import FracmixError, IllPosedMode, InputError
from src.forward import (
    ProblemSpec,
    assemble_field,
    field_to_frame,
    forward_data,
    modes_to_frame,
    time_grid,
)
from src.inverse import (
    delta_table,
    illposed_p_catalog,
    lemma_probe,
    reconstruct,
    report_to_json,
    stability_probe,
)
from src.io_utils import load_json, save_csv, save_json
from src.liouville import (
    LiouvilleMap,
    build_map,
    operator_from_csv,
    operator_from_expressions,
    pull_eigensystem,
    pull_field,
    pull_function,
    push_function,
)
from src.mlf import MlfParams, tabulate
from src.presets import function_from_expression, resolve_function, resolve_potential
from src.run_config import RunConfig, load_run_config
from src.spectral import (
    EigenSystem,
    SpectralCoefficients,
    eigensystem_from_json,
    eigensystem_to_json,
    extended_eigenvalues,
    l2_norm,
    project,
    solve_eigensystem,
)

logger = logging.getLogger(__name__)

LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def setup_logging(level_name: str) -> None:
    level = LOG_LEVELS.get(level_name.lower(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="[%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


# ----------------------------------------------------------------------------
# 공통 준비 단계
# ----------------------------------------------------------------------------

class Workspace:
    """한 번의 실행에서 공유하는 고유계와 (필요하면) Liouville 변환"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.out = Path(config.output_dir)
        self._sys: Optional[EigenSystem] = None
        self.lmap: Optional[LiouvilleMap] = None

    @property
    def sys(self) -> EigenSystem:
        if self._sys is None:
            self._sys = self._build_eigensystem()
        return self._sys

    def _build_eigensystem(self) -> EigenSystem:
        op = self.config.operator
        num = self.config.numerics
        if op.eigensystem_json is not None:
            # eigs 가 저장한 정규형 고유계 재사용, 격자와 모드 수는 파일을 따른다
            path = Path(op.eigensystem_json)
            if not path.exists():
                raise InputError(f"고유계 JSON 파일이 없습니다: {path}")
            cached = eigensystem_from_json(load_json(path))
            logger.info(f"저장된 고유계 사용: {path} (n_grid={cached.n_grid}, n_modes={cached.n_modes})")
            return cached
        if op.is_transformed:
            spec = (
                operator_from_expressions(op.r, op.e, op.a, op.b)
                if op.r is not None
                else operator_from_csv(op.r_csv, op.e_csv)
            )
            self.lmap = build_map(spec, num.n_grid)
            normal = solve_eigensystem(self.lmap.g, num.n_modes, num.n_grid)
            return pull_eigensystem(self.lmap, normal)
        if op.g_samples is not None:
            g = np.asarray(op.g_samples, dtype=float)
        elif op.g is not None:
            g = function_from_expression(op.g)
        else:
            g = resolve_potential(op.preset)
        return solve_eigensystem(g, num.n_modes, num.n_grid)

    def sample(self, spec: str) -> np.ndarray:
        """함수 항목을 정규형 격자 샘플로 (변환이 있으면 push)"""
        fn = resolve_function(spec)
        system = self.sys
        if self.lmap is not None:
            return push_function(self.lmap, fn)
        return fn(system.grid)

    def to_original(self, samples: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if self.lmap is not None:
            return self.lmap.x_grid, pull_function(self.lmap, samples)
        return self.sys.grid, samples

    def coefficients(self, name: str, coeffs: Optional[list], fallback_zero: bool) -> SpectralCoefficients:
        """계수 목록 또는 함수 항목을 전개 계수로"""
        system = self.sys
        if coeffs is not None:
            values = np.zeros(system.n_modes)
            if len(coeffs) > system.n_modes:
                raise InputError(f"{name} 계수 {len(coeffs)}개가 모드 수 {system.n_modes} 보다 많습니다")
            values[: len(coeffs)] = coeffs
            return SpectralCoefficients(values=values)
        spec = getattr(self.config.data, name)
        if spec is None:
            if fallback_zero:
                return SpectralCoefficients(values=np.zeros(system.n_modes))
            raise InputError(f"data.{name} 또는 data.{name}_coeffs 가 필요합니다")
        return project(system, self.sample(spec))

    def problem(self, phi: Optional[np.ndarray] = None, psi: Optional[np.ndarray] = None,
                beta: Optional[float] = None, p: Optional[float] = None) -> ProblemSpec:
        cfg = self.config
        return ProblemSpec(
            alpha=cfg.orders.alpha,
            beta=cfg.orders.beta if beta is None else beta,
            p=cfg.times.p if p is None else p,
            q=cfg.times.q,
            phi=phi,
            psi=psi,
        )

    def measured_problem(self) -> ProblemSpec:
        data = self.config.data
        if data.phi is None or data.psi is None:
            raise InputError("data.phi 와 data.psi 가 필요합니다")
        return self.problem(self.sample(data.phi), self.sample(data.psi))

    def grid_t(self) -> np.ndarray:
        return time_grid(self.config.times.p, self.config.times.q, self.config.numerics.n_t)

    def save_field(self, field, name: str) -> None:
        if self.lmap is not None:
            field = pull_field(self.lmap, field)
        save_csv(field_to_frame(field), self.out / name)


# ----------------------------------------------------------------------------
# 명령
# ----------------------------------------------------------------------------

def cmd_eigs(ws: Workspace) -> int:
    system = ws.sys
    save_json(eigensystem_to_json(system), ws.out / "eigensystem.json")
    save_csv(pd.DataFrame({"k": np.arange(1, system.n_modes + 1), "lambda": system.eigenvalues}),
             ws.out / "eigenvalues.csv")
    return 0


def cmd_forward(ws: Workspace) -> int:
    data = ws.config.data
    f_c = ws.coefficients("source", data.source_coeffs, fallback_zero=False)
    v0_c = ws.coefficients("initial", data.initial_coeffs, fallback_zero=True)
    spec = ws.problem()
    phi, psi, modes = forward_data(ws.sys, f_c, v0_c, spec)
    field = assemble_field(ws.sys, modes, spec, ws.grid_t())
    ws.save_field(field, "u.csv")
    x, phi_x = ws.to_original(phi)
    _, psi_x = ws.to_original(psi)
    save_csv(pd.DataFrame({"x": x, "phi": phi_x}), ws.out / "phi.csv")
    save_csv(pd.DataFrame({"x": x, "psi": psi_x}), ws.out / "psi.csv")
    save_csv(modes_to_frame(modes), ws.out / "modes.csv")
    return 0


def _write_illposed(ws: Workspace, spec: ProblemSpec, exc: IllPosedMode) -> None:
    num = ws.config.numerics
    save_csv(delta_table(ws.sys, spec, num.delta_floor, num.warn_floor), ws.out / "deltas.csv")
    save_json({"flagged_modes": exc.modes, "deltas": exc.deltas}, ws.out / "flagged.json")


def cmd_invert(ws: Workspace) -> int:
    num = ws.config.numerics
    spec = ws.measured_problem()
    try:
        report = reconstruct(ws.sys, spec, num.delta_floor, num.warn_floor, ws.grid_t(), num.t_min)
    except IllPosedMode as exc:
        _write_illposed(ws, spec, exc)
        raise
    save_json(report_to_json(report), ws.out / "report.json")
    x, f_x = ws.to_original(report.f_samples)
    save_csv(pd.DataFrame({"x": x, "f": f_x}), ws.out / "f.csv")
    ws.save_field(report.u_field, "u.csv")
    return 0


def cmd_diagnose(ws: Workspace) -> int:
    num = ws.config.numerics
    spec = ws.problem()
    table = delta_table(ws.sys, spec, num.delta_floor, num.warn_floor)
    save_csv(table, ws.out / "deltas.csv")
    flagged = table.loc[table["flagged"], "k"].tolist()
    save_json({
        "min_abs_delta": float(table["abs_delta"].min()),
        "flagged_modes": flagged,
        "warned_modes": table.loc[table["warned"], "k"].tolist(),
    }, ws.out / "flagged.json")
    if flagged:
        logger.warning(f"|Δ_k| < {num.delta_floor:g} 인 모드: {flagged}")
    return 0


def cmd_catalog(ws: Workspace) -> int:
    cfg = ws.config
    catalog = illposed_p_catalog(ws.sys, cfg.orders.alpha, cfg.times.q, cfg.catalog.k_max, cfg.catalog.n_max)
    save_csv(catalog.to_frame(), ws.out / "catalog.csv")
    save_json({"gamma": catalog.gamma}, ws.out / "catalog_gamma.json")
    return 0


def cmd_probe(ws: Workspace) -> int:
    cfg = ws.config
    probe = cfg.probe
    if probe.kind == "rational_p":
        result = lemma_probe(
            "rational_p",
            eigenvalues=extended_eigenvalues(ws.sys, probe.k_max),
            alpha=cfg.orders.alpha, p=cfg.times.p, q=cfg.times.q, burn_in=probe.burn_in,
        )
    elif probe.kind == "large_q":
        result = lemma_probe(
            "large_q",
            eigenvalues=extended_eigenvalues(ws.sys, probe.k_max),
            alpha=cfg.orders.alpha, beta=cfg.orders.beta, p=cfg.times.p, q_ladder=probe.q_ladder,
        )
    else:
        spec = ws.measured_problem()
        result = stability_probe(ws.sys, spec, probe.noise_levels, probe.trials, cfg.seed,
                                 cfg.numerics.delta_floor)
        if probe.contrast_offset is not None:
            first = illposed_p_catalog(ws.sys, cfg.orders.alpha, cfg.times.q, 1, 1).entries[0]
            near = ws.problem(spec.phi, spec.psi, beta=2.0, p=first.p_value + probe.contrast_offset)
            contrast = stability_probe(ws.sys, near, probe.noise_levels, probe.trials, cfg.seed,
                                       cfg.numerics.delta_floor)
            result["contrast"] = contrast
            result["contrast_factor"] = contrast["ratio_max"] / result["ratio_max"] if result["ratio_max"] else None
    save_json(result, ws.out / "probe.json")
    return 0


def cmd_roundtrip(ws: Workspace) -> int:
    num = ws.config.numerics
    data = ws.config.data
    f_true = ws.coefficients("source", data.source_coeffs, fallback_zero=False)
    v0_true = ws.coefficients("initial", data.initial_coeffs, fallback_zero=True)
    base = ws.problem()
    phi, psi, _ = forward_data(ws.sys, f_true, v0_true, base)
    spec = ws.problem(phi, psi)
    report = reconstruct(ws.sys, spec, num.delta_floor, num.warn_floor, ws.grid_t(), num.t_min)

    f_err = float(np.linalg.norm(report.f_coeffs.values - f_true.values))
    f_norm = float(np.linalg.norm(f_true.values))
    summary = {
        "relative_f_error": f_err / f_norm if f_norm > 0 else f_err,
        "relative_v0_error": float(
            np.linalg.norm(np.array([m.V0 for m in report.modes]) - v0_true.values)
            / max(np.linalg.norm(v0_true.values), 1.0)
        ),
        "trace_q": report.residuals["trace_q"],
        "trace_p": report.residuals["trace_p"],
        "gluing": report.residuals["gluing"],
        "min_abs_delta": report.min_abs_delta,
        "phi_norm": l2_norm(ws.sys, phi),
        "psi_norm": l2_norm(ws.sys, psi),
    }
    click.echo(f"relative f error : {summary['relative_f_error']:.3e}")
    click.echo(f"‖u(·,q) - φ‖     : {summary['trace_q']:.3e}")
    click.echo(f"‖u(·,-p) - ψ‖    : {summary['trace_p']:.3e}")
    save_json({"summary": summary, "report": report_to_json(report)}, ws.out / "roundtrip.json")
    return 0


def cmd_mlf_table(ws: Workspace) -> int:
    t = ws.config.mlf_table
    table = tabulate(MlfParams(t.alpha, t.beta), t.z_min, t.z_max, t.n)
    save_csv(table, ws.out / "mlf_table.csv")
    return 0


COMMANDS: Dict[str, Callable[[Workspace], int]] = {
    "eigs": cmd_eigs,
    "forward": cmd_forward,
    "invert": cmd_invert,
    "diagnose": cmd_diagnose,
    "catalog": cmd_catalog,
    "probe": cmd_probe,
    "roundtrip": cmd_roundtrip,
    "mlf-table": cmd_mlf_table,
}


def _report_error(exc: BaseException) -> None:
    message = " ".join(str(exc).split())
    click.echo(f"error: {type(exc).__name__}: {message}", err=True)


def run(config: RunConfig) -> int:
    """설정에 따라 명령 실행, 종료 코드 반환"""
    Config.THREADS = config.threads
    ws = Workspace(config)
    try:
        save_json(config.model_dump(mode="json"), ws.out / "config.effective.json")
        logger.info(f"명령 실행: {config.command} → {ws.out}")
        return COMMANDS[config.command](ws)
    except IllPosedMode as exc:
        _report_error(exc)
        return 2
    except (FracmixError, OSError) as exc:
        _report_error(exc)
        return 1


@click.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False), help="실행 설정 JSON")
@click.option("--output", default=None, help="결과 디렉토리 (설정의 output_dir 대체)")
@click.option("--threads", type=click.IntRange(min=0), default=None, help="작업 스레드 수 (0 = 자동)")
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None, help="stability 잡음 seed")
def main(config_path: str, output: Optional[str], threads: Optional[int], seed: Optional[int]) -> None:
    setup_logging(Config.LOG_LEVEL)
    try:
        config = load_run_config(config_path)
        updates = {}
        if output is not None:
            updates["output_dir"] = output
        if threads is not None:
            updates["threads"] = threads
        if seed is not None:
            updates["seed"] = seed
        config = config.model_copy(update=updates)
    except (FracmixError, ValidationError, OSError) as exc:
        _report_error(exc)
        sys.exit(1)
    sys.exit(run(config))


if __name__ == "__main__":
    main()
