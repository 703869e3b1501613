"""
역문제: 측정값 φ = u(·, q), ψ = u(·, -p) 로부터 f(x) 와 u(x, t) 재구성, 조건수 진단

모드별 결정식
    문제 1 (β = 2)    : Δ_k = E_{α,1}(-λq^α) - √λ sin(√λ p) - cos(√λ p)
    문제 2 (1 < β < 2): Δ̃_k = E_{α,1}(-λq^α) - [E_{β,1}(-λp^β) + λ p E_{β,2}(-λp^β)]

B_k = (φ_k - ψ_k) / Δ_k 일 때
    f_k   = λφ_k - λ B_k E_{α,1}(-λq^α)
    V_k(0) = B_k (1 - E_{α,1}(-λq^α)) + φ_k

|Δ_k| < delta_floor 인 모드가 있으면 재구성을 중단하고 IllPosedMode 를 던집니다.
단 φ_k - ψ_k 도 0 인 (0/0) 모드는 몫을 0 으로 두고 기록만 합니다.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import special

from src.config import Config
from src.errors import IllPosedMode, InputError, InvalidOrder, NotIllPosed
from src.forward import (
    ModeSolution,
    ProblemSpec,
    SolutionField,
    assemble_field,
    gluing_residual,
    mode_from_source,
    tail_bound,
    time_grid,
    trace,
)
from src.mlf import MlfParams, mlf_eval
from src.spectral import EigenSystem, SpectralCoefficients, l2_norm, project, synthesize

logger = logging.getLogger(__name__)


def _e(alpha: float, beta: float, z: float) -> float:
    return mlf_eval(MlfParams(alpha, beta), z)


# ----------------------------------------------------------------------------
# 결정식
# ----------------------------------------------------------------------------

def delta_problem1(alpha: float, lam: float, p: float, q: float) -> float:
    """Δ_k (문제 1)"""
    if not (0.0 < alpha <= 1.0):
        raise InvalidOrder(f"alpha 는 (0, 1] 범위여야 합니다: {alpha}")
    w = math.sqrt(lam)
    return _e(alpha, 1.0, -lam * q ** alpha) - w * math.sin(w * p) - math.cos(w * p)


def delta_phase_form(alpha: float, lam: float, p: float, q: float) -> float:
    """Δ_k = E_{α,1}(-λq^α) - √(λ+1) sin(√λ p + γ),  γ = arcsin(1/√(λ+1))"""
    amp = math.sqrt(lam + 1.0)
    gamma = math.asin(1.0 / amp)
    return _e(alpha, 1.0, -lam * q ** alpha) - amp * math.sin(math.sqrt(lam) * p + gamma)


def wave_bracket(beta: float, lam: float, p: float) -> float:
    """E_{β,1}(-λp^β) + λ p E_{β,2}(-λp^β)"""
    arg = -lam * p ** beta
    return _e(beta, 1.0, arg) + lam * p * _e(beta, 2.0, arg)


def delta_problem2(alpha: float, beta: float, lam: float, p: float, q: float) -> float:
    """Δ̃_k (문제 2)"""
    if not (0.0 < alpha < 1.0):
        raise InvalidOrder(f"alpha 는 (0, 1) 범위여야 합니다: {alpha}")
    if not (1.0 < beta < 2.0):
        raise InvalidOrder(f"beta 는 (1, 2) 범위여야 합니다: {beta}")
    return _e(alpha, 1.0, -lam * q ** alpha) - wave_bracket(beta, lam, p)


def delta_for(spec: ProblemSpec, lam: float) -> float:
    if spec.is_wave:
        return delta_problem1(spec.alpha, lam, spec.p, spec.q)
    return delta_problem2(spec.alpha, spec.beta, lam, spec.p, spec.q)


# ----------------------------------------------------------------------------
# 재구성
# ----------------------------------------------------------------------------

@dataclass
class SourceSolve:
    """모드별 계수 풀이 결과 (재구성과 안정성 점검이 공유)"""

    f_k: np.ndarray
    V0: np.ndarray
    deltas: np.ndarray
    flagged: List[int]
    warned: List[int]
    zero_modes: List[int]

    @property
    def aborting(self) -> List[int]:
        return [k for k in self.flagged if k not in self.zero_modes]


def source_coefficients(
    lams: np.ndarray,
    phi_k: np.ndarray,
    psi_k: np.ndarray,
    spec: ProblemSpec,
    delta_floor: float = Config.DELTA_FLOOR,
    warn_floor: float = Config.WARN_FLOOR,
    deltas: Optional[np.ndarray] = None,
    quiet: bool = False,
) -> SourceSolve:
    """(φ_k, ψ_k) → (f_k, V_k(0)), 모드 번호는 1부터"""
    lams = np.asarray(lams, dtype=float)
    if deltas is None:
        deltas = np.array([delta_for(spec, lam) for lam in lams])
    e_q = np.array([_e(spec.alpha, 1.0, -lam * spec.q ** spec.alpha) for lam in lams])
    diff = phi_k - psi_k

    small = np.abs(deltas) < delta_floor
    scale = np.maximum(1.0, np.maximum(np.abs(phi_k), np.abs(psi_k)))
    zero_diff = np.abs(diff) <= Config.ZERO_DIFF_TOL * scale

    B = np.zeros_like(lams)
    ok = ~small
    B[ok] = diff[ok] / deltas[ok]

    flagged = [int(k) + 1 for k in np.nonzero(small)[0]]
    zero_modes = [int(k) + 1 for k in np.nonzero(small & zero_diff)[0]]
    warned = [int(k) + 1 for k in np.nonzero(~small & (np.abs(deltas) < warn_floor))[0]]
    if not quiet:
        for k in zero_modes:
            logger.warning(f"모드 {k}: φ_k - ψ_k 와 Δ_k 가 모두 0 (0/0), 몫을 0 으로 둡니다")
        for k in warned:
            logger.warning(f"모드 {k}: |Δ_k| = {abs(deltas[k - 1]):.3e} < warn_floor {warn_floor:g}")

    f_k = lams * phi_k - lams * B * e_q
    V0 = B * (1.0 - e_q) + phi_k
    return SourceSolve(f_k=f_k, V0=V0, deltas=deltas, flagged=flagged, warned=warned, zero_modes=zero_modes)


@dataclass(eq=False)
class ReconstructionReport:
    """재구성 결과와 진단"""

    f_coeffs: SpectralCoefficients
    f_samples: np.ndarray
    u_field: SolutionField
    delta_values: List[tuple]
    min_abs_delta: float
    flagged_modes: List[int]
    warned_modes: List[int] = field(default_factory=list)
    zero_modes: List[int] = field(default_factory=list)
    residuals: Dict[str, float] = field(default_factory=dict)
    truncation_tail: float = 0.0
    modes: List[ModeSolution] = field(default_factory=list)


def reconstruct(
    sys: EigenSystem,
    spec: ProblemSpec,
    delta_floor: float = Config.DELTA_FLOOR,
    warn_floor: float = Config.WARN_FLOOR,
    grid_t: Optional[np.ndarray] = None,
    t_min: float = Config.T_MIN,
) -> ReconstructionReport:
    """φ, ψ 로부터 f, u 재구성

    Args:
        sys: 고유계 (spec.phi, spec.psi 와 같은 격자)
        spec: 문제 설정 (phi, psi 필수)
        delta_floor: 이 값보다 |Δ_k| 가 작으면 중단
        warn_floor: 이 값보다 작으면 경고
        grid_t: u 를 계산할 시간 격자 (기본: time_grid(p, q))
        t_min: 접합 잔차를 계산할 시각

    Returns:
        ReconstructionReport
    """
    if spec.phi is None or spec.psi is None:
        raise InputError("재구성에는 phi, psi 가 필요합니다")
    phi_c = project(sys, spec.phi)
    psi_c = project(sys, spec.psi)

    solved = source_coefficients(sys.eigenvalues, phi_c.values, psi_c.values, spec, delta_floor, warn_floor)
    deltas = solved.deltas
    if solved.aborting:
        logger.error(f"|Δ_k| < {delta_floor:g} 인 모드 {solved.aborting}: 재구성 중단")
        raise IllPosedMode(solved.aborting, {k: float(deltas[k - 1]) for k in solved.flagged})

    modes = [
        mode_from_source(k + 1, float(sys.eigenvalues[k]), float(solved.f_k[k]), float(solved.V0[k]), spec,
                         delta=float(deltas[k]))
        for k in range(sys.n_modes)
    ]
    f_coeffs = SpectralCoefficients(values=solved.f_k)
    f_samples = synthesize(sys, f_coeffs)
    grid_t = time_grid(spec.p, spec.q) if grid_t is None else grid_t
    u_field = assemble_field(sys, modes, spec, grid_t)

    residuals = {
        "trace_q": l2_norm(sys, trace(sys, modes, spec, spec.q) - spec.phi),
        "trace_p": l2_norm(sys, trace(sys, modes, spec, -spec.p) - spec.psi),
        "gluing": gluing_residual(sys, modes, spec, min(t_min, min(spec.p, spec.q) / 20.0)),
    }
    abs_d = np.abs(deltas)
    report = ReconstructionReport(
        f_coeffs=f_coeffs,
        f_samples=f_samples,
        u_field=u_field,
        delta_values=[(k + 1, float(deltas[k])) for k in range(sys.n_modes)],
        min_abs_delta=float(abs_d.min()),
        flagged_modes=solved.flagged,
        warned_modes=solved.warned,
        zero_modes=solved.zero_modes,
        residuals=residuals,
        truncation_tail=tail_bound(sys, f_coeffs),
        modes=modes,
    )
    logger.info(
        f"재구성 완료: min|Δ|={report.min_abs_delta:.3e} (모드 {int(abs_d.argmin()) + 1}), "
        f"‖u(q)-φ‖={residuals['trace_q']:.3e}, ‖u(-p)-ψ‖={residuals['trace_p']:.3e}"
    )
    return report


def delta_table(sys: EigenSystem, spec: ProblemSpec, delta_floor: float = Config.DELTA_FLOOR,
                warn_floor: float = Config.WARN_FLOOR) -> pd.DataFrame:
    """(k, λ_k, Δ_k, |Δ_k|, flagged, warned) 표"""
    deltas = np.array([delta_for(spec, lam) for lam in sys.eigenvalues])
    abs_d = np.abs(deltas)
    return pd.DataFrame({
        "k": np.arange(1, sys.n_modes + 1),
        "lambda": sys.eigenvalues,
        "delta": deltas,
        "abs_delta": abs_d,
        "flagged": abs_d < delta_floor,
        "warned": (abs_d >= delta_floor) & (abs_d < warn_floor),
    })


def report_to_json(report: ReconstructionReport) -> dict:
    return {
        "min_abs_delta": report.min_abs_delta,
        "flagged_modes": report.flagged_modes,
        "warned_modes": report.warned_modes,
        "zero_modes": report.zero_modes,
        "residuals": report.residuals,
        "truncation_tail": report.truncation_tail,
        "delta_values": [{"k": k, "delta": d} for k, d in report.delta_values],
        "f_coeffs": report.f_coeffs.values.tolist(),
        "v0_coeffs": [m.V0 for m in report.modes],
    }


# ----------------------------------------------------------------------------
# 비적정성 목록 (Δ_k = 0 이 되는 p)
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    k: int
    n: int
    branch: str  # "arcsin" | "pi-minus"
    p_value: float
    delta: float


@dataclass
class IllposednessCatalog:
    entries: List[CatalogEntry]
    gamma: List[float]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([e.__dict__ for e in self.entries], columns=["k", "n", "branch", "p_value", "delta"])


def _newton_phase(e_q: float, lam: float, p: float) -> float:
    amp = math.sqrt(lam + 1.0)
    gamma = math.asin(1.0 / amp)
    w = math.sqrt(lam)
    value = e_q - amp * math.sin(w * p + gamma)
    slope = -amp * w * math.cos(w * p + gamma)
    return p - value / slope if slope != 0 else p


def illposed_p_catalog(sys: EigenSystem, alpha: float, q: float, k_max: int, n_max: int) -> IllposednessCatalog:
    """문제 1 에서 Δ_k(p) = 0 이 되는 p 목록 (k <= k_max, n = 1..n_max, 두 분기)"""
    if k_max < 1 or n_max < 1:
        raise InputError(f"k_max, n_max 는 1 이상이어야 합니다: k_max={k_max}, n_max={n_max}")
    if k_max > sys.n_modes:
        raise InputError(f"k_max={k_max} 가 모드 수 {sys.n_modes} 보다 큽니다")

    entries: List[CatalogEntry] = []
    gammas: List[float] = []
    for k in range(1, k_max + 1):
        lam = float(sys.eigenvalues[k - 1])
        amp = math.sqrt(lam + 1.0)
        w = math.sqrt(lam)
        gamma = math.asin(1.0 / amp)
        gammas.append(gamma)
        e_q = _e(alpha, 1.0, -lam * q ** alpha)
        a = math.asin(e_q / amp)
        for n in range(1, n_max + 1):
            for branch, phase in (("arcsin", a - gamma), ("pi-minus", math.pi - a - gamma)):
                p0 = (phase + 2 * n * math.pi) / w
                if p0 <= 0:
                    continue
                p = _newton_phase(e_q, lam, p0)
                d = delta_problem1(alpha, lam, p, q)
                if abs(d) > Config.CATALOG_TOL:
                    logger.warning(f"목록 후보 제외: k={k}, n={n}, {branch}, p={p:.12g}, |Δ|={abs(d):.3e}")
                    continue
                entries.append(CatalogEntry(k=k, n=n, branch=branch, p_value=p, delta=d))
    entries.sort(key=lambda e: e.p_value)
    logger.info(f"비적정 p 목록: {len(entries)}개 (k <= {k_max}, n <= {n_max})")
    return IllposednessCatalog(entries=entries, gamma=gammas)


def null_mode(sys: EigenSystem, alpha: float, q: float, k: int, p: float) -> ModeSolution:
    """V_k(0) = 1, f_k = -λ E_q / (1 - E_q) 인 동차 해 모드"""
    lam = float(sys.eigenvalues[k - 1])
    d = delta_problem1(alpha, lam, p, q)
    if abs(d) > Config.NULL_TOL:
        raise NotIllPosed(f"|Δ_{k}(p={p})| = {abs(d):.3e} > {Config.NULL_TOL:g}")
    e_q = _e(alpha, 1.0, -lam * q ** alpha)
    f_k = -lam * e_q / (1.0 - e_q)
    spec = ProblemSpec(alpha=alpha, beta=2.0, p=p, q=q)
    return mode_from_source(k, lam, f_k, 1.0, spec, delta=d)


def null_solution(sys: EigenSystem, alpha: float, q: float, k: int, p: float,
                  grid_t: Optional[np.ndarray] = None) -> SolutionField:
    """비유일성 증거: φ = ψ = 0 인데 0 이 아닌 해 u = m(t) ω_k(x)"""
    mode = null_mode(sys, alpha, q, k, p)
    spec = ProblemSpec(alpha=alpha, beta=2.0, p=p, q=q)
    grid_t = time_grid(p, q) if grid_t is None else grid_t
    logger.info(f"동차 해 구성: k={k}, p={p:.12g}, f_k={mode.f_k:.6g}")
    return assemble_field(sys, [mode], spec, grid_t)


# ----------------------------------------------------------------------------
# 보조정리 점검
# ----------------------------------------------------------------------------

def rational_p_probe(eigenvalues: Sequence[float], alpha: float, p: float, q: float,
                     burn_in: int = 1) -> dict:
    """유리수 p 에서 min_k |Δ_k| 하한 점검"""
    frac = Fraction(p).limit_denominator(10_000)
    lams = np.asarray(eigenvalues, dtype=float)
    abs_d = np.abs([delta_problem1(alpha, lam, p, q) for lam in lams])
    if not (1 <= burn_in <= lams.size):
        raise InputError(f"burn_in 은 1..{lams.size} 범위여야 합니다: {burn_in}")
    delta_hat = float(abs_d[burn_in - 1:].min())
    return {
        "mode": "rational_p",
        "p": p,
        "p_fraction": f"{frac.numerator}/{frac.denominator}",
        "is_rational": abs(float(frac) - p) <= 1e-12 * max(1.0, p),
        "k_range": [1, int(lams.size)],
        "min_abs_delta": float(abs_d.min()),
        "argmin_k": int(abs_d.argmin()) + 1,
        "burn_in": burn_in,
        "delta_hat": delta_hat,
        "holds": delta_hat > Config.DELTA_FLOOR,
        "abs_delta": abs_d.tolist(),
    }


def large_q_probe(eigenvalues: Sequence[float], alpha: float, beta: float, p: float,
                  q_ladder: Sequence[float]) -> dict:
    """q 를 키울 때 min_k |Δ̃_k| 가 q 와 무관한 양의 하한을 갖는지 점검"""
    lams = np.asarray(eigenvalues, dtype=float)
    brackets = np.array([wave_bracket(beta, lam, p) for lam in lams])
    c_hat = float(np.abs(brackets).min())
    limit = 1.0 / (p ** (beta - 1.0) * special.gamma(2.0 - beta))

    rows = []
    for q in q_ladder:
        deltas = np.array([_e(alpha, 1.0, -lam * q ** alpha) for lam in lams]) - brackets
        e_first = _e(alpha, 1.0, -lams[0] * q ** alpha)
        min_abs = float(np.abs(deltas).min())
        rows.append({
            "q": float(q),
            "min_abs_delta": min_abs,
            "argmin_k": int(np.abs(deltas).argmin()) + 1,
            "e_first": e_first,
            "bracket_gap": float(np.max(np.abs(np.abs(deltas) - np.abs(brackets)))),
            "above_threshold": e_first < c_hat / 2.0,
            "bounded": min_abs >= c_hat / 2.0,
        })
    q0 = next((r["q"] for r in rows if r["above_threshold"]), None)
    holds = q0 is not None and all(r["bounded"] for r in rows if r["q"] >= q0)
    return {
        "mode": "large_q",
        "p": p,
        "beta": beta,
        "c_hat": c_hat,
        "limit": float(limit),
        "bracket_last": float(brackets[-1]),
        "limit_rel_error": float(abs(brackets[-1] - limit) / limit),
        "q0": q0,
        "holds": holds,
        "ladder": rows,
    }


def lemma_probe(mode: str, **params) -> dict:
    if mode == "rational_p":
        return rational_p_probe(**params)
    if mode == "large_q":
        return large_q_probe(**params)
    raise InputError(f"알 수 없는 probe 종류: {mode!r} (rational_p | large_q)")


def stability_probe(sys: EigenSystem, spec: ProblemSpec, noise_levels: Sequence[float], n_trials: int,
                    seed: int = 0, delta_floor: float = Config.DELTA_FLOOR) -> dict:
    """잡음 섞인 (φ, ψ) 로 재구성했을 때 ‖δf‖ / (‖δφ‖_H + ‖δψ‖_H) 비율

    잡음은 분해된 모드에만, λ_k^{-2} 가중 (H⁴ 정칙성 모사).
    수준마다 seed 에서 갈라낸 독립 난수열을 씁니다 (SeedSequence.spawn).
    spread 는 수준 간 최대 비율의 편차, 수준 안 편차는 within_spread 로 따로 보고합니다.
    """
    if spec.phi is None or spec.psi is None:
        raise InputError("안정성 점검에는 phi, psi 가 필요합니다")
    lams = sys.eigenvalues
    phi_k = project(sys, spec.phi).values
    psi_k = project(sys, spec.psi).values
    deltas = np.array([delta_for(spec, lam) for lam in lams])
    base = source_coefficients(lams, phi_k, psi_k, spec, delta_floor, deltas=deltas)
    if base.aborting:
        raise IllPosedMode(base.aborting, {k: float(deltas[k - 1]) for k in base.flagged})

    weight = (lams[0] / lams) ** 2

    def h_norm(c: np.ndarray) -> float:
        return float(np.sqrt(np.sum(lams ** 2 * c ** 2)))

    levels = []
    streams = np.random.SeedSequence(seed).spawn(len(noise_levels))
    for level, stream in zip(noise_levels, streams):
        rng = np.random.default_rng(stream)
        ratios = []
        for _ in range(n_trials):
            d_phi = level * weight * rng.standard_normal(lams.size)
            d_psi = level * weight * rng.standard_normal(lams.size)
            noisy = source_coefficients(lams, phi_k + d_phi, psi_k + d_psi, spec, delta_floor,
                                        deltas=deltas, quiet=True)
            d_f = noisy.f_k - base.f_k
            denom = h_norm(d_phi) + h_norm(d_psi)
            ratios.append(float(np.sqrt(np.sum(d_f ** 2)) / denom) if denom > 0 else 0.0)
        ratios = np.asarray(ratios)
        r_min = float(ratios.min()) if ratios.size else 0.0
        r_max = float(ratios.max()) if ratios.size else 0.0
        levels.append({
            "noise": float(level),
            "ratio_min": r_min,
            "ratio_max": r_max,
            "ratio_mean": float(ratios.mean()) if ratios.size else 0.0,
            "within_spread": r_max / r_min if r_min > 0 else 1.0,
        })
    maxima = [lv["ratio_max"] for lv in levels if lv["ratio_max"] > 0]
    spread = max(maxima) / min(maxima) if maxima else 1.0
    logger.info(f"안정성 점검: 최대 비율 {max(maxima, default=0.0):.4g}, 수준 간 편차 {spread:.4g}")
    return {
        "mode": "stability",
        "beta": spec.beta,
        "p": spec.p,
        "q": spec.q,
        "seed": seed,
        "n_trials": n_trials,
        "min_abs_delta": float(np.abs(deltas).min()),
        "levels": levels,
        "ratio_max": max(maxima, default=0.0),
        "spread": spread,
        "bounded": spread <= 2.0,
    }
