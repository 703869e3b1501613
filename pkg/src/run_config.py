"""
실행 설정 (JSON 한 개) 스키마와 로더

예시:
    {
      "command": "invert",
      "operator": {"preset": "zero-potential"},
      "orders": {"alpha": 0.5, "beta": 2.0},
      "times": {"p": 1.0, "q": 0.5},
      "data": {"phi": "sine1", "psi": "sine1"}
    }
"""
import json
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config import Config
from src.errors import InputError

Command = Literal["eigs", "forward", "invert", "diagnose", "catalog", "probe", "roundtrip", "mlf-table"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class OperatorConfig(_Section):
    """연산자: preset | g 식 | g 샘플 | (r, e, a, b) 식 | (r_csv, e_csv) | 저장된 고유계 JSON 중 하나"""

    preset: Optional[str] = None
    g: Optional[str] = None
    g_samples: Optional[List[float]] = None
    r: Optional[str] = None
    e: Optional[str] = None
    a: float = 0.0
    b: float = 1.0
    r_csv: Optional[str] = None
    e_csv: Optional[str] = None
    eigensystem_json: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self):
        chosen = [
            name for name, present in (
                ("preset", self.preset is not None),
                ("g", self.g is not None),
                ("g_samples", self.g_samples is not None),
                ("r/e", self.r is not None or self.e is not None),
                ("r_csv/e_csv", self.r_csv is not None or self.e_csv is not None),
                ("eigensystem_json", self.eigensystem_json is not None),
            ) if present
        ]
        if len(chosen) > 1:
            raise ValueError(f"operator 는 한 가지 방식만 지정해야 합니다: {chosen}")
        if not chosen:
            self.preset = "zero-potential"
        if (self.r is None) != (self.e is None):
            raise ValueError("r 과 e 는 함께 지정해야 합니다")
        if (self.r_csv is None) != (self.e_csv is None):
            raise ValueError("r_csv 와 e_csv 는 함께 지정해야 합니다")
        return self

    @property
    def is_transformed(self) -> bool:
        return self.r is not None or self.r_csv is not None


class OrdersConfig(_Section):
    alpha: float = Field(0.5, gt=0.0, le=1.0)
    beta: float = Field(2.0, gt=1.0, le=2.0)


class TimesConfig(_Section):
    p: float = Field(1.0, gt=0.0)
    q: float = Field(1.0, gt=0.0)


class DataConfig(_Section):
    """함수 항목은 프리셋 이름, sympy 식(x), CSV 경로 중 하나"""

    phi: Optional[str] = None
    psi: Optional[str] = None
    source: Optional[str] = None
    initial: Optional[str] = None
    source_coeffs: Optional[List[float]] = None
    initial_coeffs: Optional[List[float]] = None


class NumericsConfig(_Section):
    n_grid: int = Field(Config.N_GRID, ge=Config.MIN_GRID)
    n_modes: int = Field(Config.N_MODES, ge=1)
    delta_floor: float = Field(Config.DELTA_FLOOR, gt=0.0)
    warn_floor: float = Field(Config.WARN_FLOOR, gt=0.0)
    t_min: float = Field(Config.T_MIN, gt=0.0)
    n_t: int = Field(Config.N_T, ge=3)


class CatalogConfig(_Section):
    k_max: int = Field(3, ge=1)
    n_max: int = Field(2, ge=1)


class ProbeConfig(_Section):
    kind: Literal["rational_p", "large_q", "stability"] = "stability"
    k_max: int = Field(200, ge=1)
    burn_in: int = Field(1, ge=1)
    q_ladder: List[float] = Field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0, 16.0])
    noise_levels: List[float] = Field(default_factory=lambda: [1e-6, 1e-3])
    trials: int = Field(100, ge=1)
    # 문제 1 의 목록 p 근처 (p* + offset) 에서 같은 점검을 한 번 더 실행
    contrast_offset: Optional[float] = None


class MlfTableConfig(_Section):
    alpha: float = Field(0.5, gt=0.0, lt=2.0)
    beta: float = 1.0
    z_min: float = -100.0
    z_max: float = Field(0.0, le=1.0)
    n: int = Field(201, ge=2)


class RunConfig(_Section):
    command: Command
    operator: OperatorConfig = Field(default_factory=OperatorConfig)
    orders: OrdersConfig = Field(default_factory=OrdersConfig)
    times: TimesConfig = Field(default_factory=TimesConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    catalog: CatalogConfig = Field(default_factory=CatalogConfig)
    probe: ProbeConfig = Field(default_factory=ProbeConfig)
    mlf_table: MlfTableConfig = Field(default_factory=MlfTableConfig)
    output_dir: str = Config.OUTPUT_DIR
    seed: int = Field(0, ge=0, lt=2 ** 64)
    threads: int = Field(Config.THREADS, ge=0)


def load_run_config(path: str) -> RunConfig:
    """JSON 설정 파일을 읽어 검증 (상대 CSV 경로는 설정 파일 기준)"""
    config_path = Path(path)
    if not config_path.exists():
        raise InputError(f"설정 파일이 없습니다: {path}")
    with open(config_path, "r", encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as exc:
            raise InputError(f"설정 파일 JSON 오류: {exc}") from exc
    config = RunConfig.model_validate(raw)
    _resolve_paths(config, config_path.parent)
    return config


def _resolve_paths(config: RunConfig, base: Path) -> None:
    def fix(value: Optional[str]) -> Optional[str]:
        if value is None or not value.lower().endswith((".csv", ".json")):
            return value
        candidate = Path(value)
        if not candidate.is_absolute() and not candidate.exists() and (base / candidate).exists():
            return str(base / candidate)
        return value

    for name in ("phi", "psi", "source", "initial"):
        setattr(config.data, name, fix(getattr(config.data, name)))
    config.operator.r_csv = fix(config.operator.r_csv)
    config.operator.e_csv = fix(config.operator.e_csv)
    config.operator.eigensystem_json = fix(config.operator.eigensystem_json)
