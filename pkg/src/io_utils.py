"""
결과 파일 저장 유틸리티

- JSON: UTF-8, indent=2, 키는 삽입 순서 그대로, 유한 실수는 17 유효숫자 (%.17g, 소수점 유지)
- CSV : 헤더 포함, 쉼표 구분, LF 줄바꿈, 실수 17 유효숫자
"""
import json
import math
import os
import re
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

# 실수를 17 유효숫자로 쓰기 위한 자리표시 문자열
_FLOAT_TAG = "\u0000f17:"
_FLOAT_RE = re.compile(r'"\\u0000f17:([^"]*)"')


def _float17(x: float) -> str:
    text = format(x, ".17g")
    if "." not in text and "e" not in text:
        text += ".0"
    return _FLOAT_TAG + text


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return _float17(value) if math.isfinite(value) else value
    return obj


def save_json(data: Any, path: os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(data), ensure_ascii=False, indent=2, allow_nan=True)
    text = _FLOAT_RE.sub(r"\1", text)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text + "\n")
    print(f"[INFO] 결과가 {path} 에 저장되었습니다")
    return path


def save_csv(df: pd.DataFrame, path: os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    print(f"[INFO] 결과가 {path} 에 저장되었습니다")
    return path


def load_json(path: os.PathLike) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
