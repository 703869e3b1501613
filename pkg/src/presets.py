"""
이름 붙은 함수 프리셋과 함수 해석기

설정 파일의 함수 항목(φ, ψ, f, 초기값, r, e, g)은 다음 세 가지 중 하나입니다.
    1. 프리셋 이름      : "sine1", "zero", "bump", ...
    2. sympy 식 (변수 x): "sqrt(2)*sin(pi*x)", "x*(1-x)"
    3. CSV 경로         : "data/phi.csv"  (첫 두 열 = x, 값)
"""
import logging
from pathlib import Path
from typing import Callable, Dict, Tuple

import numpy as np
import pandas as pd
import sympy
from scipy.interpolate import CubicSpline

from src.errors import InputError

logger = logging.getLogger(__name__)

Function = Callable[[np.ndarray], np.ndarray]

_X = sympy.Symbol("x", real=True)

# ----- 데이터 함수 프리셋 ([0, 1] 에서 양 끝이 0) -----
DATA_PRESETS: Dict[str, str] = {
    "zero": "0",
    "sine1": "sqrt(2)*sin(pi*x)",
    "sine2": "sqrt(2)*sin(2*pi*x)",
    "sine3": "sqrt(2)*sin(3*pi*x)",
    "bump": "x*(1 - x)",
    "h4": "x**4*(1 - x)**4",
    "h4-shifted": "x**4*(1 - x)**4*(1 + x)",
}

# ----- 정규형 포텐셜 프리셋 -----
POTENTIAL_PRESETS: Dict[str, str] = {
    "zero-potential": "0",
    "linear": "x",
    "sine-bump": "sin(3*pi*x) + 1",
}


def _broadcast(fn: Callable) -> Function:
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        return np.asarray(fn(x), dtype=float) * np.ones_like(x)

    return wrapped


def parse_expression(expr: str) -> sympy.Expr:
    try:
        parsed = sympy.sympify(expr, locals={"x": _X})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise InputError(f"식을 해석할 수 없습니다: {expr!r} ({exc})") from exc
    extra = parsed.free_symbols - {_X}
    if extra:
        raise InputError(f"식에 x 외의 변수가 있습니다: {expr!r} -> {sorted(map(str, extra))}")
    return parsed


def function_from_expression(expr: str) -> Function:
    """sympy 식 문자열을 numpy 벡터 함수로 변환"""
    return _broadcast(sympy.lambdify(_X, parse_expression(expr), modules="numpy"))


def sympy_derivatives(expr: str) -> Tuple[Function, Function]:
    """식의 1계, 2계 도함수"""
    parsed = parse_expression(expr)
    first = sympy.diff(parsed, _X)
    second = sympy.diff(first, _X)
    return (
        _broadcast(sympy.lambdify(_X, first, modules="numpy")),
        _broadcast(sympy.lambdify(_X, second, modules="numpy")),
    )


def function_from_csv(path: str) -> Function:
    """(x, 값) CSV 샘플을 3차 스플라인 함수로 변환"""
    if not Path(path).exists():
        raise InputError(f"파일이 없습니다: {path}")
    df = pd.read_csv(path)
    if df.shape[1] < 2:
        raise InputError(f"CSV 는 (x, value) 두 열이 필요합니다: {path}")
    x = df.iloc[:, 0].to_numpy(dtype=float)
    v = df.iloc[:, 1].to_numpy(dtype=float)
    order = np.argsort(x)
    return _broadcast(CubicSpline(x[order], v[order]))


def resolve_function(spec: str) -> Function:
    """프리셋 이름 / sympy 식 / CSV 경로 를 함수로 해석"""
    if spec in DATA_PRESETS:
        return function_from_expression(DATA_PRESETS[spec])
    if spec.lower().endswith(".csv"):
        logger.debug(f"CSV 함수 로드: {spec}")
        return function_from_csv(spec)
    return function_from_expression(spec)


def resolve_potential(name: str) -> Function:
    """포텐셜 프리셋 이름 ("zero-potential", "constant:c", ...) 을 함수로 해석"""
    if name in POTENTIAL_PRESETS:
        return function_from_expression(POTENTIAL_PRESETS[name])
    if name.startswith("constant:"):
        try:
            c = float(name.split(":", 1)[1])
        except ValueError as exc:
            raise InputError(f"상수 포텐셜 형식은 constant:<실수> 입니다: {name!r}") from exc
        return _broadcast(lambda x: np.full_like(x, c))
    raise InputError(f"알 수 없는 포텐셜 프리셋: {name!r} (가능: {sorted(POTENTIAL_PRESETS)} 또는 constant:c)")
