#!/usr/bin/env python3
"""
배치 실행기(main.py) 테스트

설정 JSON 을 임시 디렉토리에 쓰고 click CliRunner 로 실행합니다.
격자는 작게 (n_grid=257, n_modes=16) 잡습니다.
"""
import json
import math

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from src.cli import main, run
from src.inverse import illposed_p_catalog
from src.presets import resolve_potential
from src.run_config import RunConfig, load_run_config
from src.spectral import solve_eigensystem

SMALL = {"n_grid": 257, "n_modes": 16, "n_t": 11}


def _write(tmp_path, name: str, doc: dict):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def _invoke(config_path, out_dir, *extra):
    runner = CliRunner()
    return runner.invoke(main, ["--config", str(config_path), "--output", str(out_dir), *extra])


def _p_star(q: float) -> float:
    sys = solve_eigensystem(resolve_potential("zero-potential"), SMALL["n_modes"], SMALL["n_grid"])
    return illposed_p_catalog(sys, 0.5, q, 1, 1).entries[0].p_value


def test_invert_sine(tmp_path):
    """φ = ψ = √2 sin πx → f = π² √2 sin πx"""
    config = _write(tmp_path, "invert", {
        "command": "invert",
        "orders": {"alpha": 0.5, "beta": 2.0},
        "times": {"p": 1.0, "q": 0.5},
        "data": {"phi": "sine1", "psi": "sine1"},
        "numerics": SMALL,
    })
    out = tmp_path / "out"
    result = _invoke(config, out)
    assert result.exit_code == 0, result.output
    f = pd.read_csv(out / "f.csv")
    expected = math.pi ** 2 * np.sqrt(2.0) * np.sin(np.pi * f["x"])
    assert np.max(np.abs(f["f"] - expected)) <= 1e-6
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["flagged_modes"] == []
    assert (out / "u.csv").exists()
    assert (out / "config.effective.json").exists()


def test_output_is_deterministic(tmp_path):
    config = _write(tmp_path, "invert", {
        "command": "invert",
        "orders": {"alpha": 0.5, "beta": 1.5},
        "times": {"p": 1.0, "q": 2.0},
        "data": {"phi": "bump", "psi": "h4"},
        "numerics": SMALL,
    })
    assert _invoke(config, tmp_path / "a").exit_code == 0
    assert _invoke(config, tmp_path / "b", "--threads", "2").exit_code == 0
    first = (tmp_path / "a" / "report.json").read_bytes()
    second = (tmp_path / "b" / "report.json").read_bytes()
    assert first == second


def test_catalog(tmp_path):
    config = _write(tmp_path, "catalog", {
        "command": "catalog",
        "orders": {"alpha": 0.5},
        "times": {"q": 1.0},
        "catalog": {"k_max": 3, "n_max": 2},
        "numerics": SMALL,
    })
    out = tmp_path / "out"
    assert _invoke(config, out).exit_code == 0
    table = pd.read_csv(out / "catalog.csv")
    assert len(table) == 12
    assert (table["delta"].abs() <= 1e-8).all()
    assert list(table["p_value"]) == sorted(table["p_value"])


def test_roundtrip_problem2(tmp_path):
    config = _write(tmp_path, "roundtrip", {
        "command": "roundtrip",
        "orders": {"alpha": 0.5, "beta": 1.5},
        "times": {"p": 1.0, "q": 5.0},
        "data": {
            "source_coeffs": [1.0, -0.5, 0.25, 0.125, -0.0625],
            "initial_coeffs": [0.2, 0.1, 0.0, -0.05, 0.02],
        },
        "numerics": SMALL,
    })
    out = tmp_path / "out"
    result = _invoke(config, out)
    assert result.exit_code == 0, result.output
    assert "relative f error" in result.stdout
    summary = json.loads((out / "roundtrip.json").read_text(encoding="utf-8"))["summary"]
    assert summary["relative_f_error"] <= 1e-6
    assert summary["trace_q"] <= 1e-8


def test_illposed_exit_code(tmp_path):
    """목록의 p 에서 invert 는 종료 코드 2 와 진단 파일을 남긴다"""
    config = _write(tmp_path, "illposed", {
        "command": "invert",
        "orders": {"alpha": 0.5, "beta": 2.0},
        "times": {"p": _p_star(1.0), "q": 1.0},
        "data": {"phi": "sine1", "psi": "zero"},
        "numerics": SMALL,
    })
    out = tmp_path / "out"
    result = _invoke(config, out)
    assert result.exit_code == 2
    assert "error: IllPosedMode" in result.stderr
    flagged = json.loads((out / "flagged.json").read_text(encoding="utf-8"))
    assert flagged["flagged_modes"] == [1]
    assert (out / "deltas.csv").exists()
    assert not (out / "report.json").exists()


def test_diagnose_flags_catalog_p(tmp_path):
    config = _write(tmp_path, "diagnose", {
        "command": "diagnose",
        "orders": {"alpha": 0.5, "beta": 2.0},
        "times": {"p": _p_star(1.0), "q": 1.0},
        "numerics": SMALL,
    })
    out = tmp_path / "out"
    assert _invoke(config, out).exit_code == 0
    flagged = json.loads((out / "flagged.json").read_text(encoding="utf-8"))
    assert flagged["flagged_modes"] == [1]


def test_input_errors(tmp_path):
    bad_order = _write(tmp_path, "bad", {"command": "invert", "orders": {"alpha": 1.5}})
    result = _invoke(bad_order, tmp_path / "out")
    assert result.exit_code == 1
    assert "error: ValidationError" in result.stderr

    unknown_key = _write(tmp_path, "unknown", {"command": "eigs", "colour": "blue"})
    assert _invoke(unknown_key, tmp_path / "out").exit_code == 1

    assert _invoke(tmp_path / "missing.json", tmp_path / "out").exit_code == 1

    no_data = _write(tmp_path, "nodata", {"command": "invert", "numerics": SMALL})
    result = _invoke(no_data, tmp_path / "out")
    assert result.exit_code == 1
    assert "error: InputError" in result.stderr


def test_mlf_table(tmp_path):
    config = _write(tmp_path, "mlf", {
        "command": "mlf-table",
        "mlf_table": {"alpha": 0.5, "beta": 1.0, "z_min": -20.0, "z_max": 0.0, "n": 11},
    })
    out = tmp_path / "out"
    assert _invoke(config, out).exit_code == 0
    table = pd.read_csv(out / "mlf_table.csv")
    assert list(table.columns) == ["z", "E"]
    assert len(table) == 11


def test_forward_and_eigs_variable_r(tmp_path):
    forward = _write(tmp_path, "forward", {
        "command": "forward",
        "orders": {"alpha": 0.5, "beta": 2.0},
        "times": {"p": 1.5, "q": 5.0},
        "data": {"source": "h4"},
        "numerics": SMALL,
    })
    out = tmp_path / "forward"
    assert _invoke(forward, out).exit_code == 0
    for name in ("u.csv", "phi.csv", "psi.csv", "modes.csv"):
        assert (out / name).exists()

    eigs = _write(tmp_path, "eigs", {
        "command": "eigs",
        "operator": {"r": "1 + x/2", "e": "1", "a": 0.0, "b": 2.0},
        "numerics": SMALL,
    })
    out = tmp_path / "eigs"
    assert _invoke(eigs, out).exit_code == 0
    lams = pd.read_csv(out / "eigenvalues.csv")["lambda"].to_numpy()
    assert lams.size == 16
    assert np.all(lams > 0) and np.all(np.diff(lams) > 0)


def test_invert_with_saved_eigensystem(tmp_path):
    """eigs 가 저장한 고유계 JSON 을 다시 읽어도 invert 결과는 바이트 단위로 같다"""
    eigs = _write(tmp_path, "eigs", {"command": "eigs", "numerics": SMALL})
    assert _invoke(eigs, tmp_path / "eigs").exit_code == 0
    cache = tmp_path / "eigs" / "eigensystem.json"

    invert = {
        "command": "invert",
        "orders": {"alpha": 0.5, "beta": 1.5},
        "times": {"p": 1.0, "q": 2.0},
        "data": {"phi": "bump", "psi": "h4"},
        "numerics": SMALL,
    }
    fresh = _write(tmp_path, "fresh", invert)
    cached = _write(tmp_path, "cached", {**invert, "operator": {"eigensystem_json": "eigs/eigensystem.json"}})
    assert _invoke(fresh, tmp_path / "a").exit_code == 0
    result = _invoke(cached, tmp_path / "b")
    assert result.exit_code == 0, result.output
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
    assert (tmp_path / "a" / "f.csv").read_bytes() == (tmp_path / "b" / "f.csv").read_bytes()

    missing = _write(tmp_path, "missing", {**invert, "operator": {"eigensystem_json": "nope.json"}})
    result = _invoke(missing, tmp_path / "c")
    assert result.exit_code == 1
    assert "error: InputError" in result.stderr

    both = _write(tmp_path, "both", {**invert, "operator": {"preset": "linear", "eigensystem_json": str(cache)}})
    assert _invoke(both, tmp_path / "d").exit_code == 1


def test_probe_rational_p(tmp_path):
    config = _write(tmp_path, "probe", {
        "command": "probe",
        "orders": {"alpha": 1.0, "beta": 2.0},
        "times": {"p": 1.0, "q": 1.0},
        "probe": {"kind": "rational_p", "k_max": 50},
        "numerics": SMALL,
    })
    out = tmp_path / "out"
    assert _invoke(config, out).exit_code == 0
    probe = json.loads((out / "probe.json").read_text(encoding="utf-8"))
    assert probe["holds"]
    assert len(probe["abs_delta"]) == 50


def test_run_with_config_object(tmp_path):
    """run() 에 RunConfig 를 직접 넘겨도 같은 결과"""
    path = _write(tmp_path, "diagnose", {
        "command": "diagnose",
        "times": {"p": 1.0, "q": 1.0},
        "numerics": SMALL,
        "output_dir": str(tmp_path / "out"),
    })
    config = load_run_config(str(path))
    assert isinstance(config, RunConfig)
    assert run(config) == 0
    table = pd.read_csv(tmp_path / "out" / "deltas.csv")
    assert len(table) == 16


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
