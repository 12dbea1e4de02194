import csv
import io
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
import yaml

from normrays import cli

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = Path(__file__).parent / "golden"
DEMO = ROOT / "configs" / "theorem1_demo.yaml"


def _close(a, b, tol=1e-9):
    """Structural equality with a numeric tolerance."""
    if isinstance(a, dict):
        return isinstance(b, dict) and a.keys() == b.keys() and all(_close(a[k], b[k], tol) for k in a)
    if isinstance(a, list):
        return isinstance(b, list) and len(a) == len(b) and all(_close(x, y, tol) for x, y in zip(a, b))
    if isinstance(a, float) and isinstance(b, (int, float)):
        return abs(a - b) <= tol * max(1.0, abs(a))
    return a == b


def test_default_config_valid():
    cfg = cli.ExperimentConfig()
    cfg.validate()
    back = cli.ExperimentConfig.from_dict(cfg.to_dict())
    assert back.to_dict() == cfg.to_dict()
    assert math.isinf(back.p_list[-1])


@pytest.mark.parametrize("patch", [
    {"schema_version": 2},
    {"bogus": 1},
    {"kmin": 0},
    {"kmin": 9, "kmax": 4},
    {"t_grid": [0, 1]},
    {"p": [0.5]},
    {"filtrations": {"F1": {"kind": "profile", "name": "linear"}}},
    {"filtrations": {"F1": {"kind": "profile", "name": "nope"}, "F2": {"kind": "profile", "name": "trivial"}}},
    {"filtrations": {"F1": {"kind": "table", "weights": {2: [0, 1]}}, "F2": {"kind": "profile", "name": "trivial"}}},
    {"metric": {"kind": "bergman"}},
    {"expected": "something"},
])
def test_config_rejects(patch):
    data = cli.ExperimentConfig().to_dict()
    data.update(patch)
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.from_dict(data)


def test_config_rejects_non_mapping():
    with pytest.raises(cli.ConfigError):
        cli.ExperimentConfig.from_dict([1, 2])


def test_demo_config_loads():
    cfg = cli.ExperimentConfig.load(DEMO)
    assert cfg.kmax == 8 and cfg.p_list == [1.0, 2.0, 4.0, math.inf]


def test_table_filtration_config():
    data = cli.ExperimentConfig().to_dict()
    data.update(kmax=3, kmin=1, filtrations={
        "F1": {"kind": "table", "weights": {1: [0, 1], 2: [0, 1, 2], 3: [0, 1, 2, 3]}},
        "F2": {"kind": "profile", "name": "trivial"},
    }, t_grid=[5.0], expected=None)
    cfg = cli.ExperimentConfig.from_dict(data)
    rep = cli.run_theorem1(cfg)
    alg = [r for r in rep.tables["algebraic"] if r["p"] == "1"]
    assert [r["value"] for r in alg] == pytest.approx([0.5, 0.5, 0.5])


def test_csv_header_contract():
    rows = [{"p": "2", "k": 3, "value": 0.25}, {"p": "2", "k": 4, "value": 1 / 3}]
    text = cli.table_to_csv(rows)
    lines = text.splitlines()
    assert lines[0] == "p,k,value"
    # floats are written with repr so they round-trip exactly
    assert float(lines[2].split(",")[2]) == 1 / 3
    assert cli.table_to_csv([]) == ""


def test_json_round_trip(tmp_path):
    rep = cli.Report("demo", tables={"t": [{"x": 1.0, "y": math.inf}]}, meta={"a": np.float64(0.5)})
    rep.check("small", 0.1, 0.2)
    rep.check("big", 1.0, 0.5, kind="ge")
    paths = cli.emit(rep, tmp_path, "json")
    data = json.loads(paths[0].read_text())
    assert data["passed"] is True
    assert data["tables"]["t"][0]["y"] == "inf"
    assert data["checks"][0]["margin"] == pytest.approx(0.1)
    assert json.loads(cli.to_json(rep)) == data


def test_failed_check_and_nan():
    rep = cli.Report("demo")
    rep.check("nan", float("nan"), 1.0)
    assert not rep.passed
    assert rep.checks[0]["value"] == "nan"


def test_emit_formats(tmp_path):
    rep = cli.Report("r", tables={"a": [{"k": 1}], "b": [{"k": 2}]})
    names = sorted(p.name for p in cli.emit(rep, tmp_path, "csv"))
    assert names == ["r_a.csv", "r_b.csv"]
    assert len(cli.emit(rep, tmp_path / "both")) == 3
    with pytest.raises(ValueError):
        cli.emit(rep, tmp_path, "xml")


def test_theorem1_golden(tmp_path):
    assert cli.main(["theorem1", "--config", str(DEMO), "--out", str(tmp_path)]) == 0
    for gold in GOLDEN.iterdir():
        new = tmp_path / gold.name
        assert new.exists(), gold.name
        if gold.suffix == ".json":
            assert _close(json.loads(new.read_text()), json.loads(gold.read_text()))
        else:
            g_rows = list(csv.reader(io.StringIO(gold.read_text())))
            n_rows = list(csv.reader(io.StringIO(new.read_text())))
            assert n_rows[0] == g_rows[0]
            assert len(n_rows) == len(g_rows)
            for a, b in zip(n_rows[1:], g_rows[1:]):
                assert np.allclose([float(v) for v in a], [float(v) for v in b], rtol=1e-9, atol=1e-12)


def test_theorem1_deterministic(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["theorem1", "--config", str(DEMO), "--out", str(tmp_path / d)]) == 0
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_theorem1_same_filtration_is_zero():
    cfg = cli.ExperimentConfig(kmax=6, t_grid=[2.0, 10.0], expected=None,
                               filtrations={"F1": {"kind": "profile", "name": "tent"},
                                            "F2": {"kind": "profile", "name": "tent"}})
    rep = cli.run_theorem1(cfg)
    for rows in rep.tables.values():
        assert all(abs(r["value"]) <= 1e-9 for r in rows)


def test_theorem1_linear_vs_reversed():
    cfg = cli.ExperimentConfig(kmax=24, filtrations={"F1": {"kind": "profile", "name": "linear"},
                                                     "F2": {"kind": "profile", "name": "reversed"}})
    assert cli.run_theorem1(cfg).passed


def test_theorem1_flags_failure():
    # a wrong expectation must fail, not be averaged away
    cfg = cli.ExperimentConfig(kmax=6, tolerance=0.05,
                               filtrations={"F1": {"kind": "profile", "name": "tent"},
                                            "F2": {"kind": "profile", "name": "trivial"}})
    rep = cli.run_theorem1(cfg)
    assert not rep.passed
    failed = {c["check"] for c in rep.checks if not c["passed"]}
    assert any("expected" in name for name in failed)


def test_unwritable_output_exit_code():
    assert cli.main(["suite", "empty", "--out", "/dev/null/x"]) == 2


def test_suite_determinism():
    a = cli.to_json(cli.run_suite("hermlab-metrics", seed=1))
    b = cli.to_json(cli.run_suite("hermlab-metrics", seed=1))
    assert a == b


def test_empty_suite(tmp_path, capsys):
    assert cli.main(["suite", "empty", "--out", str(tmp_path)]) == 0
    assert "PASS" in capsys.readouterr().out
    assert json.loads((tmp_path / "suite_empty.json").read_text())["checks"] == []


@pytest.mark.parametrize("verb", sorted(cli.VERB_SUITES))
def test_verbs_pass(verb, tmp_path):
    assert cli.main([verb, "--seed", "1", "--kmax", "6", "--out", str(tmp_path)]) == 0


def test_bad_config_exit_code(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text(yaml.safe_dump({"schema_version": 1, "kmax": 0}))
    assert cli.main(["theorem1", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert cli.main(["theorem1", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path)]) == 2


def test_overrides(tmp_path):
    assert cli.main(["theorem1", "--kmax", "6", "--tmax", "30", "--p", "1,inf", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "theorem1.json").read_text())
    cfg = data["meta"]["config"]
    assert cfg["kmax"] == 6 and cfg["p"] == ["1", "inf"] and cfg["t_grid"][-1] == 30.0


def test_smoke_pipeline_timing(tmp_path):
    start = time.perf_counter()
    assert cli.main(["theorem1", "--kmax", "8", "--out", str(tmp_path)]) == 0
    for name in sorted(cli.SUITES):
        cli.run_suite(name, seed=0, kmax=8)
    assert time.perf_counter() - start < 60.0
