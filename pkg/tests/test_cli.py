import csv
import json
from pathlib import Path

import pytest

from emb3r4.cli import main, parse_region
from emb3r4.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _run(argv, tmp_path, fmt="jsonl"):
    out = tmp_path / "report.out"
    code = main(argv + ["--json", str(out), "--format", fmt])
    text = out.read_text()
    if fmt == "jsonl":
        return code, [json.loads(line) for line in text.splitlines()]
    if fmt == "json":
        return code, json.loads(text)
    return code, list(csv.reader(text.splitlines()))


def _check(name, tmp_path, *extra, fmt="jsonl"):
    return _run(["check", "--metric", str(CONFIGS / name), "--grid", "2", *extra], tmp_path, fmt)


def test_sphere_exits_zero(tmp_path):
    code, recs = _check("sphere.json", tmp_path)
    assert code == 0
    assert recs[0]["record"] == "header" and recs[-1]["record"] == "aggregate"
    assert all(r["schema_version"] == 1 for r in recs)
    assert sum(r["record"] == "point" for r in recs) == 8


def test_hyperbolic_exits_two(tmp_path):
    code, recs = _check("hyperbolic.json", tmp_path)
    assert code == 2
    assert recs[-1]["labels"] == {"NotEmbeddable(NegativeDetR)": 8}


def test_hyperbolic_in_hyperbolic_ambient_exits_zero(tmp_path):
    code, recs = _check("hyperbolic.json", tmp_path, "--ambient-c", "-1")
    assert code == 0
    assert all(r["verdict"]["status"] == "Embeddable" for r in recs if r["record"] == "point")


def test_perturbed_graph_is_not_embeddable(tmp_path):
    code, recs = _check("graph_perturbed.json", tmp_path)
    assert code == 2 and set(recs[-1]["labels"]) == {"NotEmbeddable(RivertzViolation)"}


def test_report_body_is_deterministic(tmp_path):
    _, a = _check("graph.json", tmp_path)
    _, b = _check("graph.json", tmp_path)
    assert a[1:] == b[1:]


def test_json_and_csv_formats(tmp_path):
    code, doc = _check("sphere.json", tmp_path, fmt="json")
    assert code == 0 and doc["header"]["command"] == "check" and len(doc["records"]) == 9
    _, rows = _check("sphere.json", tmp_path, fmt="csv-summary")
    assert rows[0] == ["record", "key", "value"]
    assert sum(r[0] == "point" for r in rows) == 8
    assert ["aggregate", "summary", "all_embeddable"] in rows


def test_region_override(tmp_path):
    code, recs = _check("sphere.json", tmp_path, "--region", "x1:0.5:0.6,x2:0.5:0.6,x3:0:0.1")
    pts = [r["point"] for r in recs if r["record"] == "point"]
    assert code == 0 and min(p[0] for p in pts) == 0.5 and max(p[0] for p in pts) == 0.6


def test_parse_region_errors():
    assert parse_region("x1:0:1,x2:1:2,x3:2:3") == ([0, 1, 2], [1, 2, 3])
    with pytest.raises(ConfigError):
        parse_region("x1:0:1,x2:1:2")
    with pytest.raises(ConfigError):
        parse_region("x1:0:a,x2:1:2,x3:0:1")


def test_missing_and_malformed_config(tmp_path):
    code, recs = _run(["check", "--metric", str(tmp_path / "absent.json")], tmp_path)
    assert code == 1 and recs[-1]["record"] == "error"
    bad = tmp_path / "bad.json"
    bad.write_text('{"g": {"g11": "1",\n}}')
    code, recs = _run(["check", "--metric", str(bad)], tmp_path)
    assert code == 1 and "line 2" in recs[-1]["message"]


@pytest.mark.parametrize("name, expected", [("warped_type1.json", 0), ("warped_type2.json", 0)])
def test_warped_configs(tmp_path, name, expected):
    code, recs = _run(["warped", "--config", str(CONFIGS / name), "--grid", "2"], tmp_path)
    assert code == expected
    assert any(r["record"] == "point" for r in recs)


def test_lie_classify(tmp_path):
    code, recs = _run(["lie", "classify", "--a", "1", "--b", "0", "--c", "0", "--d", "1"], tmp_path)
    assert code == 2 and recs[1]["branch"] == "ad_bc0"
    code, recs = _run(["lie", "classify", "--a", "1", "--b", "1", "--c", "0", "--d", "0"], tmp_path)
    assert code in (2, 3) and not recs[1]["rivertz_ok"]


def test_lie_simple(tmp_path):
    code, recs = _run(["lie", "simple", "--l2", "3", "--l3", "3", "--mu1", "4"], tmp_path)
    assert recs[1]["R"] == [4, 0, 0, 4, 0, 0] and not recs[1]["gauss_solvable"]
    assert code == 3
    code, _ = _run(["lie", "simple", "--l2", "1", "--l3", "1"], tmp_path)
    assert code == 0


def test_lie_galpha(tmp_path):
    code, recs = _run(["lie", "galpha", "--alpha", "1/2"], tmp_path)
    assert code == 0 and recs[1]["passed"] and recs[1]["pullback_residual"] <= 1e-9


def test_verify_identities_only_and_self_test(tmp_path):
    code, recs = _run(["verify-identities", "--only", "wedge-determinant"], tmp_path)
    ids = [r for r in recs if r["record"] == "identity"]
    assert code == 0 and [r["identity_name"] for r in ids] == ["wedge-determinant"]
    assert "wall_time_ms" not in ids[0] and "wedge-determinant" in recs[0]["timings"]
    assert recs[-1]["record"] == "aggregate" and recs[-1]["passed"]
    code, recs = _run(["verify-identities", "--only", "wedge-determinant", "--self-test"], tmp_path)
    assert code == 1 and recs[1]["witness_monomial"]
    code, recs = _run(["verify-identities", "--only", "no-such-identity"], tmp_path)
    assert code == 1 and recs[-1]["record"] == "error"


def test_oracle_zero_trials_warns(tmp_path, caplog):
    code, recs = _run(["oracle", "--trials", "0"], tmp_path)
    assert code == 0 and "zero trials" in caplog.text


def test_oracle_small_run(tmp_path):
    code, recs = _run(["oracle", "--trials", "20", "--seed", "5"], tmp_path)
    assert code == 0
    assert {r["record"] for r in recs} == {"header", "oracle", "negative_symbolic"}
    assert "roundtrip_s" in recs[0]["timings"]
