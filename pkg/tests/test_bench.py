from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import jsonschema
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posgraph.bench import Manifest, power_law_fit, run_bench
from posgraph.cli import main
from posgraph.runner import ConfigError

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def test_fit_recovers_exponent():
    xs = [16, 32, 64, 128, 256]
    fit = power_law_fit(xs, [2 * x ** 3 for x in xs])
    assert fit.b == pytest.approx(3.0, abs=1e-6)
    assert fit.a == pytest.approx(2.0, rel=1e-6)
    assert fit(10) == pytest.approx(2000, rel=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 100), st.floats(-2, 4),
       st.lists(st.integers(1, 10_000), min_size=2, max_size=8, unique=True))
def test_fit_exact_on_power_laws(a, b, xs):
    fit = power_law_fit(xs, [a * x ** b for x in xs])
    assert fit.b == pytest.approx(b, abs=1e-6)
    assert math.log(fit.a) == pytest.approx(math.log(a), abs=1e-5)


def test_fit_needs_two_sizes():
    assert power_law_fit([16, 16], [1.0, 2.0]) is None
    assert power_law_fit([16], [1.0]) is None
    assert power_law_fit([], []) is None


def test_single_run_omits_fit(tmp_path):
    m = Manifest.from_dict({"routers": ["lightshaw"], "pairs": [["QFT_8", "grid:2x2:3"]]})
    summary = run_bench(m, tmp_path)
    assert summary["fits"] == {"lightshaw": None}
    jsonschema.validate(summary, schema("bench_summary"))


def test_partial_failures_are_rows(tmp_path):
    data = {
        "routers": ["lightshaw", "shaw"],
        "pairs": [["QFT_8", "grid:2x2:3"], ["QFT_16", "grid:2x2:4"], ["QFT_8", "coupling:line:8"]],
        "repetitions": 2,
    }
    jsonschema.validate(data, schema("bench_manifest"))
    summary = run_bench(Manifest.from_dict(data), tmp_path, jobs=2)
    assert summary["runs"] == 12 and summary["failures"] == 4
    rows = list(csv.DictReader((tmp_path / "aggregate.csv").open()))
    assert len(rows) == 6
    bad = [r for r in rows if r["status"] != "ok"]
    assert {r["status"] for r in bad} == {"infeasible"}
    assert all(r["arch"] == "coupling:line:8" for r in bad)
    assert len(list((tmp_path / "runs").glob("*.json"))) == 12
    for f in (tmp_path / "runs").glob("*.json"):
        jsonschema.validate(json.loads(f.read_text()), schema("run_report"))
    fit = summary["fits"]["lightshaw"]
    assert fit is not None and fit["points"] == 2


def test_manifest_validation():
    for bad in ({}, {"routers": ["x"], "pairs": [["QFT_8", "grid:1x1:2"]]},
                {"routers": ["shaw"]}, {"routers": ["shaw"], "pairs": [["a", "b"]],
                                        "repetitions": 0},
                {"routers": ["shaw"], "pairs": [["a", "b"]], "durations": {"warp": 1}}):
        with pytest.raises(ConfigError):
            Manifest.from_dict(bad)
    m = Manifest.from_dict({"routers": ["shaw", "lightshaw"], "circuits": ["QFT_8", "QFT_16"],
                            "archs": ["grid:2x2:5"], "seeds": [0, 1]})
    assert len(m.runs()) == 8


def test_bench_cli(tmp_path, capsys):
    f = tmp_path / "m.json"
    f.write_text(json.dumps({"routers": ["lightshaw"],
                             "pairs": [["QFT_8", "grid:2x2:3"], ["QFT_12", "grid:2x2:4"]]}))
    assert main(["bench", str(f), "--out", str(tmp_path / "o")]) == 0
    assert "lightshaw: t =" in capsys.readouterr().out
    assert main(["bench", str(tmp_path / "nope.json")]) == 2
