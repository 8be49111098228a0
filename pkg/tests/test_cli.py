import csv
import json

import pytest

from reactive_drift.cli import POPULATION_COLUMNS, SERIES_COLUMNS, SWEEP_COLUMNS, run


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_analytic(tmp_path, capsys):
    out = tmp_path / "a"
    assert run(["analytic", "--out", str(out), "--horizon", "5"]) == 0
    rep = json.loads((out / "analytic.json").read_text())
    assert rep["limit_opinion_fixed"] == pytest.approx(-0.0847457627, abs=1e-9)
    assert rep["expected_opinion_fixed"]["1"] == pytest.approx(-0.28)
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "analytic" and "analytic.json" in man["outputs"]
    assert read_csv(out / "analytic_curve.csv")[0] == ["k", "expected_opinion_fixed"]


def test_analytic_flags_degenerate_cases(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"gamma0": 0.0, "delta": 3.0}))
    assert run(["analytic", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "analytic.json").read_text())
    assert rep["deviation_reachable"] is False
    assert rep["limit_opinion_adaptive"] is None
    assert rep["adaptive_status"] == "coincides with fixed"
    assert rep["prop3"]["applicable"] is False
    assert rep["limit_opinion_fixed"] == -1.0


def test_require_prop3_exit_code(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"delta": 3.0}))
    code = run(["analytic", "--config", str(cfg), "--require-prop3", "--out", str(tmp_path)])
    assert code == 3


def test_simulate_schema(tmp_path):
    out = tmp_path / "s"
    assert run(["simulate", "--trials", "20", "--horizon", "8", "--out", str(out)]) == 0
    rows = read_csv(out / "simulate.csv")
    assert rows[0] == SERIES_COLUMNS
    assert len(rows) == 1 + 2 * 9
    assert rows[1][4] == "nan"


def test_enumerate(tmp_path, capsys):
    out = tmp_path / "e"
    assert run(["enumerate", "--horizon", "8", "--out", str(out)]) == 0
    summary = read_csv(out / "enumerate_summary.csv")
    assert float(summary[1][1]) <= 1e-12
    assert len(read_csv(out / "enumerate.csv")) == 1 + 2 * 9


def test_enumerate_cap(tmp_path, capsys):
    assert run(["enumerate", "--horizon", "17", "--out", str(tmp_path)]) == 2
    assert "capped" in capsys.readouterr().err


def test_couple(tmp_path):
    out = tmp_path / "c"
    assert run(["couple", "--trials", "200", "--out", str(out)]) == 0
    summary = dict(read_csv(out / "couple_summary.csv")[1:])
    assert summary["click_violations"] == "0" and summary["drift_violations"] == "0"


def test_couple_non_nested(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schedule_a": [2, 5], "schedule_b": [3, 5]}))
    assert run(["couple", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_population(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"num_agents": 500, "horizon": 30}))
    out = tmp_path / "p"
    assert run(["population", "--config", str(cfg), "--out", str(out)]) == 0
    assert read_csv(out / "population.csv")[0] == POPULATION_COLUMNS
    summary = json.loads((out / "population_summary.json").read_text())
    assert summary["unreachable_agents_with_unequal_finals"] == 0
    assert sum(summary["histogram"]["innate"]) == 500
    w = summary["wasserstein1"]
    assert w["adaptive_vs_innate"] < w["fixed_vs_innate"]


def test_reproduce_fig3_schema(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha_points": 3, "sweep": "alpha", "trials": 50}))
    out = tmp_path / "f"
    assert run(["reproduce", "fig3", "--config", str(cfg), "--out", str(out)]) == 0
    rows = read_csv(out / "fig3_alpha.csv")
    assert rows[0] == SWEEP_COLUMNS and len(rows) == 4


@pytest.mark.parametrize("content,needle", [
    ('{"alpha": 0.4,\n  "beta": }', ":2:"),
    ('{"alhpa": 0.4}', "'alhpa'"),
    ('{"alpha": "x"}', "'alpha'"),
    ('{"alpha": 0.2, "beta": 0.3}', "invalid configuration"),
    ('[1, 2]', "JSON object"),
])
def test_config_errors(tmp_path, capsys, content, needle):
    cfg = tmp_path / "bad.json"
    cfg.write_text(content)
    assert run(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert needle in err


def test_missing_config(tmp_path, capsys):
    assert run(["simulate", "--config", str(tmp_path / "nope.json")]) == 2


def test_bad_seed(tmp_path):
    assert run(["simulate", "--seed", str(2**64), "--out", str(tmp_path)]) == 2
    assert run(["simulate", "--trials", "0", "--out", str(tmp_path)]) == 2


def test_manifest_rerun_byte_identical(tmp_path):
    first = tmp_path / "one"
    assert run(["reproduce", "fig4", "--trials", "60", "--seed", "17", "--out", str(first)]) == 0
    for workers in ("1", "8"):
        again = tmp_path / f"w{workers}"
        assert run(["reproduce", "fig4", "--config", str(first / "manifest.json"),
                    "--workers", workers, "--out", str(again)]) == 0
        assert (again / "fig4.csv").read_bytes() == (first / "fig4.csv").read_bytes()
