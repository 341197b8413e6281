import csv
import json

import numpy as np
import pytest

from randrank.errors import StructuralError
from randrank.harness import (
    ConfigError,
    ExperimentConfig,
    density_reduction,
    run_experiment,
    run_grurv_experiment,
    run_mc_svalue,
    wilson_interval,
)
from randrank.metrics import summarize
from randrank.report import RECORD_COLUMNS, emit_report, read_summary_json


def small_config(**kw):
    base = dict(dist="stair", n=[64], r=32, gap=[1e7], trials=6, delta=0.03, seed=42)
    base.update(kw)
    return ExperimentConfig.from_dict(base)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_config_defaults_and_modes():
    cfg = ExperimentConfig().validate()
    assert cfg.mode == "vary-dim" and cfg.trials == 200 and cfg.n == [100, 300, 500]
    assert ExperimentConfig.from_dict({"n": 50, "gap": [1e2, 1e4]}).validate().mode == "vary-gap"
    assert ExperimentConfig.from_dict({"n": 50, "gap": 1e2}).validate().mode == "single"
    assert small_config().split_for(64) == 32
    assert ExperimentConfig().split_for(301) == 150


@pytest.mark.parametrize("bad", [
    {"trials": 0}, {"delta": 0.0}, {"delta": 1.0}, {"dist": "flat"}, {"format": "xml"},
    {"mode": "vary-gap", "n": [10, 20]}, {"mode": "single", "gap": [1, 2]}, {"jobs": 0},
    {"r": 70}, {"exponents": [1, 2]}, {"cond": 0.5}, {"n": []},
])
def test_config_rejects(bad):
    with pytest.raises(ConfigError):
        small_config(**bad).validate()


def test_config_unknown_key():
    with pytest.raises(ConfigError, match="unknown"):
        ExperimentConfig.from_dict({"trails": 5})


def test_grid_order():
    cfg = small_config(n=[40, 60, 80], r=None).validate()
    assert [(n, g) for _, n, g in cfg.grid()] == [(40, 1e7), (60, 1e7), (80, 1e7)]
    cfg = small_config(gap=[10.0, 1e3]).validate()
    assert [g for _, _, g in cfg.grid()] == [10.0, 1e3]


def test_run_single_point():
    (point,) = run_experiment(small_config())
    assert point.error is None and len(point.records) == 6
    assert [rec.trial_index for rec in point.records] == list(range(6))
    assert point.bounds.b4_applicable
    for rec in point.records:
        assert rec.ratio1 >= 1 - 1e-10 and rec.ratio2 >= 1 - 1e-10
        assert rec.backward_error <= 100 * 64 * np.finfo(float).eps


def test_one_trial_summary_is_the_record():
    (point,) = run_experiment(small_config(trials=1))
    m = point.summary.metrics["ratio1"]
    assert m.min == m.median == m.max == point.records[0].ratio1


def test_small_n_has_no_probabilistic_bounds():
    (point,) = run_experiment(small_config(n=[20], r=10, trials=2))
    assert point.bounds is None and point.summary is not None
    assert point.summary.metrics["ratio1"].bound is None


def test_failed_point_does_not_stop_the_grid():
    cfg = small_config(dist="logspace", gap=[1e14, 1e7], trials=2, top=1e13)
    bad, good = run_experiment(cfg)
    assert bad.error_kind == "config" and bad.summary is None
    assert good.summary is not None


def test_grurv_single_factor_matches_rurv():
    plain = run_experiment(small_config())[0].records
    prod = run_grurv_experiment(small_config(exponents=[1]))[0].records
    assert plain == prod


def test_grurv_oracle_subsample():
    cfg = small_config(n=[20], r=10, trials=100, exponents=[1, -1], oracle_every=1, gap=[1e3])
    (point,) = run_grurv_experiment(cfg)
    errors = [rec.backward_error for rec in point.records]
    assert all(e is not None and e <= 1e-9 for e in errors)
    cfg = small_config(n=[20], r=10, trials=20, exponents=[1, 1], oracle_every=10)
    recs = run_grurv_experiment(cfg)[0].records
    assert [rec.backward_error is not None for rec in recs] == [t % 10 == 0 for t in range(20)]


def test_grurv_experiment_three_factors():
    cfg = small_config(n=[80], r=40, trials=40, exponents=[1, -1, 1])
    (point,) = run_grurv_experiment(cfg)
    for name in ("ratio1", "ratio2", "norm3"):
        m = point.summary.metrics[name]
        assert m.exceed_count <= 0.03 * 40 + 3 * np.sqrt(0.03 * 40)


def test_report_files_and_round_trip(tmp_path):
    points = run_experiment(small_config(n=[64, 66], r=None, trials=5))
    paths = emit_report(points, "json", tmp_path)
    rows = read_rows(paths["records"])
    assert len(rows) == 2 * 5
    assert tuple(rows[0]) == RECORD_COLUMNS
    assert float(rows[0]["ratio1"]) == points[0].records[0].ratio1
    entries = read_summary_json(paths["summary"])
    assert [e["summary"] for e in entries] == [p.summary for p in points]
    assert entries[0]["bounds"]["b1"] == points[0].bounds.b1
    hist = read_rows(paths["histogram"])
    assert len(hist) == 2 * 3 * 64
    assert sum(int(h["count"]) for h in hist if h["metric"] == "ratio1" and h["grid_n"] == "64") == 5
    spec = read_rows(paths["spectrum"])
    assert len(spec) == 64 + 66
    svg = (tmp_path / "plotdata.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg
    assert (tmp_path / "histogram.svg").exists()


def test_report_csv_summary(tmp_path):
    points = run_experiment(small_config(gap=[10.0, 1e7], trials=4))
    emit_report(points, "csv", tmp_path, plots=False)
    rows = read_rows(tmp_path / "summary.csv")
    assert len(rows) == 2 * 3
    low_gap = [r for r in rows if float(r["grid_gap"]) == 10.0]
    # The sharp norm bound's hypothesis fails at a small gap, so it is left out.
    assert all(r["b4"] == "" and r["b4_applicable"] == "0" for r in low_gap)
    norm_row = next(r for r in low_gap if r["metric"] == "norm3")
    assert float(norm_row["bound"]) == pytest.approx(points[0].bounds.b3)
    assert not (tmp_path / "plotdata.svg").exists()


def test_report_empty(tmp_path):
    with pytest.raises(StructuralError):
        emit_report([], "csv", tmp_path / "out")
    assert not (tmp_path / "out").exists()


def test_parallel_records_identical(tmp_path):
    one = run_experiment(small_config(trials=8, jobs=1))
    four = run_experiment(small_config(trials=8, jobs=4))
    emit_report(one, "csv", tmp_path / "a", plots=False)
    emit_report(four, "csv", tmp_path / "b", plots=False)
    assert (tmp_path / "a" / "records.csv").read_bytes() == (tmp_path / "b" / "records.csv").read_bytes()


def test_figures_are_reproducible(tmp_path):
    points = run_experiment(small_config(trials=4))
    emit_report(points, "csv", tmp_path / "a")
    emit_report(points, "csv", tmp_path / "b")
    assert (tmp_path / "a" / "plotdata.svg").read_bytes() == (tmp_path / "b" / "plotdata.svg").read_bytes()


def test_summary_matches_records():
    (point,) = run_experiment(small_config())
    assert summarize(point.records, point.bounds) == point.summary


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and 0 < hi < 0.1
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi


def test_density_reduction():
    assert density_reduction(3, 10).r == 3
    assert density_reduction(7, 10).r == 3
    assert density_reduction(5, 10) is None


def test_mc_rows_and_clamp():
    res = run_mc_svalue(31, 62, 50, [0.1, 0.6], seed=1)
    assert [row.bound for row in res.rows] == [pytest.approx(0.202), 1.0]
    assert res.rows[1].ok and res.ks_distance is None
    assert all(0.0 <= row.empirical <= 1.0 for row in res.rows)


def test_mc_without_bound_reports_density_fit():
    res = run_mc_svalue(3, 10, 400, [0.1], seed=2, with_bound=False)
    assert res.rows[0].bound is None and res.rows[0].ok is None
    assert res.ks_distance is not None and res.ks_distance < 0.1


def test_mc_small_dims_have_no_bound():
    res = run_mc_svalue(3, 10, 20, [0.1], seed=2)
    assert res.rows[0].bound is None


def test_mc_rejects():
    with pytest.raises(ConfigError):
        run_mc_svalue(10, 10, 5, [0.1], seed=0)
    with pytest.raises(ConfigError):
        run_mc_svalue(3, 10, 0, [0.1], seed=0)


def test_summary_json_is_plain_json(tmp_path):
    emit_report(run_experiment(small_config(trials=2)), "json", tmp_path, plots=False)
    data = json.loads((tmp_path / "summary.json").read_text())
    assert data[0]["summary"]["metrics"]["ratio1"]["exceed_count"] == 0
