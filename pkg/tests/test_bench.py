import csv
import json

import numpy as np
import pytest

from conftest import make_instance
from dppscreen import (
    BenchConfig,
    GroupLayout,
    InvalidSpec,
    LambdaGrid,
    MaxItersExceeded,
    REPORT_COLUMNS,
    RULE_EDPP,
    SUMMARY_SENTINEL,
    SolverConfig,
    ZERO_THRESHOLD,
    emit_report,
    lambda_max,
    run_path_benchmark,
    solve_lasso,
    summary_lines,
)

CFG = BenchConfig(n_points=6, ratio_lo=0.1, rules=("edpp", "dpp"), trials=1)


def test_report_columns_schema():
    assert REPORT_COLUMNS == ("rule", "lambda", "lambda_over_lambda_max",
                              "n_discarded", "n_true_zero", "rejection_ratio",
                              "screen_seconds", "solver_seconds")
    assert ZERO_THRESHOLD == 1e-10


def test_config_validation():
    with pytest.raises(InvalidSpec):
        BenchConfig(n_points=1)
    with pytest.raises(InvalidSpec):
        BenchConfig(ratio_lo=0.0)
    with pytest.raises(InvalidSpec):
        BenchConfig(ratio_lo=0.9, ratio_hi=0.5)
    with pytest.raises(InvalidSpec):
        BenchConfig(ratio_hi=1.5)
    with pytest.raises(InvalidSpec):
        BenchConfig(spacing="cubic")
    with pytest.raises(InvalidSpec):
        BenchConfig(trials=0)
    with pytest.raises(InvalidSpec):
        BenchConfig(rules=("edpp", "edpp"))
    with pytest.raises(InvalidSpec):
        BenchConfig(rules=("bogus",))


def test_benchmark_record_layout():
    d, _ = make_instance(seed=8, n=20, p=30, nnz=5)
    result = run_path_benchmark(d, CFG)
    arms = ("none", "edpp", "dpp")
    assert tuple(t.rule for t in result.totals) == arms
    for arm in arms:
        recs = result.records_for(arm)
        assert len(recs) == 6
        ratios = [r.lam_ratio for r in recs]
        assert ratios[0] == pytest.approx(1.0)
        assert ratios[-1] == pytest.approx(0.1)


def test_rejection_ratio_arithmetic():
    d, _ = make_instance(seed=8, n=20, p=30, nnz=5)
    result = run_path_benchmark(d, CFG)
    lmax, _ = lambda_max(d)
    for rec in result.records:
        if rec.rule == "none":
            assert rec.rejection_ratio is None
            assert rec.n_discarded == 0
            continue
        beta_ref = solve_lasso(d, rec.lam).beta
        n_zero = int(np.sum(np.abs(beta_ref) <= ZERO_THRESHOLD))
        assert rec.n_true_zero == n_zero
        if n_zero == 0:
            assert rec.rejection_ratio is None
        else:
            assert rec.rejection_ratio == pytest.approx(rec.n_discarded / n_zero)
            assert 0.0 <= rec.rejection_ratio <= 1.0


def test_speedup_consistent_with_records():
    d, _ = make_instance(seed=18, n=25, p=60, nnz=8)
    result = run_path_benchmark(d, BenchConfig(n_points=8, ratio_lo=0.1,
                                               rules=("edpp",), trials=2))
    base_solver = sum(r.solver_seconds for r in result.records_for("none"))
    tot = result.totals_for("edpp")
    screen = sum(r.screen_seconds for r in result.records_for("edpp"))
    solver = sum(r.solver_seconds for r in result.records_for("edpp"))
    assert tot.speedup == pytest.approx(base_solver / (screen + solver), rel=1e-9)
    assert result.totals_for("none").speedup == 1.0


def test_mean_rejection_matches_records():
    d, _ = make_instance(seed=28, n=20, p=40, nnz=6)
    result = run_path_benchmark(d, CFG)
    for arm in ("edpp", "dpp"):
        ratios = [r.rejection_ratio for r in result.records_for(arm)
                  if r.rejection_ratio is not None]
        tot = result.totals_for(arm)
        assert tot.mean_rejection_ratio == pytest.approx(float(np.mean(ratios)))


def test_emit_csv_round_trip(tmp_path):
    d, _ = make_instance(seed=38, n=15, p=25, nnz=4)
    result = run_path_benchmark(d, CFG)
    path = str(tmp_path / "report.csv")
    emit_report(result, path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0].keys()) == list(REPORT_COLUMNS)
    data_rows = [r for r in rows if r["lambda"] != SUMMARY_SENTINEL]
    summary_rows = [r for r in rows if r["lambda"] == SUMMARY_SENTINEL]
    assert len(data_rows) == len(result.records)
    assert len(summary_rows) == len(result.totals)
    for row, rec in zip(data_rows, result.records):
        assert row["rule"] == rec.rule
        assert float(row["lambda"]) == rec.lam
        assert float(row["screen_seconds"]) == rec.screen_seconds
        if rec.rejection_ratio is None:
            assert row["rejection_ratio"] == ""
        else:
            assert float(row["rejection_ratio"]) == rec.rejection_ratio
    for row, tot in zip(summary_rows, result.totals):
        assert row["rule"] == tot.rule
        assert float(row["lambda_over_lambda_max"]) == tot.speedup
        assert int(row["n_discarded"]) == tot.n_discarded


def test_emit_json_lines(tmp_path):
    d, _ = make_instance(seed=48, n=15, p=25, nnz=4)
    result = run_path_benchmark(d, BenchConfig(n_points=4, ratio_lo=0.2,
                                               rules=("edpp",), trials=1))
    path = str(tmp_path / "report.jsonl")
    emit_report(result, path, format="json_lines")
    with open(path) as fh:
        objs = [json.loads(line) for line in fh if line.strip()]
    assert len(objs) == len(result.records) + len(result.totals)
    assert set(objs[0]) == set(REPORT_COLUMNS)
    with pytest.raises(InvalidSpec):
        emit_report(result, str(tmp_path / "x.xml"), format="xml")


def test_summary_lines_mention_every_arm():
    d, _ = make_instance(seed=58, n=15, p=20, nnz=4)
    result = run_path_benchmark(d, BenchConfig(n_points=4, ratio_lo=0.2,
                                               rules=("edpp",), trials=1))
    lines = summary_lines(result)
    assert len(lines) == 2
    assert lines[0].startswith("none:")
    assert lines[1].startswith("edpp:")


def test_no_true_zeros_leaves_ratio_undefined():
    # two-feature identity design: both features active at small lambda
    from dppscreen import validate_dataset
    d = validate_dataset(np.eye(2), np.array([3.0, 4.0]))
    result = run_path_benchmark(d, BenchConfig(n_points=3, ratio_lo=0.01,
                                               rules=("edpp",), trials=1))
    last = result.records_for("edpp")[-1]
    assert last.n_true_zero == 0
    assert last.rejection_ratio is None


def test_group_benchmark_arm_name():
    d, _ = make_instance(seed=68, n=25, p=12, nnz=4)
    g = GroupLayout((4, 4, 4))
    result = run_path_benchmark(d, BenchConfig(n_points=4, ratio_lo=0.2,
                                               rules=("edpp",), trials=1), g=g)
    assert [t.rule for t in result.totals] == ["none", "group_edpp"]
    rec = result.records_for("group_edpp")[0]
    assert rec.n_discarded == g.n_groups  # lambda_max seed discards everything
    with pytest.raises(InvalidSpec):
        run_path_benchmark(d, BenchConfig(rules=("dpp",)), g=g)


def test_raise_on_error_propagates():
    d, _ = make_instance(seed=78, n=20, p=40, nnz=8, correlation="ar1", rho=0.9)
    cfg = BenchConfig(n_points=5, ratio_lo=0.02, rules=(),
                      trials=1, solver=SolverConfig(gap_tol=1e-14, max_iters=2))
    with pytest.raises(MaxItersExceeded):
        run_path_benchmark(d, cfg, raise_on_error=True)
    partial = run_path_benchmark(d, cfg)
    assert len(partial.records_for("none")) < 5


def test_custom_grid_overrides_config():
    d, _ = make_instance(seed=88, n=15, p=20, nnz=4)
    lmax, _ = lambda_max(d)
    grid = LambdaGrid(lmax, np.array([1.0, 0.5, 0.25]))
    result = run_path_benchmark(d, BenchConfig(rules=(RULE_EDPP,), trials=1),
                                grid=grid)
    assert [r.lam_ratio for r in result.records_for("edpp")] == \
        pytest.approx([1.0, 0.5, 0.25])
