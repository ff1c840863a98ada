import csv
import subprocess
import sys

import numpy as np
import pytest

from dppscreen import load_binary, load_csv


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "dppscreen.cli", *args],
                          capture_output=True, text=True)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    prefix = str(tmp_path_factory.mktemp("cli") / "ds")
    res = run_cli("gen", "--n", "20", "--p", "30", "--nnz", "5",
                  "--seed", "42", "--out", prefix)
    assert res.returncode == 0
    return prefix


def test_help_exits_zero():
    assert run_cli("--help").returncode == 0
    assert run_cli("gen", "--help").returncode == 0


def test_no_subcommand_is_usage_error():
    assert run_cli().returncode == 2


def test_gen_writes_files_and_is_deterministic(tmp_path):
    a = str(tmp_path / "a")
    b = str(tmp_path / "b")
    for prefix in (a, b):
        res = run_cli("gen", "--n", "10", "--p", "6", "--nnz", "2",
                      "--seed", "7", "--out", prefix)
        assert res.returncode == 0
        assert prefix + ".x.csv" in res.stdout
    with open(a + ".x.csv") as fa, open(b + ".x.csv") as fb:
        assert fa.read() == fb.read()
    beta = np.loadtxt(a + ".beta_true.csv")
    assert beta.shape == (6,)


def test_gen_binary_matches_csv(tmp_path):
    pc = str(tmp_path / "c")
    pb = str(tmp_path / "d")
    run_cli("gen", "--n", "9", "--p", "4", "--nnz", "2", "--seed", "3",
            "--out", pc)
    res = run_cli("gen", "--n", "9", "--p", "4", "--nnz", "2", "--seed", "3",
                  "--out", pb, "--binary")
    assert res.returncode == 0
    d_csv = load_csv(pc + ".x.csv", pc + ".y.csv")
    d_bin = load_binary(pb + ".x.bin")
    np.testing.assert_array_equal(np.asarray(d_csv.x), np.asarray(d_bin.x))
    np.testing.assert_array_equal(d_csv.y, d_bin.y)


def test_gen_groups_file(tmp_path):
    prefix = str(tmp_path / "g")
    res = run_cli("gen", "--n", "8", "--p", "6", "--nnz", "2", "--seed", "1",
                  "--out", prefix, "--groups", "2,2,2")
    assert res.returncode == 0
    with open(prefix + ".groups.csv") as fh:
        assert [int(line) for line in fh] == [2, 2, 2]


def test_gen_bad_groups_is_usage_error(tmp_path):
    res = run_cli("gen", "--n", "8", "--p", "6", "--nnz", "2",
                  "--out", str(tmp_path / "x"), "--groups", "2,2")
    assert res.returncode == 2


def test_solve_by_ratio(dataset):
    res = run_cli("solve", "--x", dataset + ".x.csv", "--y", dataset + ".y.csv",
                  "--ratio", "0.5")
    assert res.returncode == 0
    assert "lambda=" in res.stdout and "nnz=" in res.stdout


def test_solve_writes_coefficients(dataset, tmp_path):
    out = str(tmp_path / "beta.csv")
    res = run_cli("solve", "--x", dataset + ".x.csv", "--y", dataset + ".y.csv",
                  "--ratio", "0.3", "--out", out)
    assert res.returncode == 0
    assert np.loadtxt(out).shape == (30,)


def test_solve_requires_exactly_one_target(dataset):
    args = ("solve", "--x", dataset + ".x.csv", "--y", dataset + ".y.csv")
    assert run_cli(*args).returncode == 2
    assert run_cli(*args, "--lam", "1.0", "--ratio", "0.5").returncode == 2


def test_path_report_and_summary(dataset, tmp_path):
    out = str(tmp_path / "path.csv")
    res = run_cli("path", "--x", dataset + ".x.csv", "--y", dataset + ".y.csv",
                  "--rule", "edpp", "--points", "8", "--out", out)
    assert res.returncode == 0
    assert "edpp:" in res.stdout
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    arms = {r["rule"] for r in rows}
    assert arms == {"none", "edpp"}


def test_path_single_point(dataset, tmp_path):
    out = str(tmp_path / "p1.csv")
    res = run_cli("path", "--x", dataset + ".x.csv", "--y", dataset + ".y.csv",
                  "--rule", "none", "--points", "1", "--out", out)
    assert res.returncode == 0


def test_path_screened_matches_plain(dataset, tmp_path):
    out_e = str(tmp_path / "e.csv")
    out_n = str(tmp_path / "n.csv")
    run_cli("path", "--x", dataset + ".x.csv", "--y", dataset + ".y.csv",
            "--rule", "edpp", "--points", "6", "--out", out_e)
    run_cli("path", "--x", dataset + ".x.csv", "--y", dataset + ".y.csv",
            "--rule", "none", "--points", "6", "--out", out_n)
    with open(out_e) as fh:
        edpp = [r for r in csv.DictReader(fh)
                if r["rule"] == "edpp" and r["lambda"] != "summary"]
    assert sum(int(r["n_discarded"]) for r in edpp) > 0
    # screened and unscreened paths see the same true-zero counts
    with open(out_n) as fh:
        none = [r for r in csv.DictReader(fh)
                if r["rule"] == "none" and r["lambda"] != "summary"]
    assert [r["n_true_zero"] for r in edpp] == [r["n_true_zero"] for r in none]


def test_bench_baseline_only(dataset, tmp_path):
    out = str(tmp_path / "b.csv")
    res = run_cli("bench", "--x", dataset + ".x.csv", "--y", dataset + ".y.csv",
                  "--rules", "", "--points", "4", "--trials", "1", "--out", out)
    assert res.returncode == 0
    with open(out) as fh:
        assert {r["rule"] for r in csv.DictReader(fh)} == {"none"}


def test_bench_json_lines(dataset, tmp_path):
    out = str(tmp_path / "b.jsonl")
    res = run_cli("bench", "--x", dataset + ".x.csv", "--y", dataset + ".y.csv",
                  "--rules", "edpp", "--points", "4", "--trials", "1",
                  "--out", out, "--format", "json_lines")
    assert res.returncode == 0
    assert open(out).readline().startswith("{")


def test_screen_report(dataset, tmp_path):
    out = str(tmp_path / "sr.csv")
    res = run_cli("screen-report", "--x", dataset + ".x.csv",
                  "--y", dataset + ".y.csv", "--rule", "safe",
                  "--points", "5", "--out", out)
    assert res.returncode == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 5
    for r in rows:
        assert int(r["n_discarded"]) + int(r["n_kept"]) == 30


def test_missing_file_exits_one(dataset):
    res = run_cli("solve", "--x", "/no/such/file.csv",
                  "--y", dataset + ".y.csv", "--ratio", "0.5")
    assert res.returncode == 1
    assert "error:" in res.stderr


def test_bad_rule_exits_two(dataset, tmp_path):
    res = run_cli("path", "--x", dataset + ".x.csv", "--y", dataset + ".y.csv",
                  "--rule", "bogus", "--out", str(tmp_path / "x.csv"))
    assert res.returncode == 2


def test_degenerate_response_exits_three(tmp_path):
    prefix = str(tmp_path / "zero")
    run_cli("gen", "--n", "6", "--p", "4", "--nnz", "0", "--sigma", "0",
            "--seed", "1", "--out", prefix)
    res = run_cli("solve", "--x", prefix + ".x.csv", "--y", prefix + ".y.csv",
                  "--ratio", "0.5")
    assert res.returncode == 3
    assert "error:" in res.stderr


def test_iteration_budget_exits_three(dataset):
    res = run_cli("solve", "--x", dataset + ".x.csv", "--y", dataset + ".y.csv",
                  "--ratio", "0.01", "--gap-tol", "1e-14", "--max-iters", "2")
    assert res.returncode == 3
