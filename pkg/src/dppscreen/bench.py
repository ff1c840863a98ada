"""Path benchmark harness: rejection ratios, timing, speedups, report files.

The baseline arm solves the whole path with warm starts and no screening; each
screened arm runs the same grid with its rule. Speedup charges the screened
arm for both its screening time and its reduced solves. Reports go out as CSV
or JSON lines with one summary row per rule.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field

import numpy as np

from .core import (
    BALL_RULES,
    Dataset,
    GroupLayout,
    InvalidSpec,
    LambdaGrid,
    MaxItersExceeded,
    PathRecord,
    PathResult,
    RULE_EDPP,
    RULE_GROUP_EDPP,
    RULE_NONE,
    RULE_SAFE,
    RULE_STRONG,
    RuleTotals,
)
from .screening import group_lambda_max, iter_path, lambda_max
from .solver import SolverConfig

ZERO_THRESHOLD = 1e-10  # |beta_i| at or below this counts as a solved zero

SPACING_LINEAR = "linear"
SPACING_LOG = "log"

REPORT_COLUMNS = (
    "rule", "lambda", "lambda_over_lambda_max", "n_discarded", "n_true_zero",
    "rejection_ratio", "screen_seconds", "solver_seconds",
)

SUMMARY_SENTINEL = "summary"


@dataclass(frozen=True)
class BenchConfig:
    """Grid shape, rule list, and repetition count for one benchmark run."""

    n_points: int = 100
    ratio_lo: float = 0.05
    ratio_hi: float = 1.0
    spacing: str = SPACING_LINEAR
    rules: tuple[str, ...] = (RULE_EDPP,)
    trials: int = 1
    seed: int = 0  # recorded for provenance; the benchmark itself is deterministic
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.n_points < 2:
            raise InvalidSpec(f"n_points must be >= 2, got {self.n_points}")
        if not (0 < self.ratio_lo < self.ratio_hi <= 1):
            raise InvalidSpec(
                f"need 0 < ratio_lo < ratio_hi <= 1, got "
                f"{self.ratio_lo}, {self.ratio_hi}")
        if self.spacing not in (SPACING_LINEAR, SPACING_LOG):
            raise InvalidSpec(f"spacing must be linear or log, got {self.spacing!r}")
        if self.trials < 1:
            raise InvalidSpec(f"trials must be >= 1, got {self.trials}")
        allowed = BALL_RULES + (RULE_SAFE, RULE_STRONG, RULE_GROUP_EDPP)
        rules = tuple(r.lower() for r in self.rules)
        for r in rules:
            if r not in allowed:
                raise InvalidSpec(f"unknown rule {r!r}")
        if len(set(rules)) != len(rules):
            raise InvalidSpec("duplicate rules in benchmark config")
        object.__setattr__(self, "rules", rules)


def _build_grid(d: Dataset, cfg: BenchConfig, g: GroupLayout | None) -> LambdaGrid:
    lmax = group_lambda_max(d, g)[0] if g is not None else lambda_max(d)[0]
    maker = LambdaGrid.linear if cfg.spacing == SPACING_LINEAR else LambdaGrid.geometric
    return maker(lmax, lo=cfg.ratio_lo, hi=cfg.ratio_hi, n_points=cfg.n_points)


def _run_arm(rule: str, d: Dataset, grid: LambdaGrid, solver_cfg: SolverConfig,
             g: GroupLayout | None, raise_on_error: bool) -> tuple[list, bool]:
    """All steps of one path; on solver failure, keep what finished."""
    steps = []
    try:
        for step in iter_path(rule, d, grid, solver_cfg, g=g):
            steps.append(step)
        return steps, True
    except MaxItersExceeded:
        if raise_on_error:
            raise
        return steps, False


def _zero_units(beta: np.ndarray, g: GroupLayout | None) -> int:
    if g is None:
        return int(np.count_nonzero(np.abs(beta) <= ZERO_THRESHOLD))
    zeros = 0
    for k in range(g.n_groups):
        if np.max(np.abs(beta[g.slice(k)])) <= ZERO_THRESHOLD:
            zeros += 1
    return zeros


def run_path_benchmark(d: Dataset, cfg: BenchConfig,
                       g: GroupLayout | None = None,
                       grid: LambdaGrid | None = None,
                       raise_on_error: bool = False) -> PathResult:
    """Benchmark every configured rule against the no-screening baseline.

    Runs each arm cfg.trials times and reports per-point median timings, so
    the summary speedup always equals its recomputation from the emitted
    rows. Counts and masks are deterministic and come from the first trial.
    For group runs, rules named edpp are executed as group_edpp and counts
    are per group. A solver failure inside one arm truncates that arm's rows
    instead of aborting the run, unless raise_on_error is set.
    """
    if grid is None:
        grid = _build_grid(d, cfg, g)
    rules = list(cfg.rules)
    if g is not None:
        rules = [RULE_GROUP_EDPP if r == RULE_EDPP else r for r in rules]
        for r in rules:
            if r != RULE_GROUP_EDPP:
                raise InvalidSpec(f"group benchmarks support only edpp, got {r!r}")

    arms = [RULE_NONE] + rules
    runs: dict[str, list] = {}
    times: dict[str, list[list[tuple[float, float]]]] = {r: [] for r in arms}
    for trial in range(cfg.trials):
        for rule in arms:
            steps, _complete = _run_arm(rule, d, grid, cfg.solver, g, raise_on_error)
            times[rule].append([(s.screen_seconds, s.solver_seconds) for s in steps])
            if trial == 0:
                runs[rule] = steps

    def median_times(rule: str, k: int) -> tuple[float, float]:
        per_trial = [t[k] for t in times[rule] if k < len(t)]
        return (statistics.median(t[0] for t in per_trial),
                statistics.median(t[1] for t in per_trial))

    base_steps = runs[RULE_NONE]
    true_zeros = [_zero_units(s.solution.beta, g) for s in base_steps]

    records: list[PathRecord] = []
    totals: list[RuleTotals] = []
    for rule in arms:
        steps = runs[rule]
        screen_total = solver_total = 0.0
        nd_total = ntz_total = 0
        ratios: list[float] = []
        for k, step in enumerate(steps):
            screen_s, solver_s = median_times(rule, k)
            screen_total += screen_s
            solver_total += solver_s
            ntz = true_zeros[k] if k < len(true_zeros) else 0
            nd = step.mask.n_discarded
            if rule == RULE_NONE:
                ratio = None
            else:
                ratio = nd / ntz if ntz > 0 else None
                if ratio is not None:
                    ratios.append(ratio)
            nd_total += nd
            ntz_total += ntz
            records.append(PathRecord(
                rule=rule, lam=step.lam, lam_ratio=step.lam / grid.lambda_max,
                n_discarded=nd, n_true_zero=ntz, rejection_ratio=ratio,
                screen_seconds=screen_s, solver_seconds=solver_s))
        if rule == RULE_NONE:
            baseline_solver_total = solver_total
            speedup = 1.0
        else:
            cost = screen_total + solver_total
            speedup = baseline_solver_total / cost if cost > 0 else float("inf")
        totals.append(RuleTotals(
            rule=rule, screen_seconds=screen_total, solver_seconds=solver_total,
            speedup=speedup, n_discarded=nd_total, n_true_zero=ntz_total,
            mean_rejection_ratio=(sum(ratios) / len(ratios)) if ratios else None))
    return PathResult(records=tuple(records), totals=tuple(totals))


def _text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(r: PathResult, path: str, format: str = "csv") -> None:
    """Write per-point rows plus one summary row per rule.

    Summary rows reuse the fixed column set: the lambda column holds the
    sentinel "summary" and the lambda_over_lambda_max column holds the rule's
    speedup; count and time columns hold path totals, rejection_ratio the
    mean over defined points. IO failures surface as the usual OSError.
    """
    format = format.lower()
    if format not in ("csv", "json_lines", "jsonl"):
        raise InvalidSpec(f"format must be csv or json_lines, got {format!r}")

    rows: list[dict] = []
    for rec in r.records:
        rows.append({
            "rule": rec.rule, "lambda": rec.lam,
            "lambda_over_lambda_max": rec.lam_ratio,
            "n_discarded": rec.n_discarded, "n_true_zero": rec.n_true_zero,
            "rejection_ratio": rec.rejection_ratio,
            "screen_seconds": rec.screen_seconds,
            "solver_seconds": rec.solver_seconds,
        })
    for tot in r.totals:
        rows.append({
            "rule": tot.rule, "lambda": SUMMARY_SENTINEL,
            "lambda_over_lambda_max": tot.speedup,
            "n_discarded": tot.n_discarded, "n_true_zero": tot.n_true_zero,
            "rejection_ratio": tot.mean_rejection_ratio,
            "screen_seconds": tot.screen_seconds,
            "solver_seconds": tot.solver_seconds,
        })

    if format == "csv":
        with open(path, "w") as fh:
            fh.write(",".join(REPORT_COLUMNS) + "\n")
            for row in rows:
                fh.write(",".join(_text(row[c]) for c in REPORT_COLUMNS) + "\n")
    else:
        with open(path, "w") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")


def summary_lines(r: PathResult) -> list[str]:
    """Human-readable one-liners for the CLI, one per rule."""
    lines = []
    for tot in r.totals:
        ratio = ("n/a" if tot.mean_rejection_ratio is None
                 else f"{tot.mean_rejection_ratio:.4f}")
        lines.append(
            f"{tot.rule}: mean_rejection_ratio={ratio} "
            f"speedup={tot.speedup:.3f} screen_s={tot.screen_seconds:.4f} "
            f"solver_s={tot.solver_seconds:.4f}")
    return lines
