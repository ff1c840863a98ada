"""Command-line front end: generate data, solve, screen, and benchmark.

Exit codes: 0 success, 1 file/parse failure, 2 usage error, 3 numeric
failure (solver or oracle did not converge, or the problem is degenerate).
"""

from __future__ import annotations

import argparse
import sys

from .bench import (
    BenchConfig,
    SPACING_LINEAR,
    SPACING_LOG,
    emit_report,
    run_path_benchmark,
    summary_lines,
)
from .core import (
    BadMagic,
    DegenerateResponse,
    DegenerateV1,
    DimensionMismatch,
    GroupLayout,
    InvalidSpec,
    LambdaGrid,
    MaxItersExceeded,
    NoConvergence,
    NonFiniteInput,
    ParseError,
    RULE_EDPP,
    RULE_NONE,
    SEQUENTIAL_RULES,
    TruncatedFile,
)
from .data import (
    CORR_AR1,
    CORR_IID,
    SyntheticSpec,
    generate_synthetic,
    load_binary,
    load_csv,
    save_binary,
    save_csv,
    save_vector_csv,
)
from .screening import basic_screen, group_lambda_max, lambda_max
from .solver import SolverConfig, solve_group_lasso, solve_lasso


def _corr_arg(text: str) -> tuple[str, float]:
    t = text.strip().lower()
    if t == CORR_IID:
        return (CORR_IID, 0.0)
    if t.startswith(CORR_AR1 + ":"):
        try:
            return (CORR_AR1, float(t.split(":", 1)[1]))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"bad AR(1) coefficient in {text!r}") from None
    raise argparse.ArgumentTypeError(f"--corr must be iid or ar1:RHO, got {text!r}")


def _groups_arg(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad group sizes {text!r}") from None
    if not sizes:
        raise argparse.ArgumentTypeError("group size list is empty")
    return sizes


def _rules_arg(text: str) -> tuple[str, ...]:
    return tuple(tok.strip().lower() for tok in text.split(",") if tok.strip())


def _add_dataset_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--x", required=True,
                     help="design matrix: CSV, or the DPPS binary (.bin)")
    sub.add_argument("--y", help="response CSV; not needed with a .bin design")
    sub.add_argument("--groups", type=_groups_arg,
                     help="comma-separated group sizes covering all columns")


def _add_grid_flags(sub: argparse.ArgumentParser, default_points: int = 100) -> None:
    sub.add_argument("--points", type=int, default=default_points,
                     help="number of grid points")
    sub.add_argument("--lo", type=float, default=0.05,
                     help="smallest lambda/lambda_max ratio")
    sub.add_argument("--hi", type=float, default=1.0,
                     help="largest lambda/lambda_max ratio")


def _load_dataset(args):
    if args.x.endswith(".bin"):
        return load_binary(args.x)
    if not args.y:
        raise InvalidSpec("--y is required when --x is a CSV file")
    return load_csv(args.x, args.y)


def _layout(args) -> GroupLayout | None:
    return GroupLayout(args.groups) if getattr(args, "groups", None) else None


def cmd_gen(args) -> int:
    corr, rho = args.corr
    spec = SyntheticSpec(n=args.n, p=args.p, nnz=args.nnz, sigma=args.sigma,
                         correlation=corr, rho=rho, seed=args.seed,
                         group_sizes=args.groups)
    d, beta_true = generate_synthetic(spec)
    written = []
    if args.binary:
        path = args.out + ".x.bin"
        save_binary(d, path)
        written.append(path)
        save_vector_csv(d.y, args.out + ".y.csv")
        written.append(args.out + ".y.csv")
    else:
        save_csv(d, args.out + ".x.csv", args.out + ".y.csv")
        written += [args.out + ".x.csv", args.out + ".y.csv"]
    save_vector_csv(beta_true, args.out + ".beta_true.csv")
    written.append(args.out + ".beta_true.csv")
    if args.groups:
        path = args.out + ".groups.csv"
        with open(path, "w") as fh:
            for s in args.groups:
                fh.write(f"{s}\n")
        written.append(path)
    for path in written:
        print(path)
    return 0


def cmd_solve(args) -> int:
    d = _load_dataset(args)
    g = _layout(args)
    lmax = group_lambda_max(d, g)[0] if g is not None else lambda_max(d)[0]
    lam = args.lam if args.lam is not None else args.ratio * lmax
    cfg = SolverConfig(gap_tol=args.gap_tol, max_iters=args.max_iters)
    if g is not None:
        sol = solve_group_lasso(d, g, lam, cfg=cfg)
    else:
        sol = solve_lasso(d, lam, cfg=cfg)
    print(f"lambda={sol.lam!r} lambda_max={lmax!r} nnz={sol.nnz} "
          f"gap={sol.duality_gap!r} iters={sol.n_iters}")
    if args.out:
        save_vector_csv(sol.beta, args.out)
        print(args.out)
    return 0


def cmd_path(args) -> int:
    d = _load_dataset(args)
    g = _layout(args)
    rule = args.rule.lower()
    if g is not None and rule not in (RULE_EDPP, RULE_NONE):
        raise InvalidSpec(f"group paths support --rule edpp or none, got {rule!r}")
    lmax = group_lambda_max(d, g)[0] if g is not None else lambda_max(d)[0]
    grid = LambdaGrid.linear(lmax, lo=args.lo, hi=args.hi, n_points=args.points)
    cfg = BenchConfig(rules=() if rule == RULE_NONE else (rule,), trials=1,
                      solver=SolverConfig(gap_tol=args.gap_tol))
    result = run_path_benchmark(d, cfg, g=g, grid=grid, raise_on_error=True)
    emit_report(result, args.out, format=args.format)
    for line in summary_lines(result):
        print(line)
    return 0


def cmd_bench(args) -> int:
    d = _load_dataset(args)
    g = _layout(args)
    cfg = BenchConfig(n_points=args.points, ratio_lo=args.lo, ratio_hi=args.hi,
                      spacing=args.spacing, rules=args.rules, trials=args.trials,
                      solver=SolverConfig(gap_tol=args.gap_tol))
    result = run_path_benchmark(d, cfg, g=g)
    emit_report(result, args.out, format=args.format)
    for line in summary_lines(result):
        print(line)
    return 0


def cmd_screen_report(args) -> int:
    d = _load_dataset(args)
    rule = args.rule.lower()
    lmax, _ = lambda_max(d)
    grid = LambdaGrid.linear(lmax, lo=args.lo, hi=args.hi, n_points=args.points)
    with open(args.out, "w") as fh:
        fh.write("rule,lambda,lambda_over_lambda_max,n_discarded,n_kept\n")
        total = 0
        for lam in grid.values:
            lam = float(lam)
            mask = basic_screen(rule, d, lam)
            nd = mask.n_discarded
            total += nd
            fh.write(f"{rule},{lam!r},{lam / lmax!r},{nd},"
                     f"{mask.discard.size - nd}\n")
    print(f"{rule}: {total} discards across {grid.n_points} grid points -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dppscreen",
        description="Safe screening for Lasso and group Lasso paths")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--p", type=int, required=True, help="number of features")
    p.add_argument("--nnz", type=int, required=True,
                   help="number of nonzero true coefficients")
    p.add_argument("--sigma", type=float, default=0.1, help="noise scale")
    p.add_argument("--corr", type=_corr_arg, default=(CORR_IID, 0.0),
                   help="iid or ar1:RHO")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed")
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--groups", type=_groups_arg,
                   help="group sizes recorded alongside the data")
    p.add_argument("--binary", action="store_true",
                   help="write the design+response as one DPPS binary file")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve a single problem at one lambda")
    _add_dataset_flags(p)
    pick = p.add_mutually_exclusive_group(required=True)
    pick.add_argument("--lam", type=float, help="absolute lambda value")
    pick.add_argument("--ratio", type=float, help="lambda as a lambda_max ratio")
    p.add_argument("--gap-tol", type=float, default=1e-8,
                   help="relative duality-gap tolerance")
    p.add_argument("--max-iters", type=int, default=100_000,
                   help="iteration budget before giving up")
    p.add_argument("--out", help="write coefficients here, one per line")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("path", help="screened path along a lambda grid")
    _add_dataset_flags(p)
    p.add_argument("--rule", required=True,
                   choices=sorted(SEQUENTIAL_RULES + (RULE_NONE,)),
                   help="screening rule (none = baseline)")
    _add_grid_flags(p)
    p.add_argument("--gap-tol", type=float, default=1e-8)
    p.add_argument("--out", required=True, help="report file")
    p.add_argument("--format", default="csv", choices=["csv", "json_lines"])
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("bench", help="compare rules against the baseline")
    _add_dataset_flags(p)
    p.add_argument("--rules", type=_rules_arg, default=(),
                   help="comma-separated rules; empty = baseline only")
    p.add_argument("--trials", type=int, default=3,
                   help="timing repetitions (medians reported)")
    _add_grid_flags(p)
    p.add_argument("--spacing", default=SPACING_LINEAR,
                   choices=[SPACING_LINEAR, SPACING_LOG])
    p.add_argument("--gap-tol", type=float, default=1e-8)
    p.add_argument("--out", required=True, help="report file")
    p.add_argument("--format", default="csv", choices=["csv", "json_lines"])
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("screen-report",
                       help="basic (no-solve) screening counts along a grid")
    p.add_argument("--x", required=True)
    p.add_argument("--y")
    p.add_argument("--rule", required=True,
                   choices=sorted(SEQUENTIAL_RULES + (RULE_NONE,)))
    _add_grid_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_screen_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, BadMagic, TruncatedFile, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (MaxItersExceeded, NoConvergence, DegenerateResponse,
            DegenerateV1) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (InvalidSpec, DimensionMismatch, NonFiniteInput, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
