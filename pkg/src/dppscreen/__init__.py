"""Safe screening rules for Lasso and group Lasso regularization paths.

The screening tests certify, before solving at a given lambda, that certain
coefficients (or coefficient groups) are zero at the optimum, so the solver
only sees the surviving columns.  Estimates of where the dual optimum can
live come in four tightening variants (dpp, imp1, imp2, edpp) plus a static
baseline (safe) and a heuristic with KKT repair (strong).
"""

from .core import (
    ALL_RULES,
    BALL_RULES,
    BadMagic,
    BallEstimate,
    Dataset,
    DegenerateResponse,
    DegenerateV1,
    DimensionMismatch,
    DualPoint,
    GroupLayout,
    InvalidSpec,
    LambdaGrid,
    MaxItersExceeded,
    NoConvergence,
    NonFiniteInput,
    ParseError,
    PathRecord,
    PathResult,
    PrimalSolution,
    RULE_DPP,
    RULE_EDPP,
    RULE_GROUP_EDPP,
    RULE_IMP1,
    RULE_IMP2,
    RULE_NONE,
    RULE_SAFE,
    RULE_STRONG,
    RuleTotals,
    SEQUENTIAL_RULES,
    ScreenMask,
    TruncatedFile,
    validate_dataset,
)
from .solver import (
    SolverConfig,
    compute_duality_gap,
    operator_norm_sq,
    recover_dual_point,
    scale_to_feasible,
    soft_threshold,
    solve_group_lasso,
    solve_lasso,
)
from .oracle import (
    ProjectionProblem,
    dykstra_project,
    orthonormal_design_solution,
    reference_lasso_solve,
    sample_feasible_points,
)
from .screening import (
    KKT_SLACK,
    PathStep,
    StrongScreenResult,
    VGeometry,
    basic_screen,
    compute_v1,
    compute_v_geometry,
    estimate_dual_ball,
    group_lambda_max,
    group_sequential_screen,
    group_spectral_norms,
    iter_path,
    lambda_max,
    screen_group_with_ball,
    screen_safe_basic,
    screen_strong_sequential,
    screen_with_ball,
    sequential_screen,
    strong_rule_mask,
)
from .data import (
    CORR_AR1,
    CORR_IID,
    SyntheticSpec,
    center_and_scale,
    generate_synthetic,
    load_binary,
    load_csv,
    save_binary,
    save_csv,
    save_vector_csv,
)
from .bench import (
    BenchConfig,
    REPORT_COLUMNS,
    SUMMARY_SENTINEL,
    ZERO_THRESHOLD,
    emit_report,
    run_path_benchmark,
    summary_lines,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_RULES",
    "BALL_RULES",
    "BadMagic",
    "BallEstimate",
    "BenchConfig",
    "CORR_AR1",
    "CORR_IID",
    "Dataset",
    "DegenerateResponse",
    "DegenerateV1",
    "DimensionMismatch",
    "DualPoint",
    "GroupLayout",
    "InvalidSpec",
    "KKT_SLACK",
    "LambdaGrid",
    "MaxItersExceeded",
    "NoConvergence",
    "NonFiniteInput",
    "ParseError",
    "PathRecord",
    "PathResult",
    "PathStep",
    "PrimalSolution",
    "ProjectionProblem",
    "REPORT_COLUMNS",
    "RULE_DPP",
    "RULE_EDPP",
    "RULE_GROUP_EDPP",
    "RULE_IMP1",
    "RULE_IMP2",
    "RULE_NONE",
    "RULE_SAFE",
    "RULE_STRONG",
    "RuleTotals",
    "SEQUENTIAL_RULES",
    "SUMMARY_SENTINEL",
    "ScreenMask",
    "SolverConfig",
    "StrongScreenResult",
    "SyntheticSpec",
    "TruncatedFile",
    "VGeometry",
    "ZERO_THRESHOLD",
    "basic_screen",
    "center_and_scale",
    "compute_duality_gap",
    "compute_v1",
    "compute_v_geometry",
    "dykstra_project",
    "emit_report",
    "estimate_dual_ball",
    "generate_synthetic",
    "group_lambda_max",
    "group_sequential_screen",
    "group_spectral_norms",
    "iter_path",
    "lambda_max",
    "load_binary",
    "load_csv",
    "operator_norm_sq",
    "orthonormal_design_solution",
    "recover_dual_point",
    "reference_lasso_solve",
    "run_path_benchmark",
    "sample_feasible_points",
    "save_binary",
    "save_csv",
    "save_vector_csv",
    "scale_to_feasible",
    "screen_group_with_ball",
    "screen_safe_basic",
    "screen_strong_sequential",
    "screen_with_ball",
    "sequential_screen",
    "soft_threshold",
    "solve_group_lasso",
    "solve_lasso",
    "strong_rule_mask",
    "summary_lines",
    "validate_dataset",
]
