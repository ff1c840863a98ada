"""Screening rules for Lasso and group Lasso regularization paths.

The safe rules bound the dual optimum at a target lambda inside a ball built
from the dual point at a previously solved lambda; any feature whose worst
case correlation with the ball stays below the dual constraint level is
certifiably inactive and can be dropped before solving. The strong rule is a
cheaper heuristic that requires a KKT repair pass afterwards.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import (
    BALL_RULES,
    BallEstimate,
    Dataset,
    DegenerateResponse,
    DegenerateV1,
    DualPoint,
    GroupLayout,
    InvalidSpec,
    LambdaGrid,
    MaxItersExceeded,
    PrimalSolution,
    RULE_DPP,
    RULE_EDPP,
    RULE_GROUP_EDPP,
    RULE_IMP1,
    RULE_IMP2,
    RULE_NONE,
    RULE_SAFE,
    RULE_STRONG,
    ScreenMask,
)
from .solver import (
    SolverConfig,
    operator_norm_sq,
    recover_dual_point,
    solve_group_lasso,
    solve_lasso,
)

KKT_SLACK = 1e-7  # tolerance when re-checking discarded features' constraints


@dataclass(frozen=True)
class VGeometry:
    """The projection-path vectors behind the tighter ball estimates.

    v1 points along the ray whose projection stays fixed at theta0; v2 joins
    theta0 to the new unprojected dual candidate; v2_perp is v2 with its v1
    component removed.
    """

    v1: np.ndarray
    v2: np.ndarray
    v2_perp: np.ndarray
    lam0: float
    lam: float


@dataclass(frozen=True)
class StrongScreenResult:
    """Outcome of one strong-rule step: final mask, violators, and the solution."""

    mask: ScreenMask
    kkt_violations: tuple[int, ...]
    solution: PrimalSolution


def lambda_max(d: Dataset) -> tuple[float, int]:
    """Smallest lambda with an all-zero solution, and the first argmax feature."""
    products = np.abs(d.x.T @ d.y)
    value = float(products.max())
    if value == 0.0:
        raise DegenerateResponse("response is orthogonal to every feature")
    return value, int(np.argmax(products))


def group_lambda_max(d: Dataset, g: GroupLayout) -> tuple[float, int]:
    """Group analog: max over groups of ||X_g.T y|| / sqrt(group size)."""
    g.check_matches(d)
    xty = d.x.T @ d.y
    best, best_g = 0.0, 0
    for k in range(g.n_groups):
        value = float(np.linalg.norm(xty[g.slice(k)])) / float(g.weights[k])
        if value > best:
            best, best_g = value, k
    if best == 0.0:
        raise DegenerateResponse("response is orthogonal to every feature")
    return best, best_g


def _unwrap(theta0) -> np.ndarray:
    if isinstance(theta0, DualPoint):
        return theta0.theta
    return np.asarray(theta0, dtype=np.float64)


def compute_v1(d: Dataset, theta0, lambda0: float,
               g: GroupLayout | None = None) -> np.ndarray:
    """Direction along which the dual projection is known not to move.

    For lambda0 strictly inside (0, lambda_max) this is y/lambda0 - theta0;
    at lambda0 = lambda_max (relative tolerance 1e-12) it is the normal-cone
    direction built from the argmax feature (or argmax group block).
    """
    theta = _unwrap(theta0)
    if g is None:
        lmax, idx = lambda_max(d)
    else:
        lmax, idx = group_lambda_max(d, g)
    if not (0 < lambda0 <= lmax * (1.0 + 1e-12)):
        raise ValueError(f"lambda0 must lie in (0, lambda_max], got {lambda0}")
    if abs(lambda0 / lmax - 1.0) <= 1e-12:
        if g is None:
            col = d.x[:, idx]
            return float(np.sign(col @ d.y)) * col
        block = d.x[:, g.slice(idx)]
        return block @ (block.T @ d.y)
    return d.y / lambda0 - theta


def compute_v_geometry(d: Dataset, theta0, lambda0: float, lam: float,
                       g: GroupLayout | None = None) -> VGeometry:
    """v1, v2 and the orthogonalized v2_perp for the (lambda0 -> lam) step."""
    if not (0 < lam <= lambda0):
        raise ValueError(f"need 0 < lam <= lambda0, got lam={lam}, lambda0={lambda0}")
    theta = _unwrap(theta0)
    v1 = compute_v1(d, theta, lambda0, g)
    n1_sq = float(v1 @ v1)
    if n1_sq == 0.0:
        raise DegenerateV1("reference direction v1 has zero norm")
    v2 = d.y / lam - theta
    v2_perp = v2 - (float(v1 @ v2) / n1_sq) * v1
    # second orthogonalization pass scrubs rounding residue when v2 is
    # nearly parallel to v1 (adjacent grid points)
    v2_perp = v2_perp - (float(v1 @ v2_perp) / n1_sq) * v1
    return VGeometry(v1=v1, v2=v2, v2_perp=v2_perp, lam0=lambda0, lam=lam)


def estimate_dual_ball(method: str, d: Dataset, theta0, lambda0: float,
                       lam: float, g: GroupLayout | None = None) -> BallEstimate:
    """Ball certified to contain the dual optimum at lam.

    dpp: center theta0, radius |1/lam - 1/lambda0|*||y||.
    imp1: center theta0, radius ||v2_perp||.
    imp2: both the center shift and the radius halve the dpp ball along y.
    edpp / group_edpp: center theta0 + v2_perp/2, radius ||v2_perp||/2.
    """
    method = method.lower()
    theta = _unwrap(theta0)
    if method == RULE_GROUP_EDPP and g is None:
        raise InvalidSpec("group_edpp ball needs a GroupLayout")
    if method == RULE_DPP:
        center = theta
        radius = abs(1.0 / lam - 1.0 / lambda0) * d.y_norm
    elif method == RULE_IMP1:
        geom = compute_v_geometry(d, theta, lambda0, lam)
        center = theta
        radius = float(np.linalg.norm(geom.v2_perp))
    elif method == RULE_IMP2:
        center = theta + 0.5 * (1.0 / lam - 1.0 / lambda0) * d.y
        radius = 0.5 * abs(1.0 / lam - 1.0 / lambda0) * d.y_norm
    elif method in (RULE_EDPP, RULE_GROUP_EDPP):
        geom = compute_v_geometry(d, theta, lambda0, lam,
                                  g if method == RULE_GROUP_EDPP else None)
        center = theta + 0.5 * geom.v2_perp
        radius = 0.5 * float(np.linalg.norm(geom.v2_perp))
    else:
        raise ValueError(f"unknown ball method {method!r}")
    return BallEstimate(method=method, center=center, radius=radius,
                        lam=lam, lam0=lambda0)


def screen_with_ball(d: Dataset, ball: BallEstimate,
                     safety_margin: float = 0.0) -> ScreenMask:
    """Discard feature i when |x_i . center| < 1 - radius*||x_i||.

    The inequality is the worst case of the dual constraint over the ball;
    strict float comparison, with an optional extra margin (in units of
    ||x_i||) for callers worried about solver inexactness. Zero-norm columns
    always fail the constraint test and are always discarded.
    """
    products = np.abs(d.x.T @ ball.center)
    threshold = 1.0 - (ball.radius + safety_margin) * d.col_norms
    return ScreenMask(discard=products < threshold, rule=ball.method,
                      lam=ball.lam, lam0=ball.lam0)


def group_spectral_norms(d: Dataset, g: GroupLayout) -> np.ndarray:
    """Spectral norm of each group block, power-iterated once and cached."""
    g.check_matches(d)
    cache = d.__dict__.setdefault("_group_spectral_norms", {})
    norms = cache.get(g.sizes)
    if norms is None:
        norms = np.array([
            np.sqrt(operator_norm_sq(np.ascontiguousarray(d.x[:, g.slice(k)])))
            for k in range(g.n_groups)])
        norms.setflags(write=False)
        cache[g.sizes] = norms
    return norms


def screen_group_with_ball(d: Dataset, g: GroupLayout, ball: BallEstimate,
                           spectral_norms: np.ndarray | None = None,
                           safety_margin: float = 0.0) -> ScreenMask:
    """Group test: discard g when ||X_g.T center|| < sqrt(n_g) - radius*||X_g||_2."""
    if spectral_norms is None:
        spectral_norms = group_spectral_norms(d, g)
    products = d.x.T @ ball.center
    discard = np.empty(g.n_groups, dtype=bool)
    for k in range(g.n_groups):
        lhs = float(np.linalg.norm(products[g.slice(k)]))
        rhs = float(g.weights[k]) - (ball.radius + safety_margin) * float(spectral_norms[k])
        discard[k] = lhs < rhs
    return ScreenMask(discard=discard, rule=ball.method, lam=ball.lam, lam0=ball.lam0)


def screen_safe_basic(d: Dataset, lam: float) -> ScreenMask:
    """The classic SAFE test from the feature correlations with y alone."""
    lmax, _ = lambda_max(d)
    if not (0 < lam <= lmax):
        raise ValueError(f"lambda must lie in (0, lambda_max], got {lam}")
    products = np.abs(d.x.T @ d.y)
    threshold = lam - d.col_norms * d.y_norm * (lmax - lam) / lmax
    return ScreenMask(discard=products < threshold, rule=RULE_SAFE,
                      lam=lam, lam0=lmax)


def strong_rule_mask(d: Dataset, beta_prev: np.ndarray, lambda_prev: float,
                     lam: float) -> ScreenMask:
    """The raw sequential strong-rule inequality, with no KKT repair.

    Heuristic: can discard active features; callers must re-check KKT.
    """
    if not (0 < lam <= lambda_prev):
        raise ValueError(f"need 0 < lam <= lambda_prev, got {lam}, {lambda_prev}")
    beta_prev = np.asarray(beta_prev, dtype=np.float64)
    r = d.y - d.x @ beta_prev
    products = np.abs(d.x.T @ r)
    return ScreenMask(discard=products < 2.0 * lam - lambda_prev,
                      rule=RULE_STRONG, lam=lam, lam0=lambda_prev)


def _reduced_dataset(d: Dataset, keep: np.ndarray) -> Dataset:
    x = np.asfortranarray(d.x[:, keep])
    x.setflags(write=False)
    norms = d.col_norms[keep].copy()
    norms.setflags(write=False)
    return Dataset(x=x, y=d.y, col_norms=norms, y_norm=d.y_norm)


def _solve_reduced(d: Dataset, lam: float, discard: np.ndarray,
                   warm_full: np.ndarray | None, cfg: SolverConfig,
                   g: GroupLayout | None = None) -> PrimalSolution:
    """Solve with the discarded features removed, then zero-pad back.

    The recorded duality gap certifies the reduced problem. `discard` is
    per-feature for the Lasso and per-group for the group Lasso.
    """
    if g is None:
        keep = ~discard
    else:
        keep = np.repeat(~discard, g.sizes)
    if not keep.any():
        return PrimalSolution(beta=np.zeros(d.n_features), lam=lam,
                              duality_gap=0.0, n_iters=0)
    sub = _reduced_dataset(d, keep)
    warm = warm_full[keep] if warm_full is not None else None
    if g is None:
        sol = solve_lasso(sub, lam, warm_start=warm, cfg=cfg)
    else:
        sub_layout = GroupLayout(tuple(s for s, drop in zip(g.sizes, discard) if not drop))
        sol = solve_group_lasso(sub, sub_layout, lam, warm_start=warm, cfg=cfg)
    beta = np.zeros(d.n_features)
    beta[keep] = sol.beta
    return PrimalSolution(beta=beta, lam=lam, duality_gap=sol.duality_gap,
                          n_iters=sol.n_iters)


def _kkt_violations(d: Dataset, beta_full: np.ndarray, lam: float,
                    discard: np.ndarray) -> list[int]:
    """Discarded features whose dual constraint is violated by the reduced dual.

    The dual candidate is scaled by the kept columns only; scaling by all
    columns would mask exactly the violations this check exists to find.
    """
    theta = (d.y - d.x @ beta_full) / lam
    products = d.x.T @ theta
    kept = ~discard
    s = float(np.max(np.abs(products[kept]))) if kept.any() else 0.0
    if s > 1.0:
        products = products / s
    return [int(i) for i in np.flatnonzero(discard)
            if abs(products[i]) > 1.0 + KKT_SLACK]


def screen_strong_sequential(d: Dataset, beta_prev: np.ndarray,
                             lambda_prev: float, lam: float,
                             cfg: SolverConfig | None = None) -> StrongScreenResult:
    """One strong-rule step: heuristic mask, reduced solve, KKT repair loop.

    Violators are returned to the problem and it is re-solved until the mask
    is clean, so the reported solution always matches the unscreened one.
    """
    cfg = cfg or SolverConfig()
    beta_prev = np.asarray(beta_prev, dtype=np.float64)
    discard = strong_rule_mask(d, beta_prev, lambda_prev, lam).discard.copy()
    violations: list[int] = []
    while True:
        sol = _solve_reduced(d, lam, discard, beta_prev, cfg)
        viol = _kkt_violations(d, sol.beta, lam, discard)
        if not viol:
            break
        violations.extend(viol)
        discard[viol] = False
    mask = ScreenMask(discard=discard, rule=RULE_STRONG, lam=lam, lam0=lambda_prev)
    return StrongScreenResult(mask=mask, kkt_violations=tuple(violations),
                              solution=sol)


@dataclass(frozen=True)
class PathStep:
    """One grid point of a screened path, with timing split out."""

    index: int
    lam: float
    mask: ScreenMask
    solution: PrimalSolution
    screen_seconds: float
    solver_seconds: float
    kkt_violations: tuple[int, ...] = ()


def _check_grid(d: Dataset, grid: LambdaGrid, g: GroupLayout | None) -> LambdaGrid:
    lmax = group_lambda_max(d, g)[0] if g is not None else lambda_max(d)[0]
    if abs(grid.lambda_max / lmax - 1.0) > 1e-9:
        raise InvalidSpec(
            f"grid lambda_max {grid.lambda_max:g} does not match the dataset's {lmax:g}")
    return grid.with_lambda_max_first()


def iter_path(rule: str, d: Dataset, grid: LambdaGrid,
              cfg: SolverConfig | None = None,
              g: GroupLayout | None = None) -> Iterator[PathStep]:
    """Walk the grid once, screening each point off the previous solution.

    The first step is the lambda_max seed: the solution is exactly zero, so
    every unit is discarded (nothing for rule "none"). Solver failures are
    re-raised with the grid index attached.
    """
    rule = rule.lower()
    cfg = cfg or SolverConfig()
    if g is not None:
        if rule not in (RULE_GROUP_EDPP, RULE_NONE):
            raise ValueError(f"group screening supports group_edpp/none, got {rule!r}")
        n_units = g.n_groups
        spectral = group_spectral_norms(d, g) if rule == RULE_GROUP_EDPP else None
    else:
        if rule not in (RULE_NONE, RULE_SAFE, RULE_STRONG) + BALL_RULES:
            raise ValueError(f"unknown sequential rule {rule!r}")
        n_units = d.n_features
        spectral = None
    grid = _check_grid(d, grid, g)
    values = grid.values

    seed_discard = np.zeros(n_units, dtype=bool) if rule == RULE_NONE \
        else np.ones(n_units, dtype=bool)
    mask = ScreenMask(discard=seed_discard, rule=rule, lam=float(values[0]),
                      lam0=float(values[0]))
    solution = PrimalSolution(beta=np.zeros(d.n_features), lam=float(values[0]),
                              duality_gap=0.0, n_iters=0)
    yield PathStep(index=0, lam=float(values[0]), mask=mask, solution=solution,
                   screen_seconds=0.0, solver_seconds=0.0)

    beta_prev = solution.beta
    lam_prev = float(values[0])
    for k in range(1, values.size):
        lam = float(values[k])
        violations: tuple[int, ...] = ()
        try:
            if rule == RULE_STRONG:
                mask, violations, solution, screen_s, solve_s = _strong_step(
                    d, beta_prev, lam_prev, lam, cfg)
            else:
                t0 = time.perf_counter()
                if rule == RULE_NONE:
                    mask = ScreenMask(discard=np.zeros(n_units, dtype=bool),
                                      rule=rule, lam=lam, lam0=lam_prev)
                elif rule == RULE_SAFE:
                    mask = screen_safe_basic(d, lam)
                elif rule == RULE_GROUP_EDPP:
                    theta0 = recover_dual_point(d, beta_prev, lam_prev, g)
                    ball = estimate_dual_ball(rule, d, theta0, lam_prev, lam, g)
                    mask = screen_group_with_ball(d, g, ball, spectral)
                else:
                    theta0 = recover_dual_point(d, beta_prev, lam_prev)
                    ball = estimate_dual_ball(rule, d, theta0, lam_prev, lam)
                    mask = screen_with_ball(d, ball)
                screen_s = time.perf_counter() - t0
                t0 = time.perf_counter()
                solution = _solve_reduced(d, lam, mask.discard, beta_prev, cfg, g)
                solve_s = time.perf_counter() - t0
        except MaxItersExceeded as e:
            raise MaxItersExceeded(
                f"grid index {k} (lambda={lam:g}): {e}",
                beta=e.beta, duality_gap=e.duality_gap, n_iters=e.n_iters) from e
        yield PathStep(index=k, lam=lam, mask=mask, solution=solution,
                       screen_seconds=screen_s, solver_seconds=solve_s,
                       kkt_violations=violations)
        beta_prev = solution.beta
        lam_prev = lam


def _strong_step(d: Dataset, beta_prev: np.ndarray, lam_prev: float,
                 lam: float, cfg: SolverConfig):
    """Strong-rule step with screen/solve time split across the repair loop."""
    t0 = time.perf_counter()
    discard = strong_rule_mask(d, beta_prev, lam_prev, lam).discard.copy()
    screen_s = time.perf_counter() - t0
    solve_s = 0.0
    violations: list[int] = []
    while True:
        t0 = time.perf_counter()
        sol = _solve_reduced(d, lam, discard, beta_prev, cfg)
        solve_s += time.perf_counter() - t0
        t0 = time.perf_counter()
        viol = _kkt_violations(d, sol.beta, lam, discard)
        screen_s += time.perf_counter() - t0
        if not viol:
            break
        violations.extend(viol)
        discard[viol] = False
    mask = ScreenMask(discard=discard, rule=RULE_STRONG, lam=lam, lam0=lam_prev)
    return mask, tuple(violations), sol, screen_s, solve_s


def sequential_screen(rule: str, d: Dataset, grid: LambdaGrid,
                      cfg: SolverConfig | None = None,
                      ) -> tuple[list[PrimalSolution], list[ScreenMask]]:
    """Screened path over the grid; returns per-point solutions and masks.

    The grid gets lambda_max prepended when absent, so the outputs may be one
    entry longer than the requested grid.
    """
    steps = list(iter_path(rule, d, grid, cfg))
    return [s.solution for s in steps], [s.mask for s in steps]


def group_sequential_screen(d: Dataset, g: GroupLayout, grid: LambdaGrid,
                            cfg: SolverConfig | None = None,
                            ) -> tuple[list[PrimalSolution], list[ScreenMask]]:
    """Group-EDPP screened path; masks are per-group."""
    steps = list(iter_path(RULE_GROUP_EDPP, d, grid, cfg, g=g))
    return [s.solution for s in steps], [s.mask for s in steps]


def basic_screen(rule: str, d: Dataset, lam: float) -> ScreenMask:
    """One-shot screening at lam anchored at lambda_max, with no prior solve.

    Ball rules use theta*(lambda_max) = y/lambda_max as the anchor; safe uses
    its own inequality; strong substitutes the zero solution into the
    sequential inequality (still heuristic: no KKT repair here).
    """
    rule = rule.lower()
    lmax, _ = lambda_max(d)
    if not (0 < lam <= lmax):
        raise ValueError(f"lambda must lie in (0, lambda_max], got {lam}")
    if rule == RULE_SAFE:
        return screen_safe_basic(d, lam)
    if rule == RULE_STRONG:
        return strong_rule_mask(d, np.zeros(d.n_features), lmax, lam)
    if rule == RULE_NONE:
        return ScreenMask(discard=np.zeros(d.n_features, dtype=bool),
                          rule=rule, lam=lam, lam0=lmax)
    if rule not in BALL_RULES:
        raise ValueError(f"unknown basic rule {rule!r}")
    theta0 = DualPoint(theta=d.y / lmax, lam=lmax, feasibility_slack=0.0)
    ball = estimate_dual_ball(rule, d, theta0, lmax, lam)
    return screen_with_ball(d, ball)
