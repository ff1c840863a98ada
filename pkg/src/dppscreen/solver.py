"""Gap-certified solvers: cyclic coordinate descent for the Lasso, FISTA for the group Lasso.

Both solvers stop on the duality gap rather than coefficient change, because
every safety argument downstream leans on the accuracy of the recovered dual
point, not on primal stationarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import (
    Dataset,
    DimensionMismatch,
    DualPoint,
    GroupLayout,
    InvalidSpec,
    MaxItersExceeded,
    NonFiniteInput,
    PrimalSolution,
)


@dataclass(frozen=True)
class SolverConfig:
    """Stopping control shared by both solvers.

    gap_tol is relative: iteration stops once the duality gap falls below
    gap_tol * (1/2)*||y||^2. The gap is evaluated every check_every sweeps
    (coordinate descent) or iterations (FISTA).
    """

    gap_tol: float = 1e-8
    max_iters: int = 100_000
    check_every: int = 10

    def __post_init__(self):
        if not (self.gap_tol > 0):
            raise InvalidSpec(f"gap_tol must be > 0, got {self.gap_tol}")
        if self.max_iters < 1:
            raise InvalidSpec(f"max_iters must be >= 1, got {self.max_iters}")
        if self.check_every < 1:
            raise InvalidSpec(f"check_every must be >= 1, got {self.check_every}")


def soft_threshold(z, t):
    """sign(z) * max(|z| - t, 0); accepts scalars or arrays."""
    if t < 0:
        raise ValueError(f"threshold must be >= 0, got {t}")
    shrunk = np.sign(z) * np.maximum(np.abs(z) - t, 0.0)
    if np.isscalar(z) or np.ndim(z) == 0:
        return float(shrunk)
    return shrunk


def operator_norm_sq(x: np.ndarray, max_iters: int = 30, tol: float = 1e-10) -> float:
    """Largest eigenvalue of x.T @ x by power iteration from a fixed seeded start.

    Iterates in the smaller of the two dimensions; stops early once the
    Rayleigh quotient is stable to `tol` relative.
    """
    n, p = x.shape
    rng = np.random.default_rng(0)
    v = rng.standard_normal(min(n, p))
    nv = np.linalg.norm(v)
    if nv == 0.0:  # cannot happen for a continuous draw; guard anyway
        return 0.0
    v /= nv
    est = 0.0
    for _ in range(max_iters):
        if p <= n:
            w = x.T @ (x @ v)
        else:
            w = x @ (x.T @ v)
        new_est = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(new_est - est) <= tol * max(abs(new_est), 1e-300):
            est = new_est
            break
        est = new_est
    return max(est, 0.0)


@njit(cache=True)
def _cd_block(x, y, lam, beta, r, col_sq, n_sweeps, obj_prev):
    """Run n_sweeps full coordinate sweeps in place; r must equal y - x @ beta.

    Returns (worst objective increase seen at any sweep boundary, final
    objective). Exact per-coordinate minimization cannot increase the
    objective, so any increase beyond rounding noise is a bug.
    """
    n, p = x.shape
    worst = 0.0
    for _ in range(n_sweeps):
        for j in range(p):
            cj = col_sq[j]
            if cj <= 0.0:
                continue
            xj = x[:, j]
            old = beta[j]
            z = old * cj
            for i in range(n):
                z += xj[i] * r[i]
            mag = abs(z) - lam
            new = 0.0
            if mag > 0.0:
                new = mag / cj if z > 0.0 else -mag / cj
            d = new - old
            if d != 0.0:
                for i in range(n):
                    r[i] -= d * xj[i]
                beta[j] = new
        obj = 0.0
        for i in range(n):
            obj += r[i] * r[i]
        obj *= 0.5
        for j in range(p):
            obj += lam * abs(beta[j])
        inc = obj - obj_prev
        if inc > worst:
            worst = inc
        obj_prev = obj
    return worst, obj_prev


def _lasso_objective(d: Dataset, beta: np.ndarray, lam: float, r: np.ndarray) -> float:
    return 0.5 * float(r @ r) + lam * float(np.abs(beta).sum())


def _prepare_warm_start(d: Dataset, warm_start) -> np.ndarray:
    if warm_start is None:
        return np.zeros(d.n_features)
    beta = np.array(warm_start, dtype=np.float64)
    if beta.shape != (d.n_features,):
        raise DimensionMismatch(
            f"warm start has shape {beta.shape}, expected ({d.n_features},)")
    if not np.isfinite(beta).all():
        raise NonFiniteInput("warm start contains NaN or inf")
    return beta


def solve_lasso(d: Dataset, lam: float, warm_start=None,
                cfg: SolverConfig | None = None) -> PrimalSolution:
    """Cyclic coordinate descent with exact per-coordinate soft-threshold updates.

    Returns a solution whose duality gap is certified below
    cfg.gap_tol * (1/2)*||y||^2; raises MaxItersExceeded (carrying the best
    iterate and its gap) otherwise. lam >= lambda_max short-circuits to the
    exact all-zero solution.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    cfg = cfg or SolverConfig()
    lam_max = float(np.max(np.abs(d.x.T @ d.y))) if d.n_features else 0.0
    if lam >= lam_max:
        return PrimalSolution(beta=np.zeros(d.n_features), lam=lam,
                              duality_gap=0.0, n_iters=0)

    gap_threshold = cfg.gap_tol * 0.5 * d.y_norm ** 2
    beta = _prepare_warm_start(d, warm_start)
    r = d.y - d.x @ beta if beta.any() else d.y.copy()
    col_sq = d.col_norms ** 2
    obj = _lasso_objective(d, beta, lam, r)
    # any single sweep is exact minimization per coordinate, so increases can
    # only come from float noise in the maintained residual
    slack = 1e-9 * (1.0 + 0.5 * d.y_norm ** 2)

    done = 0
    gap = np.inf
    while done < cfg.max_iters:
        block = min(cfg.check_every, cfg.max_iters - done)
        worst, obj = _cd_block(d.x, d.y, lam, beta, r, col_sq, block, obj)
        if worst > slack:
            raise AssertionError(
                f"coordinate descent objective increased by {worst:.3e} in a sweep")
        done += block
        r = d.y - d.x @ beta  # resync maintained residual before certifying
        obj = _lasso_objective(d, beta, lam, r)
        gap = compute_duality_gap(d, beta, lam)
        if gap <= gap_threshold:
            return PrimalSolution(beta=beta, lam=lam, duality_gap=float(gap),
                                  n_iters=done)
    raise MaxItersExceeded(
        f"lasso solver hit {cfg.max_iters} sweeps at lambda={lam:g} "
        f"(gap {gap:.3e}, threshold {gap_threshold:.3e})",
        beta=beta, duality_gap=float(gap), n_iters=done)


def _group_prox(u: np.ndarray, g: GroupLayout, thresholds: np.ndarray) -> np.ndarray:
    """Block soft-threshold: shrink each group's norm by its threshold."""
    out = np.zeros_like(u)
    offsets = g.offsets
    for k in range(g.n_groups):
        lo, hi = offsets[k], offsets[k + 1]
        block = u[lo:hi]
        nb = np.linalg.norm(block)
        if nb > thresholds[k]:
            out[lo:hi] = (1.0 - thresholds[k] / nb) * block
    return out


def _group_lambda_max_value(d: Dataset, g: GroupLayout) -> float:
    xty = d.x.T @ d.y
    best = 0.0
    for k in range(g.n_groups):
        sl = g.slice(k)
        best = max(best, float(np.linalg.norm(xty[sl])) / float(g.weights[k]))
    return best


def solve_group_lasso(d: Dataset, g: GroupLayout, lam: float, warm_start=None,
                      cfg: SolverConfig | None = None) -> PrimalSolution:
    """FISTA with step 1/L and momentum restarts; L from power iteration.

    The per-group penalty weight is sqrt(group size). lam >= the group
    lambda_max short-circuits to the exact zero solution.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    g.check_matches(d)
    cfg = cfg or SolverConfig()
    if lam >= _group_lambda_max_value(d, g):
        return PrimalSolution(beta=np.zeros(d.n_features), lam=lam,
                              duality_gap=0.0, n_iters=0)

    gap_threshold = cfg.gap_tol * 0.5 * d.y_norm ** 2
    # 1% headroom on the power-iteration estimate keeps the step below 1/L
    # even when the top of the spectrum has not fully converged
    lip = operator_norm_sq(d.x) * 1.01
    step = 1.0 / lip
    thresholds = lam * step * g.weights

    beta = _prepare_warm_start(d, warm_start)
    z = beta.copy()
    t = 1.0
    done = 0
    gap = np.inf
    x, y = d.x, d.y
    while done < cfg.max_iters:
        block = min(cfg.check_every, cfg.max_iters - done)
        for _ in range(block):
            grad = x.T @ (x @ z - y)
            beta_new = _group_prox(z - step * grad, g, thresholds)
            if float((z - beta_new) @ (beta_new - beta)) > 0.0:
                # momentum points uphill: restart acceleration
                t = 1.0
                z = beta_new.copy()
            else:
                t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
                z = beta_new + ((t - 1.0) / t_next) * (beta_new - beta)
                t = t_next
            beta = beta_new
        done += block
        gap = compute_duality_gap(d, beta, lam, g)
        if gap <= gap_threshold:
            return PrimalSolution(beta=beta, lam=lam, duality_gap=float(gap),
                                  n_iters=done)
    raise MaxItersExceeded(
        f"group lasso solver hit {cfg.max_iters} iterations at lambda={lam:g} "
        f"(gap {gap:.3e}, threshold {gap_threshold:.3e})",
        beta=beta, duality_gap=float(gap), n_iters=done)


def scale_to_feasible(d: Dataset, theta_hat: np.ndarray,
                      g: GroupLayout | None = None,
                      lam: float = float("nan")) -> DualPoint:
    """Shrink theta_hat into the dual feasible set by its worst constraint ratio.

    The recorded feasibility_slack is the pre-scaling violation: s - 1 where
    s is the largest constraint ratio (<= 0 means already feasible).
    """
    theta_hat = np.asarray(theta_hat, dtype=np.float64)
    if theta_hat.shape != (d.n_samples,):
        raise DimensionMismatch(
            f"dual point has shape {theta_hat.shape}, expected ({d.n_samples},)")
    if not np.isfinite(theta_hat).all():
        raise NonFiniteInput("dual point contains NaN or inf")
    products = d.x.T @ theta_hat
    if g is None:
        s = float(np.max(np.abs(products))) if products.size else 0.0
    else:
        g.check_matches(d)
        s = 0.0
        for k in range(g.n_groups):
            sl = g.slice(k)
            s = max(s, float(np.linalg.norm(products[sl])) / float(g.weights[k]))
    theta = theta_hat / s if s > 1.0 else theta_hat
    return DualPoint(theta=theta, lam=lam, feasibility_slack=s - 1.0)


def recover_dual_point(d: Dataset, beta: np.ndarray, lam: float,
                       g: GroupLayout | None = None) -> DualPoint:
    """Dual estimate (y - X beta)/lam from the KKT identity, scaled feasible."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (d.n_features,):
        raise DimensionMismatch(
            f"beta has shape {beta.shape}, expected ({d.n_features},)")
    theta_hat = (d.y - d.x @ beta) / lam
    return scale_to_feasible(d, theta_hat, g, lam=lam)


def compute_duality_gap(d: Dataset, beta: np.ndarray, lam: float,
                        g: GroupLayout | None = None) -> float:
    """Primal objective minus dual objective at the scaled residual dual point.

    The true gap is nonnegative for any feasible dual point; the computed
    difference is clamped at zero so rounding can't leak a negative value.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    beta = np.asarray(beta, dtype=np.float64)
    r = d.y - d.x @ beta
    if g is None:
        penalty = float(np.abs(beta).sum())
    else:
        penalty = 0.0
        for k in range(g.n_groups):
            penalty += float(g.weights[k]) * float(np.linalg.norm(beta[g.slice(k)]))
    primal = 0.5 * float(r @ r) + lam * penalty
    theta = scale_to_feasible(d, r / lam, g, lam=lam).theta
    diff = theta - d.y / lam
    dual = 0.5 * d.y_norm ** 2 - 0.5 * lam * lam * float(diff @ diff)
    return max(primal - dual, 0.0)
