"""Independent verification machinery, used by tests only.

Dykstra's alternating projections compute the dual optimum as a projection
onto the feasible polytope, with no reference to any primal solver; a plain
proximal-gradient solver with backtracking provides a second independent
route to primal solutions. None of this is imported by the screening path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import Dataset, GroupLayout, InvalidSpec, NoConvergence, NonFiniteInput


@dataclass(frozen=True)
class ProjectionProblem:
    """A point to project plus the constraints defining the feasible set.

    Each constraint is a pair (arr, bound): a 1-D arr means the slab
    {theta : |arr . theta| <= bound}; a 2-D arr means the ellipsoid-like set
    {theta : ||arr.T theta||_2 <= bound}. The intersection always contains 0.
    """

    point: np.ndarray
    constraints: tuple

    def __post_init__(self):
        pt = np.asarray(self.point, dtype=np.float64)
        if pt.ndim != 1 or not np.isfinite(pt).all():
            raise NonFiniteInput("projection point must be a finite 1-D vector")
        if len(self.constraints) == 0:
            raise InvalidSpec("projection problem needs at least one constraint")
        cons = []
        for arr, bound in self.constraints:
            arr = np.asarray(arr, dtype=np.float64)
            if arr.shape[0] != pt.shape[0]:
                raise InvalidSpec(
                    f"constraint length {arr.shape[0]} does not match point "
                    f"length {pt.shape[0]}")
            if not (bound > 0):
                raise InvalidSpec(f"constraint bounds must be positive, got {bound}")
            cons.append((arr, float(bound)))
        object.__setattr__(self, "point", pt)
        object.__setattr__(self, "constraints", tuple(cons))

    @classmethod
    def lasso(cls, d: Dataset, point: np.ndarray) -> "ProjectionProblem":
        """Constraints |x_i . theta| <= 1 for every column of the design."""
        cons = tuple((d.x[:, i].copy(), 1.0) for i in range(d.n_features))
        return cls(point=point, constraints=cons)

    @classmethod
    def group(cls, d: Dataset, g: GroupLayout, point: np.ndarray) -> "ProjectionProblem":
        """Constraints ||X_g.T theta|| <= sqrt(group size) per group."""
        g.check_matches(d)
        cons = tuple((np.ascontiguousarray(d.x[:, g.slice(k)]), float(g.weights[k]))
                     for k in range(g.n_groups))
        return cls(point=point, constraints=cons)


@njit(cache=True)
def _dykstra_slabs(a, b, w, tol, max_cycles):
    """Dykstra over slab constraints only; rows of `a` are the directions.

    Returns (z, cycles_used, last_increment) where the increment is the
    largest coordinate move seen during the final cycle.
    """
    m, n = a.shape
    a_sq = np.empty(m)
    for c in range(m):
        s = 0.0
        for i in range(n):
            s += a[c, i] * a[c, i]
        a_sq[c] = s
    z = w.copy()
    q = np.zeros((m, n))
    u = np.empty(n)
    inc = np.inf
    for cycle in range(max_cycles):
        inc = 0.0
        for c in range(m):
            if a_sq[c] == 0.0:
                continue
            t = 0.0
            q_zero = True
            for i in range(n):
                ui = z[i] + q[c, i]
                u[i] = ui
                t += a[c, i] * ui
                if q[c, i] != 0.0:
                    q_zero = False
            bc = b[c]
            if t > bc:
                coef = (t - bc) / a_sq[c]
            elif t < -bc:
                coef = (t + bc) / a_sq[c]
            else:
                coef = 0.0
            if coef == 0.0 and q_zero:
                continue
            for i in range(n):
                zi = u[i] - coef * a[c, i]
                move = zi - z[i]
                if move < 0.0:
                    move = -move
                if move > inc:
                    inc = move
                z[i] = zi
                q[c, i] = coef * a[c, i]
        if inc <= tol:
            return z, cycle + 1, inc
    return z, max_cycles, inc


def _project_slab(arr: np.ndarray, bound: float, u: np.ndarray) -> np.ndarray:
    t = float(arr @ u)
    if abs(t) <= bound:
        return u
    excess = t - bound if t > 0 else t + bound
    return u - (excess / float(arr @ arr)) * arr


def _project_group_ball(arr: np.ndarray, bound: float, u: np.ndarray) -> np.ndarray:
    """Project u onto {z : ||arr.T z|| <= bound} via the Lagrange multiplier.

    The multiplier solves ||(I + mu arr.T arr)^-1 arr.T u|| = bound, found by
    bisection after doubling the initial bracket until it contains the root.
    """
    btu = arr.T @ u
    nb = float(np.linalg.norm(btu))
    if nb <= bound:
        return u
    evals, evecs = np.linalg.eigh(arr.T @ arr)
    c = evecs.T @ btu

    def resid_norm(mu: float) -> float:
        return float(np.linalg.norm(c / (1.0 + mu * evals)))

    hi = nb / bound
    while resid_norm(hi) > bound:
        hi *= 2.0
    lo = 0.0
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if resid_norm(mid) > bound:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    shrunk = evecs @ (c / (1.0 + mu * evals))
    return u - mu * (arr @ shrunk)


def _project_constraint(arr: np.ndarray, bound: float, u: np.ndarray) -> np.ndarray:
    if arr.ndim == 1:
        return _project_slab(arr, bound, u)
    return _project_group_ball(arr, bound, u)


def dykstra_project(p: ProjectionProblem, tol: float = 1e-8,
                    max_cycles: int = 50_000) -> np.ndarray:
    """Nearest point of the constraint intersection to p.point.

    Plain cyclic projection would only find *a* feasible point; Dykstra's
    correction terms make the limit the true nearest point. Convergence is
    declared when a full cycle moves no coordinate by more than tol.
    """
    if not (tol > 0):
        raise ValueError(f"tol must be positive, got {tol}")
    w = p.point
    if all(arr.ndim == 1 for arr, _ in p.constraints):
        a = np.ascontiguousarray(np.vstack([arr for arr, _ in p.constraints]))
        b = np.array([bound for _, bound in p.constraints])
        z, _, inc = _dykstra_slabs(a, b, w.copy(), tol, max_cycles)
        if inc > tol:
            raise NoConvergence(
                f"Dykstra increment {inc:.3e} > tol {tol:g} after {max_cycles} cycles")
        return z

    z = w.copy()
    corrections = [np.zeros_like(w) for _ in p.constraints]
    for _ in range(max_cycles):
        inc = 0.0
        for c, (arr, bound) in enumerate(p.constraints):
            u = z + corrections[c]
            z_new = _project_constraint(arr, bound, u)
            corrections[c] = u - z_new
            inc = max(inc, float(np.max(np.abs(z_new - z))))
            z = z_new
        if inc <= tol:
            return z
    raise NoConvergence(
        f"Dykstra increment {inc:.3e} > tol {tol:g} after {max_cycles} cycles")


def orthonormal_design_solution(y: np.ndarray, lam: float) -> np.ndarray:
    """Closed-form Lasso solution for an identity (or orthonormal) design."""
    y = np.asarray(y, dtype=np.float64)
    return np.sign(y) * np.maximum(np.abs(y) - lam, 0.0)


def sample_feasible_points(p: ProjectionProblem, count: int, seed: int) -> list[np.ndarray]:
    """Deterministic feasible points: the origin, then scaled Gaussian directions.

    Each draw is divided by its worst constraint ratio when that exceeds 1,
    so every returned point is feasible (many sit on the boundary).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    n = p.point.shape[0]
    rng = np.random.default_rng(seed)
    points = [np.zeros(n)]
    for _ in range(count - 1):
        direction = rng.standard_normal(n)
        s = 0.0
        for arr, bound in p.constraints:
            if arr.ndim == 1:
                ratio = abs(float(arr @ direction)) / bound
            else:
                ratio = float(np.linalg.norm(arr.T @ direction)) / bound
            s = max(s, ratio)
        points.append(direction / s if s > 1.0 else direction)
    return points


def reference_lasso_solve(d: Dataset, lam: float, gap_tol: float = 1e-12,
                          max_iters: int = 500_000) -> np.ndarray:
    """Proximal gradient with backtracking, run to an absolute-free relative gap.

    Second, solver-independent route to the Lasso optimum; the duality gap is
    recomputed here from scratch. gap_tol is relative to (1/2)*||y||^2.
    """
    x, y = d.x, d.y
    n, p = x.shape
    beta = np.zeros(p)
    r = y.copy()
    lip = 1.0
    half_y_sq = 0.5 * float(y @ y)
    threshold = gap_tol * half_y_sq
    for it in range(max_iters):
        grad = -(x.T @ r)
        f_beta = 0.5 * float(r @ r)
        while True:
            cand = beta - grad / lip
            cand = np.sign(cand) * np.maximum(np.abs(cand) - lam / lip, 0.0)
            delta = cand - beta
            r_cand = y - x @ cand
            f_cand = 0.5 * float(r_cand @ r_cand)
            bound = f_beta + float(grad @ delta) + 0.5 * lip * float(delta @ delta)
            if f_cand <= bound + 1e-15 * max(1.0, abs(bound)):
                break
            lip *= 2.0
        beta = cand
        r = r_cand
        if it % 20 == 0 or it == max_iters - 1:
            theta = r / lam
            s = float(np.max(np.abs(x.T @ theta))) if p else 0.0
            if s > 1.0:
                theta = theta / s
            primal = 0.5 * float(r @ r) + lam * float(np.abs(beta).sum())
            diff = theta - y / lam
            dual = half_y_sq - 0.5 * lam * lam * float(diff @ diff)
            if primal - dual <= threshold:
                return beta
    raise NoConvergence(f"reference solver failed to reach gap {gap_tol:g} "
                        f"within {max_iters} iterations")
