import numpy as np
import pytest

from conftest import TIGHT, identity_dataset, make_instance
from dppscreen import (
    GroupLayout,
    InvalidSpec,
    NoConvergence,
    ProjectionProblem,
    dykstra_project,
    group_lambda_max,
    lambda_max,
    orthonormal_design_solution,
    reference_lasso_solve,
    sample_feasible_points,
    solve_group_lasso,
    solve_lasso,
)


def box_problem(point):
    """|theta_1| <= 1 and |theta_2| <= 1 via two slab constraints."""
    return ProjectionProblem(point=np.asarray(point, dtype=float),
                             constraints=((np.array([1.0, 0.0]), 1.0),
                                          (np.array([0.0, 1.0]), 1.0)))


def test_box_projection_hand_values():
    np.testing.assert_allclose(dykstra_project(box_problem([2.0, 0.0])),
                               [1.0, 0.0], atol=1e-9)
    np.testing.assert_allclose(dykstra_project(box_problem([2.0, 3.0])),
                               [1.0, 1.0], atol=1e-9)
    np.testing.assert_allclose(dykstra_project(box_problem([-5.0, 0.25])),
                               [-1.0, 0.25], atol=1e-9)


def test_interior_point_unchanged():
    z = dykstra_project(box_problem([0.5, -0.3]))
    np.testing.assert_allclose(z, [0.5, -0.3], atol=1e-12)


def test_single_slab_projection():
    # |3 t1 + 4 t2| <= 1; projecting (3, 4) lands at (3,4) - (24/25)(3,4)
    p = ProjectionProblem(point=np.array([3.0, 4.0]),
                          constraints=((np.array([3.0, 4.0]), 1.0),))
    np.testing.assert_allclose(dykstra_project(p), [0.12, 0.16], atol=1e-10)


def test_single_ellipsoid_projection():
    # ||arr^T theta|| <= 1 with arr = diag(2, 1): 4 t1^2 + t2^2 <= 1.
    # Projection of (2, 0): t1 = 2/(1+4mu) with 2 t1 = 1, so (0.5, 0).
    arr = np.array([[2.0, 0.0], [0.0, 1.0]])
    p = ProjectionProblem(point=np.array([2.0, 0.0]),
                          constraints=((arr, 1.0),))
    np.testing.assert_allclose(dykstra_project(p, tol=1e-10), [0.5, 0.0],
                               atol=1e-8)


def test_projection_membership_and_idempotence():
    d, _ = make_instance(seed=2, n=12, p=18, nnz=4)
    lam = 0.4 * lambda_max(d)[0]
    prob = ProjectionProblem.lasso(d, d.y / lam)
    tol = 1e-9
    z = dykstra_project(prob, tol=tol)
    products = d.x.T @ z
    assert np.max(np.abs(products)) <= 1.0 + 1e-7
    z2 = dykstra_project(ProjectionProblem.lasso(d, z), tol=tol)
    np.testing.assert_allclose(z2, z, atol=2e-7)


def test_projection_nonexpansive():
    d, _ = make_instance(seed=4, n=10, p=14, nnz=3)
    rng = np.random.default_rng(8)
    tol = 1e-9
    for _ in range(5):
        a = rng.standard_normal(10) * 2.0
        b = rng.standard_normal(10) * 2.0
        pa = dykstra_project(ProjectionProblem.lasso(d, a), tol=tol)
        pb = dykstra_project(ProjectionProblem.lasso(d, b), tol=tol)
        assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-7


def test_projection_ray_invariance():
    d, _ = make_instance(seed=6, n=10, p=16, nnz=3)
    tol = 1e-10
    w = d.y / (0.3 * lambda_max(d)[0])  # outside the feasible set
    pw = dykstra_project(ProjectionProblem.lasso(d, w), tol=tol)
    assert np.linalg.norm(w - pw) > 1e-6
    for t in (0.5, 2.0, 10.0):
        moved = pw + t * (w - pw)
        z = dykstra_project(ProjectionProblem.lasso(d, moved), tol=tol)
        np.testing.assert_allclose(z, pw, atol=2e-7)


def test_dykstra_matches_kkt_dual_lasso():
    d, _ = make_instance(seed=5, n=15, p=25, nnz=4)
    lam = 0.4 * lambda_max(d)[0]
    beta = reference_lasso_solve(d, lam)
    theta_kkt = (d.y - d.x @ beta) / lam
    theta_proj = dykstra_project(ProjectionProblem.lasso(d, d.y / lam), tol=1e-10)
    np.testing.assert_allclose(theta_proj, theta_kkt, atol=1e-6)


def test_dykstra_matches_kkt_dual_group():
    d, _ = make_instance(seed=3, n=30, p=24, nnz=6)
    g = GroupLayout((3, 5, 2, 8, 6))
    lam = 0.5 * group_lambda_max(d, g)[0]
    sol = solve_group_lasso(d, g, lam, cfg=TIGHT)
    theta_kkt = (d.y - d.x @ sol.beta) / lam
    theta_proj = dykstra_project(ProjectionProblem.group(d, g, d.y / lam),
                                 tol=1e-10)
    np.testing.assert_allclose(theta_proj, theta_kkt, atol=1e-6)


def test_no_convergence_raised_on_tiny_budget():
    d, _ = make_instance(seed=9, n=10, p=30, nnz=5, correlation="ar1", rho=0.9)
    prob = ProjectionProblem.lasso(d, d.y / (0.05 * lambda_max(d)[0]))
    with pytest.raises(NoConvergence):
        dykstra_project(prob, tol=1e-12, max_cycles=1)


def test_problem_validation():
    with pytest.raises(InvalidSpec):
        ProjectionProblem(point=np.zeros(2),
                          constraints=((np.array([1.0, 0.0]), 0.0),))
    with pytest.raises(InvalidSpec):
        ProjectionProblem(point=np.zeros(2), constraints=())


def test_orthonormal_design_solution_values():
    np.testing.assert_allclose(orthonormal_design_solution(
        np.array([3.0, 4.0]), 3.9), [0.0, 0.1], atol=1e-15)
    np.testing.assert_allclose(orthonormal_design_solution(
        np.array([3.0, -4.0]), 2.0), [1.0, -2.0], atol=1e-15)


def test_orthonormal_oracle_vs_solver_identity_design():
    d = identity_dataset()
    for lam in (0.5, 2.0, 3.99):
        sol = solve_lasso(d, lam, cfg=TIGHT)
        np.testing.assert_allclose(sol.beta,
                                   orthonormal_design_solution(d.y, lam),
                                   atol=1e-10)


def test_sample_feasible_points():
    d, _ = make_instance(seed=12, n=10, p=15, nnz=3)
    prob = ProjectionProblem.lasso(d, np.zeros(10))
    pts = sample_feasible_points(prob, 50, seed=99)
    assert len(pts) == 50
    np.testing.assert_array_equal(pts[0], np.zeros(10))
    for theta in pts:
        assert np.max(np.abs(d.x.T @ theta)) <= 1.0 + 1e-12
    again = sample_feasible_points(prob, 50, seed=99)
    for a, b in zip(pts, again):
        np.testing.assert_array_equal(a, b)


def test_reference_solver_agrees_with_main():
    d, _ = make_instance(seed=15, n=18, p=28, nnz=5)
    lam = 0.35 * lambda_max(d)[0]
    beta_ref = reference_lasso_solve(d, lam)
    sol = solve_lasso(d, lam, cfg=TIGHT)
    np.testing.assert_allclose(beta_ref, sol.beta, atol=1e-6)
