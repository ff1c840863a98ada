import numpy as np

from dppscreen import (
    Dataset,
    SolverConfig,
    SyntheticSpec,
    center_and_scale,
    generate_synthetic,
    validate_dataset,
)

TIGHT = SolverConfig(gap_tol=1e-12, max_iters=400_000)

_acceptance_results = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    _acceptance_results.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_results:
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{name}: {verdict}")


def identity_dataset() -> Dataset:
    """The 2x2 identity design used for hand-checked values."""
    return validate_dataset(np.eye(2), np.array([3.0, 4.0]))


def make_instance(seed, n, p, nnz, sigma=0.1, correlation="iid", rho=0.0,
                  unit_columns=False):
    spec = SyntheticSpec(n=n, p=p, nnz=nnz, sigma=sigma,
                         correlation=correlation, rho=rho, seed=seed)
    d, beta_true = generate_synthetic(spec)
    if unit_columns:
        d = center_and_scale(d, center=False, scale=True)
    return d, beta_true
