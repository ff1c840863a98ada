"""Shared domain types: datasets, group layouts, regularization grids, results."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class DimensionMismatch(ValueError):
    """Array shapes are inconsistent with each other or with a group layout."""


class NonFiniteInput(ValueError):
    """An input array contains NaN or infinity."""


class DegenerateResponse(ValueError):
    """The response is orthogonal to every feature, so lambda_max would be 0."""


class DegenerateV1(ValueError):
    """The reference direction of the dual geometry has zero norm."""


class InvalidSpec(ValueError):
    """A configuration object fails validation."""


class ParseError(ValueError):
    """A text input could not be parsed; carries row/col when known."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col


class BadMagic(ValueError):
    """A binary file does not start with the expected magic bytes."""


class TruncatedFile(ValueError):
    """A binary file ended before all declared payload bytes were read."""


class NoConvergence(RuntimeError):
    """An iterative oracle failed to reach its tolerance within its cycle budget."""


class MaxItersExceeded(RuntimeError):
    """A solver ran out of iterations; carries the best iterate and its gap."""

    def __init__(self, message: str, beta: np.ndarray | None = None,
                 duality_gap: float = float("nan"), n_iters: int = 0):
        super().__init__(message)
        self.beta = beta
        self.duality_gap = duality_gap
        self.n_iters = n_iters


RULE_NONE = "none"
RULE_DPP = "dpp"
RULE_IMP1 = "imp1"
RULE_IMP2 = "imp2"
RULE_EDPP = "edpp"
RULE_SAFE = "safe"
RULE_STRONG = "strong"
RULE_GROUP_EDPP = "group_edpp"

BALL_RULES = (RULE_DPP, RULE_IMP1, RULE_IMP2, RULE_EDPP)
SEQUENTIAL_RULES = BALL_RULES + (RULE_SAFE, RULE_STRONG)
ALL_RULES = SEQUENTIAL_RULES + (RULE_GROUP_EDPP, RULE_NONE)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Immutable design matrix and response with cached column norms.

    Construct through :func:`validate_dataset`; the fields are assumed
    consistent and the arrays are read-only.
    """

    x: np.ndarray          # (n_samples, n_features), float64, column-major
    y: np.ndarray          # (n_samples,), float64
    col_norms: np.ndarray  # (n_features,), Euclidean norm of each column
    y_norm: float

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    @cached_property
    def zero_norm_cols(self) -> np.ndarray:
        """Indices of all-zero columns; permitted, but screened unconditionally."""
        return np.flatnonzero(self.col_norms == 0.0)

    def column(self, i: int) -> np.ndarray:
        return self.x[:, i]


def validate_dataset(x: np.ndarray, y: np.ndarray) -> Dataset:
    """Check shapes and finiteness, then build an immutable Dataset.

    The design matrix is stored column-major because every hot path walks
    columns (per-feature dot products).

    Raises DimensionMismatch on shape problems and NonFiniteInput on NaN/inf.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"design matrix must be 2-D, got ndim={x.ndim}")
    if y.ndim != 1:
        raise DimensionMismatch(f"response must be 1-D, got ndim={y.ndim}")
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch(
            f"row count mismatch: x has {x.shape[0]} rows, y has {y.shape[0]}")
    if x.shape[0] < 1 or x.shape[1] < 1:
        raise DimensionMismatch(f"empty dataset: shape {x.shape}")
    if not np.isfinite(x).all():
        raise NonFiniteInput("design matrix contains NaN or inf")
    if not np.isfinite(y).all():
        raise NonFiniteInput("response contains NaN or inf")
    x = _readonly(np.asfortranarray(x))
    y = _readonly(np.ascontiguousarray(y))
    col_norms = _readonly(np.sqrt(np.einsum("ij,ij->j", x, x)))
    return Dataset(x=x, y=y, col_norms=col_norms, y_norm=float(np.linalg.norm(y)))


@dataclass(frozen=True)
class GroupLayout:
    """Contiguous, non-overlapping feature groups covering columns in order."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        if len(self.sizes) == 0:
            raise InvalidSpec("group layout needs at least one group")
        for s in self.sizes:
            if not isinstance(s, (int, np.integer)) or s < 1:
                raise InvalidSpec(f"group sizes must be positive integers, got {s!r}")
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))

    @property
    def n_groups(self) -> int:
        return len(self.sizes)

    @property
    def n_features(self) -> int:
        return sum(self.sizes)

    @cached_property
    def offsets(self) -> np.ndarray:
        """Start offset of each group plus a trailing total, length n_groups+1."""
        return np.concatenate(([0], np.cumsum(self.sizes)))

    @cached_property
    def weights(self) -> np.ndarray:
        """Penalty weight sqrt(size) for each group."""
        return np.sqrt(np.asarray(self.sizes, dtype=np.float64))

    def slice(self, g: int) -> slice:
        o = self.offsets
        return slice(int(o[g]), int(o[g + 1]))

    def check_matches(self, d: Dataset) -> None:
        if self.n_features != d.n_features:
            raise DimensionMismatch(
                f"group layout covers {self.n_features} features, "
                f"dataset has {d.n_features}")


@dataclass(frozen=True)
class LambdaGrid:
    """Descending regularization grid stored as ratios of lambda_max."""

    lambda_max: float
    ratios: np.ndarray  # strictly descending, each in (0, 1]

    def __post_init__(self):
        if not np.isfinite(self.lambda_max) or self.lambda_max <= 0:
            raise InvalidSpec(f"lambda_max must be positive and finite, got {self.lambda_max}")
        r = np.asarray(self.ratios, dtype=np.float64)
        if r.ndim != 1 or r.size == 0:
            raise InvalidSpec("ratios must be a non-empty 1-D array")
        if not np.isfinite(r).all():
            raise InvalidSpec("ratios must be finite")
        if r.max() > 1.0 or r.min() <= 0.0:
            raise InvalidSpec("ratios must lie in (0, 1]")
        if r.size > 1 and not (np.diff(r) < 0).all():
            raise InvalidSpec("ratios must be strictly descending")
        object.__setattr__(self, "ratios", _readonly(r))

    @cached_property
    def values(self) -> np.ndarray:
        return _readonly(self.lambda_max * self.ratios)

    @property
    def n_points(self) -> int:
        return self.ratios.size

    @classmethod
    def linear(cls, lambda_max: float, lo: float = 0.05, hi: float = 1.0,
               n_points: int = 100) -> "LambdaGrid":
        """Equally spaced ratios from hi down to lo."""
        if n_points < 1:
            raise InvalidSpec("n_points must be >= 1")
        return cls(lambda_max, np.linspace(hi, lo, n_points))

    @classmethod
    def geometric(cls, lambda_max: float, lo: float = 0.05, hi: float = 1.0,
                  n_points: int = 100) -> "LambdaGrid":
        """Log-spaced ratios from hi down to lo."""
        if n_points < 1:
            raise InvalidSpec("n_points must be >= 1")
        return cls(lambda_max, np.geomspace(hi, lo, n_points))

    def with_lambda_max_first(self) -> "LambdaGrid":
        """Return a grid whose first value is lambda_max, prepending if needed."""
        if abs(self.ratios[0] - 1.0) <= 1e-12:
            return self
        return LambdaGrid(self.lambda_max, np.concatenate(([1.0], self.ratios)))


@dataclass(frozen=True)
class PrimalSolution:
    """Converged primal iterate with its certified duality gap."""

    beta: np.ndarray
    lam: float
    duality_gap: float
    n_iters: int

    def __post_init__(self):
        object.__setattr__(self, "beta", _readonly(np.asarray(self.beta, dtype=np.float64)))

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.beta))


@dataclass(frozen=True)
class DualPoint:
    """A dual-feasible point; slack records constraint violation before scaling.

    feasibility_slack <= 0 means the unscaled estimate was already feasible.
    """

    theta: np.ndarray
    lam: float
    feasibility_slack: float

    def __post_init__(self):
        object.__setattr__(self, "theta", _readonly(np.asarray(self.theta, dtype=np.float64)))


@dataclass(frozen=True)
class BallEstimate:
    """A ball certified to contain the dual optimum at `lam`, anchored at `lam0`."""

    method: str
    center: np.ndarray
    radius: float
    lam: float
    lam0: float

    def __post_init__(self):
        if self.method not in (RULE_DPP, RULE_IMP1, RULE_IMP2, RULE_EDPP, RULE_GROUP_EDPP):
            raise InvalidSpec(f"unknown ball method {self.method!r}")
        if not np.isfinite(self.radius) or self.radius < 0:
            raise InvalidSpec(f"radius must be finite and >= 0, got {self.radius}")
        if not (0 < self.lam <= self.lam0):
            raise InvalidSpec(f"need 0 < lam <= lam0, got lam={self.lam}, lam0={self.lam0}")
        c = np.asarray(self.center, dtype=np.float64)
        if not np.isfinite(c).all():
            raise NonFiniteInput("ball center contains NaN or inf")
        object.__setattr__(self, "center", _readonly(c))


@dataclass(frozen=True)
class ScreenMask:
    """Per-feature (or per-group) discard decisions for one grid point."""

    discard: np.ndarray  # bool; True = certified/presumed inactive
    rule: str
    lam: float
    lam0: float | None = None

    def __post_init__(self):
        d = np.asarray(self.discard, dtype=bool)
        object.__setattr__(self, "discard", _readonly(d))

    @property
    def n_discarded(self) -> int:
        return int(self.discard.sum())

    @property
    def kept_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.discard)

    @property
    def discarded_indices(self) -> np.ndarray:
        return np.flatnonzero(self.discard)


@dataclass(frozen=True)
class PathRecord:
    """Per-grid-point outcome of a screened (or baseline) path run."""

    rule: str
    lam: float
    lam_ratio: float
    n_discarded: int
    n_true_zero: int
    rejection_ratio: float | None
    screen_seconds: float
    solver_seconds: float


@dataclass(frozen=True)
class RuleTotals:
    """Aggregate timings and counts for one rule across the whole path."""

    rule: str
    screen_seconds: float
    solver_seconds: float
    speedup: float
    n_discarded: int
    n_true_zero: int
    mean_rejection_ratio: float | None


@dataclass(frozen=True)
class PathResult:
    """All per-point records plus per-rule totals for one benchmark run."""

    records: tuple[PathRecord, ...]
    totals: tuple[RuleTotals, ...]

    def records_for(self, rule: str) -> list[PathRecord]:
        return [r for r in self.records if r.rule == rule]

    def totals_for(self, rule: str) -> RuleTotals:
        for t in self.totals:
            if t.rule == rule:
                return t
        raise KeyError(rule)
