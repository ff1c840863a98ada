"""Synthetic data generation, CSV and binary IO, and preprocessing.

Reproducibility contract: all randomness flows through Philox, a 64-bit
counter-based generator, keyed as (seed, stream). Column j draws from stream
j, so growing p never reshuffles earlier columns; coefficient placement and
noise use dedicated streams above 2^32. Gaussians come from the Marsaglia
polar transform over Philox uniforms, so any implementation of the same
scheme matches this one distributionally; bitwise equality is only promised
within this implementation.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .core import (
    BadMagic,
    Dataset,
    DimensionMismatch,
    InvalidSpec,
    ParseError,
    TruncatedFile,
    validate_dataset,
)

_MAGIC = b"DPPS"
_VERSION = 1

# streams 0..p-1 are the design columns; meta streams sit above 2^32
_STREAM_BETA = 2 ** 32
_STREAM_NOISE = 2 ** 32 + 1

CORR_IID = "iid"
CORR_AR1 = "ar1"


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic regression instance: y = X beta_true + sigma*eps."""

    n: int
    p: int
    nnz: int
    sigma: float = 0.1
    correlation: str = CORR_IID
    rho: float = 0.0
    seed: int = 0
    group_sizes: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise InvalidSpec(f"need n >= 1 and p >= 1, got n={self.n}, p={self.p}")
        if not (0 <= self.nnz <= self.p):
            raise InvalidSpec(f"nnz must lie in [0, p], got {self.nnz}")
        if not (self.sigma >= 0):
            raise InvalidSpec(f"sigma must be >= 0, got {self.sigma}")
        if self.correlation not in (CORR_IID, CORR_AR1):
            raise InvalidSpec(f"correlation must be '{CORR_IID}' or '{CORR_AR1}'")
        if self.correlation == CORR_AR1 and not (0 <= self.rho < 1):
            raise InvalidSpec(f"rho must lie in [0, 1), got {self.rho}")
        if not (0 <= self.seed < 2 ** 64):
            raise InvalidSpec("seed must fit in 64 bits")
        if self.group_sizes is not None:
            sizes = tuple(int(s) for s in self.group_sizes)
            if any(s < 1 for s in sizes):
                raise InvalidSpec("group sizes must be positive")
            if sum(sizes) != self.p:
                raise InvalidSpec(
                    f"group sizes sum to {sum(sizes)}, expected p={self.p}")
            object.__setattr__(self, "group_sizes", sizes)


def _stream(seed: int, stream: int) -> np.random.Generator:
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _polar_normal(gen: np.random.Generator, size: int) -> np.ndarray:
    """Standard normals via the Marsaglia polar method over Philox uniforms."""
    out = np.empty(size)
    have = 0
    while have < size:
        need = size - have
        n_pairs = max(8, (need * 3) // 4 + 1)
        u = gen.uniform(-1.0, 1.0, n_pairs)
        v = gen.uniform(-1.0, 1.0, n_pairs)
        s = u * u + v * v
        ok = (s > 0.0) & (s < 1.0)
        s_ok = s[ok]
        factor = np.sqrt(-2.0 * np.log(s_ok) / s_ok)
        z = np.empty(2 * s_ok.size)
        z[0::2] = u[ok] * factor
        z[1::2] = v[ok] * factor
        take = min(z.size, need)
        out[have:have + take] = z[:take]
        have += take
    return out


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, np.ndarray]:
    """Draw (Dataset, beta_true) deterministically from the spec.

    IID columns are standard Gaussian; AR1 builds x_j = rho*x_{j-1} +
    sqrt(1-rho^2)*z_j column by column, which gives cross-column correlation
    rho^|i-j| exactly in distribution. beta_true places nnz Uniform[-1,1]
    draws at positions chosen uniformly without replacement.
    """
    n, p = spec.n, spec.p
    x = np.empty((n, p), order="F")
    root_comp = np.sqrt(1.0 - spec.rho ** 2) if spec.correlation == CORR_AR1 else 1.0
    for j in range(p):
        z = _polar_normal(_stream(spec.seed, j), n)
        if spec.correlation == CORR_AR1 and j > 0:
            x[:, j] = spec.rho * x[:, j - 1] + root_comp * z
        else:
            x[:, j] = z

    beta_true = np.zeros(p)
    if spec.nnz > 0:
        gen_beta = _stream(spec.seed, _STREAM_BETA)
        positions = gen_beta.choice(p, size=spec.nnz, replace=False)
        beta_true[positions] = gen_beta.uniform(-1.0, 1.0, spec.nnz)

    y = x @ beta_true
    if spec.sigma > 0:
        y = y + spec.sigma * _polar_normal(_stream(spec.seed, _STREAM_NOISE), n)
    beta_true.setflags(write=False)
    return validate_dataset(x, y), beta_true


def _parse_rows(path: str) -> list[list[float]]:
    """Read numeric CSV rows, skipping a single non-numeric header row."""
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            parsed = []
            for colno, token in enumerate(row, start=1):
                try:
                    parsed.append(float(token))
                except ValueError:
                    if lineno == 1:
                        parsed = None  # header row
                        break
                    raise ParseError(
                        f"{path}: non-numeric value {token!r} at row {lineno}, "
                        f"column {colno}", row=lineno, col=colno) from None
            if parsed is None:
                continue
            if rows and len(parsed) != len(rows[0]):
                raise ParseError(
                    f"{path}: row {lineno} has {len(parsed)} fields, "
                    f"expected {len(rows[0])}", row=lineno)
            rows.append(parsed)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return rows


def load_csv(path_x: str, path_y: str) -> Dataset:
    """Load a design matrix and single-column response from two CSV files."""
    x_rows = _parse_rows(path_x)
    y_rows = _parse_rows(path_y)
    for i, row in enumerate(y_rows, start=1):
        if len(row) != 1:
            raise ParseError(f"{path_y}: row {i} has {len(row)} fields, expected 1",
                             row=i)
    x = np.array(x_rows)
    y = np.array([row[0] for row in y_rows])
    return validate_dataset(x, y)


def _format_row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def save_csv(d: Dataset, path_x: str, path_y: str) -> None:
    """Write the dataset as two header-less CSVs with round-trip float text."""
    with open(path_x, "w") as fh:
        for i in range(d.n_samples):
            fh.write(_format_row(d.x[i, :]) + "\n")
    with open(path_y, "w") as fh:
        for v in d.y:
            fh.write(repr(float(v)) + "\n")


def save_vector_csv(values, path: str) -> None:
    """One float per line, round-trip formatted."""
    with open(path, "w") as fh:
        for v in values:
            fh.write(repr(float(v)) + "\n")


def save_binary(d: Dataset, path: str) -> None:
    """Write magic 'DPPS', version u16, u64 n and p, then column-major X and y.

    All payload floats are little-endian 64-bit.
    """
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<HQQ", _VERSION, d.n_samples, d.n_features))
        fh.write(np.asarray(d.x, dtype="<f8").tobytes(order="F"))
        fh.write(np.asarray(d.y, dtype="<f8").tobytes())


def load_binary(path: str) -> Dataset:
    """Read the DPPS binary format; BadMagic/TruncatedFile on malformed input."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise BadMagic(f"{path}: expected magic {_MAGIC!r}, got {magic!r}")
        header = fh.read(18)
        if len(header) != 18:
            raise TruncatedFile(f"{path}: header ends after {4 + len(header)} bytes")
        version, n, p = struct.unpack("<HQQ", header)
        if version != _VERSION:
            raise BadMagic(f"{path}: unsupported version {version}")
        x_bytes = fh.read(8 * n * p)
        if len(x_bytes) != 8 * n * p:
            raise TruncatedFile(
                f"{path}: design payload has {len(x_bytes)} bytes, "
                f"expected {8 * n * p}")
        y_bytes = fh.read(8 * n)
        if len(y_bytes) != 8 * n:
            raise TruncatedFile(
                f"{path}: response payload has {len(y_bytes)} bytes, "
                f"expected {8 * n}")
    x = np.frombuffer(x_bytes, dtype="<f8").reshape((n, p), order="F")
    y = np.frombuffer(y_bytes, dtype="<f8")
    return validate_dataset(x, y)


def center_and_scale(d: Dataset, center: bool, scale: bool) -> Dataset:
    """Optionally subtract column/response means, then unit-normalize columns.

    Zero-norm columns pass through unscaled; they stay visible via
    Dataset.zero_norm_cols.
    """
    x = np.array(d.x)
    y = np.array(d.y)
    if center:
        x -= x.mean(axis=0)
        y -= y.mean()
    if scale:
        norms = np.sqrt(np.einsum("ij,ij->j", x, x))
        nonzero = norms > 0
        x[:, nonzero] /= norms[nonzero]
    return validate_dataset(x, y)
