"""Dataset container, standardization, and CSV ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MalformedRow, NonFiniteInput, ZeroVarianceColumn

_MEAN_TOL = 1e-10
_VAR_TOL = 1e-8
FLOAT_FMT = "%.17g"  # round-trips float64 exactly


@dataclass(frozen=True)
class Dataset:
    """Design matrix and response with standardization metadata.

    A standardized dataset has columns with mean 0 and variance 1 under the
    1/N convention and a centered response.  ``x_means``, ``x_scales`` and
    ``y_mean`` describe the affine map back to the original scale, so
    coefficients fitted on the standardized data can be reported either way.
    Instances are immutable; the arrays are marked read-only.
    """

    x: np.ndarray
    y: np.ndarray
    standardized: bool
    x_means: np.ndarray
    x_scales: np.ndarray
    y_mean: float

    def __post_init__(self):
        if self.x.ndim != 2 or self.y.ndim != 1 or self.y.shape[0] != self.x.shape[0]:
            raise ValueError("x must be (n, p) and y of length n")
        if self.x.shape[0] < 2 or self.x.shape[1] < 1:
            raise ValueError("need n >= 2 and p >= 1")
        if not (np.isfinite(self.x).all() and np.isfinite(self.y).all()):
            raise NonFiniteInput("dataset contains non-finite entries")
        if self.standardized:
            means = self.x.mean(axis=0)
            var = self.x.var(axis=0)
            if np.abs(means).max() > _MEAN_TOL:
                raise ValueError("standardized flag set but column means are not 0")
            if np.abs(var - 1.0).max() > _VAR_TOL:
                raise ValueError("standardized flag set but column variances are not 1")
            if abs(float(self.y.mean())) > _MEAN_TOL:
                raise ValueError("standardized flag set but y is not centered")
        for arr in (self.x, self.y, self.x_means, self.x_scales):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


def raw_dataset(x, y) -> Dataset:
    """Wrap raw arrays in a Dataset with identity standardization metadata."""
    x = np.array(x, dtype=np.float64)
    y = np.array(y, dtype=np.float64)
    p = x.shape[1] if x.ndim == 2 else 0
    return Dataset(
        x=x,
        y=y,
        standardized=False,
        x_means=np.zeros(p),
        x_scales=np.ones(p),
        y_mean=0.0,
    )


def standardize(raw: Dataset) -> Dataset:
    """Center and scale columns to unit 1/N variance and center the response.

    Raises ZeroVarianceColumn for constant columns; the returned dataset
    stores the original means/scales so coefficients and the intercept can
    be mapped back to the input scale (see ``raw_coefficients``).
    """
    x, y = raw.x, raw.y
    col_range = x.max(axis=0) - x.min(axis=0)
    zero = np.nonzero(col_range == 0.0)[0]
    if zero.size:
        j = int(zero[0])
        raise ZeroVarianceColumn(f"column {j} is constant", column=j)
    means = x.mean(axis=0)
    xc = x - means
    means = means + xc.mean(axis=0)  # second pass removes rounding residue
    xc = x - means
    scales = np.sqrt((xc**2).mean(axis=0))
    x_std = xc / scales
    y_mean = float(y.mean())
    yc = y - y_mean
    y_mean += float(yc.mean())
    yc = y - y_mean
    return Dataset(
        x=x_std,
        y=yc,
        standardized=True,
        x_means=means,
        x_scales=scales,
        y_mean=y_mean,
    )


def raw_view(data: Dataset):
    """Return (x, y) on the original scale, undoing standardization if needed."""
    if not data.standardized:
        return data.x, data.y
    return data.x * data.x_scales + data.x_means, data.y + data.y_mean


def raw_coefficients(coefs, data: Dataset):
    """Map standardized-scale coefficients to the original scale.

    Returns (beta_raw, intercept) such that predictions on raw inputs are
    ``new_x @ beta_raw + intercept``.
    """
    coefs = np.asarray(coefs, dtype=np.float64)
    beta_raw = coefs / data.x_scales
    intercept = data.y_mean - float(data.x_means @ beta_raw)
    return beta_raw, intercept


def sample_covariance(x) -> np.ndarray:
    """Covariance of the rows of x with centering and the 1/N divisor."""
    x = np.asarray(x, dtype=np.float64)
    xc = x - x.mean(axis=0)
    return (xc.T @ xc) / x.shape[0]


def read_csv_dataset(path) -> Dataset:
    """Load a dataset from CSV with header ``x1,...,xp,y``.

    Missing values are rejected; errors carry the offending 1-based line
    number.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow("empty file", line=1) from None
        header = [h.strip() for h in header]
        if len(header) < 2 or header[-1] != "y":
            raise MalformedRow("header must be x1,...,xp,y", line=1)
        p = len(header) - 1
        expected = [f"x{j + 1}" for j in range(p)] + ["y"]
        if header != expected:
            raise MalformedRow("header must be x1,...,xp,y", line=1)
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != p + 1:
                raise MalformedRow(
                    f"expected {p + 1} fields, got {len(row)}", line=line_no
                )
            vals = []
            for col, field in enumerate(row):
                field = field.strip()
                if field == "":
                    raise MalformedRow(
                        f"missing value in column {col + 1}", line=line_no
                    )
                try:
                    vals.append(float(field))
                except ValueError:
                    raise MalformedRow(
                        f"could not parse {field!r} in column {col + 1}",
                        line=line_no,
                    ) from None
            rows.append(vals)
    if len(rows) < 2:
        raise MalformedRow("need at least two data rows", line=len(rows) + 1)
    arr = np.array(rows, dtype=np.float64)
    return raw_dataset(arr[:, :-1], arr[:, -1])


def write_csv_dataset(path, x, y) -> None:
    """Write a dataset in the ``x1,...,xp,y`` CSV layout read back by
    ``read_csv_dataset``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or y.shape[0] != x.shape[0]:
        raise DimensionMismatch("x must be (n, p) and y of length n")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(x.shape[1])] + ["y"])
        for i in range(x.shape[0]):
            writer.writerow(
                [FLOAT_FMT % v for v in x[i]] + [FLOAT_FMT % y[i]]
            )
