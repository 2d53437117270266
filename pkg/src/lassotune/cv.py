"""k-fold cross-validation for penalty selection on both solvers, plus
prediction on new data.

Each fold re-standardizes its training split, fits there, and scores
held-out rows on the original response scale, so fold errors are
comparable across folds and solvers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cd import LambdaGrid, fit_path
from .data import Dataset, raw_dataset, raw_view, standardize
from .errors import DimensionMismatch
from .lars import lars_path

DEFAULT_FOLDS = 10


@dataclass(frozen=True)
class CvResult:
    """Grid of candidate values (penalties or fractions), their mean CV
    errors with standard errors, and the selected minimizer."""

    values: np.ndarray
    mean_errors: np.ndarray
    std_errors: np.ndarray
    selected_value: float
    selected_index: int
    final_coefs: np.ndarray | None = None

    def __post_init__(self):
        if not (
            self.values.shape == self.mean_errors.shape == self.std_errors.shape
        ):
            raise ValueError("values and error vectors must have equal length")
        if self.mean_errors[self.selected_index] != self.mean_errors.min():
            raise ValueError("selected value must attain the minimal mean error")


def fold_indices(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Deterministic disjoint cover of range(n) into `folds` parts."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if n < folds:
        raise ValueError("need at least one row per fold")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, folds)


def kfold_cv_cd(
    data: Dataset,
    grid: LambdaGrid,
    tau: float,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    max_sweeps: int = 100_000,
) -> CvResult:
    """Cross-validate the coordinate-descent path over a fixed penalty grid.

    The grid is shared across folds (it normally comes from the full data).
    Ties in the mean error prefer the larger penalty.
    """
    x_raw, y_raw = raw_view(data)
    parts = fold_indices(data.n, folds, seed)
    n_lambda = len(grid)
    sq_sum = np.zeros(n_lambda)
    fold_means = np.zeros((len(parts), n_lambda))
    for f, test_idx in enumerate(parts):
        train_idx = np.setdiff1d(np.arange(data.n), test_idx, assume_unique=False)
        try:
            dtrain = standardize(raw_dataset(x_raw[train_idx], y_raw[train_idx]))
            path = fit_path(dtrain, grid, tau, max_sweeps=max_sweeps)
        except Exception as exc:
            raise type(exc)(f"fold {f}: {exc}") from exc
        preds = _predict_matrix(path.coefs.T, dtrain, x_raw[test_idx])
        sq = (preds - y_raw[test_idx][:, None]) ** 2
        sq_sum += sq.sum(axis=0)
        fold_means[f] = sq.mean(axis=0)
    mean_errors = sq_sum / data.n
    std_errors = fold_means.std(axis=0, ddof=1) / np.sqrt(len(parts))
    idx = int(np.argmin(mean_errors))  # first minimum = largest penalty
    return CvResult(
        values=grid.values.copy(),
        mean_errors=mean_errors,
        std_errors=std_errors,
        selected_value=float(grid.values[idx]),
        selected_index=idx,
    )


def kfold_cv_lars(
    data: Dataset,
    folds: int = DEFAULT_FOLDS,
    n_fractions: int = 100,
    seed: int = 0,
) -> CvResult:
    """Cross-validate the exact path over the L1-norm fraction
    s = ||beta||_1 / max ||beta||_1 in [0, 1].

    Evaluates each fold's exact path at `n_fractions` evenly spaced
    fractions, selects the minimizer (ties prefer the smaller fraction,
    i.e. more regularization), and refits on the full data at that
    fraction; the refit coefficients are returned in ``final_coefs`` on the
    standardized scale.
    """
    x_raw, y_raw = raw_view(data)
    fractions = np.linspace(0.0, 1.0, n_fractions)
    parts = fold_indices(data.n, folds, seed)
    sq_sum = np.zeros(n_fractions)
    fold_means = np.zeros((len(parts), n_fractions))
    for f, test_idx in enumerate(parts):
        train_idx = np.setdiff1d(np.arange(data.n), test_idx, assume_unique=False)
        try:
            dtrain = standardize(raw_dataset(x_raw[train_idx], y_raw[train_idx]))
            path = lars_path(dtrain)
        except Exception as exc:
            raise type(exc)(f"fold {f}: {exc}") from exc
        coefs = eval_at_fractions(path.knot_coefs, fractions)
        preds = _predict_matrix(coefs, dtrain, x_raw[test_idx])
        sq = (preds - y_raw[test_idx][:, None]) ** 2
        sq_sum += sq.sum(axis=0)
        fold_means[f] = sq.mean(axis=0)
    mean_errors = sq_sum / data.n
    std_errors = fold_means.std(axis=0, ddof=1) / np.sqrt(len(parts))
    idx = int(np.argmin(mean_errors))  # first minimum = smallest fraction
    dfull = data if data.standardized else standardize(data)
    full_path = lars_path(dfull)
    final = eval_at_fractions(full_path.knot_coefs, fractions[idx : idx + 1])[:, 0]
    return CvResult(
        values=fractions,
        mean_errors=mean_errors,
        std_errors=std_errors,
        selected_value=float(fractions[idx]),
        selected_index=idx,
        final_coefs=final,
    )


def eval_at_fractions(knot_coefs: np.ndarray, fractions: np.ndarray) -> np.ndarray:
    """Interpolate knot coefficients at L1-norm fractions; returns (p, len).

    Knot fractions are made non-decreasing by a running maximum before
    interpolation, which matches the usual fraction-mode evaluation of
    piecewise-linear paths.
    """
    l1 = np.abs(knot_coefs).sum(axis=1)
    total = l1[-1]
    if total == 0.0:
        return np.zeros((knot_coefs.shape[1], fractions.size))
    knot_frac = np.maximum.accumulate(l1 / total)
    out = np.empty((knot_coefs.shape[1], fractions.size))
    for c, s in enumerate(np.clip(fractions, 0.0, 1.0)):
        i = int(np.searchsorted(knot_frac, s, side="left"))
        if i == 0 or knot_frac[i] == s:
            out[:, c] = knot_coefs[min(i, len(knot_frac) - 1)]
            continue
        lo_f, hi_f = knot_frac[i - 1], knot_frac[i]
        t = 0.0 if hi_f == lo_f else (s - lo_f) / (hi_f - lo_f)
        out[:, c] = knot_coefs[i - 1] + t * (knot_coefs[i] - knot_coefs[i - 1])
    return out


def predict(coefs, data: Dataset, new_x) -> np.ndarray:
    """Predict responses for raw rows using the training standardization."""
    coefs = np.asarray(coefs, dtype=np.float64)
    new_x = np.asarray(new_x, dtype=np.float64)
    if new_x.ndim != 2 or new_x.shape[1] != data.p:
        raise DimensionMismatch(
            f"new_x must have {data.p} columns, got shape {new_x.shape}"
        )
    z = (new_x - data.x_means) / data.x_scales
    return z @ coefs + data.y_mean


def _predict_matrix(coef_cols, dtrain: Dataset, new_x) -> np.ndarray:
    """Predictions for coefficient vectors stacked as columns (p, k);
    returns (n_new, k)."""
    coef_cols = np.asarray(coef_cols, dtype=np.float64)
    z = (np.asarray(new_x, dtype=np.float64) - dtrain.x_means) / dtrain.x_scales
    return z @ coef_cols + dtrain.y_mean
