"""Coordinate-descent lasso path solver with configurable convergence
threshold and penalty grids.

The solver minimizes

    (1 / (2N)) * ||y - X beta||_2^2 + lam * ||beta||_1

on standardized data by cyclic coordinate updates, sweeping all p
coordinates and stopping once the per-sweep objective improvement drops
below ``tau`` times the null deviance (1/N)||y||^2.  Paths over a
decreasing penalty grid are warm-started from the previous solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .data import Dataset
from .errors import (
    DegenerateResponse,
    InvalidConfig,
    MaxIterationsExceeded,
    NumericalFailure,
)

DEFAULT_N_LAMBDA = 100
DEFAULT_TAU = 1e-7
DEFAULT_MAX_SWEEPS = 100_000
_MONOTONE_TOL = 1e-12  # relative per-sweep objective rise tolerated as rounding


@dataclass(frozen=True)
class SolverConfig:
    """Tunable solver pair: convergence threshold and grid length."""

    tau: float
    n_lambda: int

    def __post_init__(self):
        if not (self.tau > 0.0 and np.isfinite(self.tau)):
            raise InvalidConfig(f"tau must be positive and finite, got {self.tau}")
        if self.n_lambda < DEFAULT_N_LAMBDA:
            raise InvalidConfig(
                f"n_lambda must be >= {DEFAULT_N_LAMBDA}, got {self.n_lambda}"
            )


@dataclass(frozen=True)
class LambdaGrid:
    """Strictly decreasing positive penalty values starting at lambda_max."""

    values: np.ndarray
    lambda_max: float
    lambda_min_def: float

    def __post_init__(self):
        v = self.values
        if v.ndim != 1 or v.size < 1:
            raise ValueError("grid must be a non-empty vector")
        if v[0] != self.lambda_max:
            raise ValueError("grid must start at lambda_max")
        if not np.all(v > 0.0):
            raise ValueError("grid values must be positive")
        if v.size > 1 and not np.all(np.diff(v) < 0.0):
            raise ValueError("grid values must be strictly decreasing")
        v.setflags(write=False)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class SolutionPath:
    """Per-grid-point coefficient vectors plus sweep counts."""

    grid: LambdaGrid
    coefs: np.ndarray  # (n_lambda, p)
    iterations: np.ndarray  # (n_lambda,) sweeps used at each penalty

    def __post_init__(self):
        if self.coefs.shape[0] != len(self.grid):
            raise ValueError("one coefficient vector per grid value required")
        if self.iterations.shape[0] != len(self.grid):
            raise ValueError("one iteration count per grid value required")
        self.coefs.setflags(write=False)
        self.iterations.setflags(write=False)

    @property
    def p(self) -> int:
        return self.coefs.shape[1]


def soft_threshold(z, lam):
    """S_lam(z) = sign(z) * (|z| - lam)_+ ; works elementwise on arrays."""
    return np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)


@numba.njit(cache=True, fastmath=True)
def _abs_corr_max(xt, y):  # pragma: no cover
    """max_j |X_j' y| / N with the same loop structure (and therefore the
    same rounding) as the solver kernel, so soft-thresholding at the
    returned value yields exact zeros."""
    n = y.shape[0]
    p = xt.shape[0]
    best = 0.0
    for j in range(p):
        zj = 0.0
        for i in range(n):
            zj += xt[j, i] * y[i]
        zj = zj / n
        if abs(zj) > best:
            best = abs(zj)
    return best


def lambda_max(data: Dataset) -> float:
    """Smallest penalty at which every coefficient is zero:
    max_j (1/N)|X_j' y|."""
    _require_standardized(data)
    value = float(_abs_corr_max(np.ascontiguousarray(data.x.T), data.y))
    if value == 0.0:
        raise DegenerateResponse("response is orthogonal to all predictors")
    return value


def _lambda_min_def(data: Dataset, lam_max: float) -> float:
    # wider default floor in the high-dimensional regime
    factor = 1e-2 if data.n < data.p else 1e-4
    return factor * lam_max


def default_lambda_grid(data: Dataset) -> LambdaGrid:
    """100 log-spaced penalties from lambda_max down to its default floor
    (1e-2 * lambda_max when N < p, else 1e-4 * lambda_max)."""
    lam_max = lambda_max(data)
    lam_min = _lambda_min_def(data, lam_max)
    values = np.geomspace(lam_max, lam_min, DEFAULT_N_LAMBDA)
    values[0] = lam_max
    values[-1] = lam_min
    return LambdaGrid(values=values, lambda_max=lam_max, lambda_min_def=lam_min)


def extended_lambda_grid(data: Dataset, n_lambda: int) -> LambdaGrid:
    """Default grid extended by n_lambda - 100 values evenly spaced in the
    open interval (0, lambda_min_def).

    The extra values are lambda_min_def * j / (m + 1) for j = m..1; zero
    itself is excluded because the problem is ill-posed there for N < p.
    """
    if n_lambda < DEFAULT_N_LAMBDA:
        raise InvalidConfig(
            f"n_lambda must be >= {DEFAULT_N_LAMBDA}, got {n_lambda}"
        )
    base = default_lambda_grid(data)
    m = int(n_lambda) - DEFAULT_N_LAMBDA
    if m == 0:
        return base
    extra = base.lambda_min_def * (np.arange(m, 0, -1) / (m + 1))
    values = np.concatenate([base.values, extra])
    return LambdaGrid(
        values=values, lambda_max=base.lambda_max, lambda_min_def=base.lambda_min_def
    )


def dense_lambda_grid(data: Dataset, n_points: int = 2000, floor: float | None = None) -> LambdaGrid:
    """Plain log-spaced grid of n_points from lambda_max down to ``floor``
    (default: min(default floor, 5e-4), low enough to cover the path-error
    reference range).

    Unlike the extended grid, density is uniform in log-lambda across the
    whole range; intended for oracle-equivalence checks against the exact
    path, where interpolation error must stay negligible everywhere.
    """
    if n_points < 2:
        raise InvalidConfig(f"n_points must be >= 2, got {n_points}")
    lam_max = lambda_max(data)
    lam_min_def = _lambda_min_def(data, lam_max)
    if floor is None:
        floor = min(lam_min_def, 5e-4)
    if not (0.0 < floor < lam_max):
        raise InvalidConfig(f"floor must lie in (0, lambda_max), got {floor}")
    values = np.geomspace(lam_max, floor, n_points)
    values[0] = lam_max
    values[-1] = floor
    return LambdaGrid(values=values, lambda_max=lam_max, lambda_min_def=lam_min_def)


@numba.njit(cache=True, fastmath=True)
def _cd_solve(xt, y, lam, beta, tau, d_null, max_sweeps):  # pragma: no cover
    """Cyclic coordinate descent at one penalty; mutates beta in place.

    xt is the transposed design (p, N) so each coordinate touches a
    contiguous row.  Returns (sweeps, converged, worst_rise) where
    worst_rise is the largest relative objective increase seen between
    consecutive sweeps (should be rounding-level only).
    """
    n = y.shape[0]
    p = xt.shape[0]
    r = y.copy()
    for j in range(p):
        bj = beta[j]
        if bj != 0.0:
            for i in range(n):
                r[i] -= xt[j, i] * bj
    rr = 0.0
    for i in range(n):
        rr += r[i] * r[i]
    l1 = 0.0
    for j in range(p):
        l1 += abs(beta[j])
    prev_obj = 0.5 * rr / n + lam * l1
    worst_rise = 0.0
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        for j in range(p):
            zj = 0.0
            for i in range(n):
                zj += xt[j, i] * r[i]
            zj = zj / n + beta[j]
            if zj > lam:
                bj_new = zj - lam
            elif zj < -lam:
                bj_new = zj + lam
            else:
                bj_new = 0.0
            d = bj_new - beta[j]
            if d != 0.0:
                for i in range(n):
                    r[i] -= xt[j, i] * d
                beta[j] = bj_new
        rr = 0.0
        for i in range(n):
            rr += r[i] * r[i]
        l1 = 0.0
        for j in range(p):
            l1 += abs(beta[j])
        obj = 0.5 * rr / n + lam * l1
        denom = abs(prev_obj)
        if denom < 1e-300:
            denom = 1e-300
        rise = (obj - prev_obj) / denom
        if rise > worst_rise:
            worst_rise = rise
        if prev_obj - obj < tau * d_null:
            return sweeps, True, worst_rise
        prev_obj = obj
    return sweeps, False, worst_rise


def objective(data: Dataset, beta, lam: float) -> float:
    """Penalized least-squares objective on standardized data."""
    r = data.y - data.x @ beta
    return float(0.5 * (r @ r) / data.n + lam * np.sum(np.abs(beta)))


def null_deviance(data: Dataset) -> float:
    """(1/N)||y||^2 for centered y; reference scale of the stopping rule."""
    return float(data.y @ data.y) / data.n


def fit_at_lambda(
    data: Dataset,
    lam: float,
    init=None,
    tau: float = DEFAULT_TAU,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
):
    """Solve one penalty by cyclic coordinate descent.

    Returns (beta, sweeps).  Convergence is declared when the objective
    improvement over a full sweep falls below tau times the null deviance;
    exceeding ``max_sweeps`` raises MaxIterationsExceeded rather than
    returning a silently truncated solution.
    """
    _require_standardized(data)
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    if not (tau > 0.0):
        raise InvalidConfig(f"tau must be positive, got {tau}")
    if init is None:
        beta = np.zeros(data.p)
    else:
        beta = np.array(init, dtype=np.float64)
        if beta.shape != (data.p,):
            raise ValueError("init must have length p")
    xt = np.ascontiguousarray(data.x.T)
    sweeps, converged, worst_rise = _cd_solve(
        xt, data.y, float(lam), beta, float(tau), null_deviance(data), int(max_sweeps)
    )
    if worst_rise > _MONOTONE_TOL:
        raise NumericalFailure(
            f"objective rose by relative {worst_rise:.3e} within a sweep"
        )
    if not converged:
        raise MaxIterationsExceeded(
            f"no convergence after {max_sweeps} sweeps at lam={lam:.6g}"
        )
    return beta, int(sweeps)


def fit_path(
    data: Dataset,
    grid: LambdaGrid,
    tau: float = DEFAULT_TAU,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> SolutionPath:
    """Fit the whole grid in decreasing order, warm-starting each penalty
    from the previous solution."""
    _require_standardized(data)
    if not (tau > 0.0):
        raise InvalidConfig(f"tau must be positive, got {tau}")
    xt = np.ascontiguousarray(data.x.T)
    d_null = null_deviance(data)
    coefs = np.zeros((len(grid), data.p))
    iters = np.zeros(len(grid), dtype=np.int64)
    beta = np.zeros(data.p)
    for k, lam in enumerate(grid.values):
        sweeps, converged, worst_rise = _cd_solve(
            xt, data.y, float(lam), beta, float(tau), d_null, int(max_sweeps)
        )
        if worst_rise > _MONOTONE_TOL:
            raise NumericalFailure(
                f"objective rose by relative {worst_rise:.3e} at grid index {k}"
            )
        if not converged:
            raise MaxIterationsExceeded(
                f"no convergence after {max_sweeps} sweeps at grid index {k} "
                f"(lam={lam:.6g})"
            )
        coefs[k] = beta
        iters[k] = sweeps
    return SolutionPath(grid=grid, coefs=coefs, iterations=iters)


def _require_standardized(data: Dataset) -> None:
    if not data.standardized:
        raise ValueError("solver requires a standardized dataset")
