"""Solution-path interpolation, the solution path error metric and
prediction-error metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cd import SolutionPath
from .errors import LengthMismatch, MismatchedProblem, SpeRangeError
from .lars import ExactPath, eval_exact

DEFAULT_K = 20
DEFAULT_LAMBDA_START = 0.001  # absolute, by design


@dataclass(frozen=True)
class SpeSpec:
    """Reference sequence for the path-error metric: k penalties spaced
    logarithmically from lambda_max down to lambda_start (both included)."""

    k: int = DEFAULT_K
    lambda_start: float = DEFAULT_LAMBDA_START

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if not (self.lambda_start > 0.0):
            raise ValueError("lambda_start must be positive")


def reference_lambdas(lam_max: float, spec: SpeSpec = SpeSpec()) -> np.ndarray:
    if lam_max <= spec.lambda_start:
        raise SpeRangeError(
            f"lambda_max={lam_max:.6g} does not exceed lambda_start="
            f"{spec.lambda_start:.6g}; lambda_start is absolute, so this "
            "problem is too small-scaled for the path-error metric"
        )
    lams = np.geomspace(lam_max, spec.lambda_start, spec.k)
    lams[0] = lam_max
    lams[-1] = spec.lambda_start
    return lams


def interpolate(path: SolutionPath, lam: float) -> np.ndarray:
    """Evaluate a grid path at any penalty by linear interpolation.

    Above the grid the solution is zero; below the grid the smallest-penalty
    solution is held constant (mirrors the exact path's extrapolation rule).
    """
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    values = path.grid.values
    if lam >= values[0]:
        return np.zeros(path.p) if lam > values[0] else path.coefs[0].copy()
    if lam <= values[-1]:
        return path.coefs[-1].copy()
    i = int(np.searchsorted(-values, -lam, side="left"))
    hi, lo = values[i - 1], values[i]
    if lam == lo:
        return path.coefs[i].copy()
    w = (lam - lo) / (hi - lo)
    return w * path.coefs[i - 1] + (1.0 - w) * path.coefs[i]


def spe(exact: ExactPath, approx: SolutionPath, spec: SpeSpec = SpeSpec()) -> float:
    """Solution path error: mean scaled distance between the exact and the
    approximate path at the reference penalties,

        SPE = (1/k) sum_i (1/sqrt(p)) ||beta_exact(lam_i) - beta_approx(lam_i)||_2.
    """
    if exact.p != approx.p:
        raise MismatchedProblem(
            f"paths disagree on p: {exact.p} vs {approx.p}"
        )
    if abs(exact.lambda_max - approx.grid.lambda_max) > 1e-10:
        raise MismatchedProblem(
            f"paths disagree on lambda_max: {exact.lambda_max!r} vs "
            f"{approx.grid.lambda_max!r}"
        )
    lams = reference_lambdas(exact.lambda_max, spec)
    scale = 1.0 / np.sqrt(exact.p)
    total = 0.0
    for lam in lams:
        diff = eval_exact(exact, lam) - interpolate(approx, lam)
        total += scale * float(np.linalg.norm(diff))
    return total / spec.k


def rmse(predictions, truth) -> float:
    """Root mean squared difference of two equal-length vectors."""
    predictions = np.asarray(predictions, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if predictions.shape != truth.shape:
        raise LengthMismatch(
            f"length {predictions.shape} vs {truth.shape}"
        )
    return float(np.sqrt(np.mean((predictions - truth) ** 2)))
