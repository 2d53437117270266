"""Configuration sampling, Pareto-front extraction, time-budgeted selection,
and the end-to-end dispatch between the exact solver and the tuned
coordinate-descent solver."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .cd import SolverConfig, extended_lambda_grid, fit_path
from .cv import CvResult, kfold_cv_cd, kfold_cv_lars, predict
from .data import FLOAT_FMT, Dataset, raw_dataset, standardize
from .errors import InvalidRange, LassoTuneError
from .lars import lars_path
from .mlp import MlpModel, predict_lars_time, predict_performance_batch
from .synth import DataFeatures, dataset_features

DEFAULT_K = 2000
TAU_LOW, TAU_HIGH = 1e-9, 1e-7
MIN_TUNABLE_P = 50  # below this 2p < 100 and the sampling range is empty


@dataclass(frozen=True)
class ParetoPoint:
    """A sampled configuration with its predicted objectives."""

    config: SolverConfig
    spe_hat: float
    t_hat: float

    def __post_init__(self):
        if not (np.isfinite(self.spe_hat) and np.isfinite(self.t_hat)):
            raise ValueError("predicted objectives must be finite")
        if self.t_hat <= 0.0:
            raise ValueError("predicted time must be positive")

    def objectives(self):
        return (self.spe_hat, self.t_hat)


@dataclass(frozen=True)
class Selection:
    """Outcome of the budget-constrained pick: ``feasible`` is False when no
    front point fits the budget and ``point`` then carries the fastest
    front point as a fallback."""

    point: ParetoPoint
    feasible: bool


@dataclass
class TuneResult:
    """Everything auto_lasso produced: the chosen branch, the selected
    configuration with its predictions, the front, the fitted path, the CV
    selection, and optional predictions for new rows.

    ``measured_fit_seconds`` matches the quantity the surrogates predict:
    the exact-path runtime on the lars branch, the full path fit plus CV on
    the cd branches.  ``cv_seconds`` is the CV share (lars branch: the
    fraction-mode CV, which the lars-time surrogate does not cover).
    """

    tag: str  # lars | cd_tuned | cd_fallback
    t_hope: float
    features: DataFeatures
    predicted_time: float
    measured_fit_seconds: float
    cv_seconds: float
    path: object
    cv: CvResult
    coefs: np.ndarray
    config: SolverConfig | None = None
    predicted_spe: float | None = None
    front: list = field(default_factory=list)
    points: list = field(default_factory=list)
    selected_lambda: float | None = None
    selected_fraction: float | None = None
    predictions: np.ndarray | None = None
    budget_infeasible: bool = False


def sample_configs(k: int, p: int, seed: int) -> list[SolverConfig]:
    """Sample k configurations: tau log-uniform on [1e-9, 1e-7] and
    n_lambda uniform on the integers [100, 2p]."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if 2 * p < 100:
        raise InvalidRange(f"2p = {2 * p} < 100; no valid n_lambda range")
    rng = np.random.default_rng(seed)
    taus = 10.0 ** rng.uniform(np.log10(TAU_LOW), np.log10(TAU_HIGH), size=k)
    n_lams = rng.integers(100, 2 * p + 1, size=k)
    return [SolverConfig(tau=float(t), n_lambda=int(m)) for t, m in zip(taus, n_lams)]


def pareto_front(points) -> list[ParetoPoint]:
    """Points not weakly dominated by any point with a distinct objective
    pair, minimizing both coordinates; sorted by increasing predicted time.

    Duplicate objective pairs keep their first representative.
    """
    if not points:
        raise ValueError("points must be non-empty")
    seen = {}
    for idx, pt in enumerate(points):
        key = pt.objectives()
        if key not in seen:
            seen[key] = (idx, pt)
    order = sorted(seen.values(), key=lambda item: (item[1].t_hat, item[1].spe_hat))
    front = []
    best_spe = np.inf
    for _, pt in order:
        if pt.spe_hat < best_spe:
            front.append(pt)
            best_spe = pt.spe_hat
    return front


def select_best(front, t_hope: float) -> Selection:
    """Smallest predicted error among front points strictly under the
    budget; ties prefer the faster point.  With nothing under the budget,
    returns the fastest front point flagged infeasible."""
    if not front:
        raise ValueError("front must be non-empty")
    feasible = [pt for pt in front if pt.t_hat < t_hope]
    if not feasible:
        fastest = min(front, key=lambda pt: (pt.t_hat, pt.spe_hat))
        return Selection(point=fastest, feasible=False)
    chosen = min(feasible, key=lambda pt: (pt.spe_hat, pt.t_hat))
    return Selection(point=chosen, feasible=True)


def auto_lasso(
    x,
    y,
    t_hope: float,
    perf_model: MlpModel,
    lars_model: MlpModel,
    new_x=None,
    seed: int = 0,
    k: int = DEFAULT_K,
    folds: int = 10,
    time_scale: float = 1.0,
) -> TuneResult:
    """Fit a lasso path under a wall-clock budget.

    Standardizes the data, extracts eigenvalue features from the sample
    covariance, and predicts the exact solver's runtime.  When that fits
    the budget (or p is too small to tune), the exact path plus
    fraction-mode CV is used; otherwise k sampled configurations are
    scored by the performance surrogate, the Pareto front is extracted,
    and the error-minimizing configuration under the budget drives the
    coordinate-descent solver with 10-fold CV.  ``time_scale`` rescales
    predicted seconds to the current machine (see the calibration helper).
    """
    if not (t_hope > 0.0):
        raise ValueError("t_hope must be positive")
    try:
        data = standardize(raw_dataset(x, y))
        feats = dataset_features(data)
    except LassoTuneError as exc:
        raise type(exc)(f"feature extraction: {exc}") from exc

    try:
        t_lars_hat = time_scale * predict_lars_time(lars_model, feats)
    except LassoTuneError as exc:
        raise type(exc)(f"prediction: {exc}") from exc

    if data.p < MIN_TUNABLE_P or t_lars_hat < t_hope:
        return _lars_branch(data, feats, t_hope, t_lars_hat, new_x, seed, folds)

    try:
        configs = sample_configs(k, data.p, seed)
        spe_hat, t_hat = predict_performance_batch(perf_model, feats, configs)
        t_hat = time_scale * t_hat
        points = [
            ParetoPoint(config=c, spe_hat=float(s), t_hat=float(t))
            for c, s, t in zip(configs, spe_hat, t_hat)
        ]
        front = pareto_front(points)
        sel = select_best(front, t_hope)
    except LassoTuneError as exc:
        raise type(exc)(f"prediction: {exc}") from exc

    cfg = sel.point.config
    try:
        grid = extended_lambda_grid(data, cfg.n_lambda)
        t0 = time.perf_counter()
        path = fit_path(data, grid, cfg.tau)
        t_fit = time.perf_counter() - t0
        t0 = time.perf_counter()
        cv = kfold_cv_cd(data, grid, cfg.tau, folds=folds, seed=seed)
        t_cv = time.perf_counter() - t0
    except LassoTuneError as exc:
        raise type(exc)(f"fit: {exc}") from exc

    coefs = path.coefs[cv.selected_index].copy()
    preds = None
    if new_x is not None:
        preds = predict(coefs, data, new_x)
    return TuneResult(
        tag="cd_tuned" if sel.feasible else "cd_fallback",
        t_hope=t_hope,
        features=feats,
        config=cfg,
        predicted_spe=sel.point.spe_hat,
        predicted_time=sel.point.t_hat,
        measured_fit_seconds=t_fit + t_cv,
        cv_seconds=t_cv,
        path=path,
        cv=cv,
        coefs=coefs,
        front=front,
        points=points,
        selected_lambda=cv.selected_value,
        predictions=preds,
        budget_infeasible=not sel.feasible,
    )


def _lars_branch(
    data: Dataset,
    feats: DataFeatures,
    t_hope: float,
    t_lars_hat: float,
    new_x,
    seed: int,
    folds: int,
) -> TuneResult:
    try:
        t0 = time.perf_counter()
        path = lars_path(data)
        t_fit = time.perf_counter() - t0
        t0 = time.perf_counter()
        cv = kfold_cv_lars(data, folds=folds, seed=seed)
        t_cv = time.perf_counter() - t0
    except LassoTuneError as exc:
        raise type(exc)(f"fit: {exc}") from exc
    coefs = cv.final_coefs
    preds = None
    if new_x is not None:
        preds = predict(coefs, data, new_x)
    return TuneResult(
        tag="lars",
        t_hope=t_hope,
        features=feats,
        predicted_time=t_lars_hat,
        measured_fit_seconds=t_fit,
        cv_seconds=t_cv,
        path=path,
        cv=cv,
        coefs=coefs,
        selected_fraction=cv.selected_value,
        predictions=preds,
    )


def write_pareto_csv(path, result: TuneResult) -> None:
    """Export every sampled point with front/selection flags for plotting:
    tau,n_lambda,spe_hat,t_hat,on_front,selected."""
    front_keys = {pt.objectives() for pt in result.front}
    sel_key = None
    if result.config is not None and result.predicted_spe is not None:
        sel_key = (result.predicted_spe, result.predicted_time)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "n_lambda", "spe_hat", "t_hat", "on_front", "selected"])
        for pt in result.points:
            key = pt.objectives()
            writer.writerow(
                [
                    FLOAT_FMT % pt.config.tau,
                    str(pt.config.n_lambda),
                    FLOAT_FMT % pt.spe_hat,
                    FLOAT_FMT % pt.t_hat,
                    "1" if key in front_keys else "0",
                    "1" if key == sel_key and pt.config == result.config else "0",
                ]
            )


def run_cd_microbenchmark(seed: int = 0) -> float:
    """Seconds for a fixed coordinate-descent workload; the ratio of this
    value across machines calibrates predicted times to local hardware."""
    from .synth import cov_compound_symmetry, beta_pattern, sample_dataset

    cov = cov_compound_symmetry(100, 0.5)
    beta = beta_pattern(100, 1, seed)
    raw = sample_dataset(200, cov, beta, 1.0, seed)
    data = standardize(raw)
    grid = extended_lambda_grid(data, 200)
    fit_path(data, grid, 1e-8)  # warm the jit before timing
    t0 = time.perf_counter()
    fit_path(data, grid, 1e-8)
    return time.perf_counter() - t0


def calibration_factor(reference_seconds: float, seed: int = 0) -> float:
    """Local-vs-reference runtime ratio for rescaling predicted seconds."""
    if not (reference_seconds > 0.0):
        raise ValueError("reference benchmark seconds must be positive")
    return run_cd_microbenchmark(seed) / reference_seconds
