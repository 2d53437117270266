"""Lasso solution paths with surrogate-guided solver configuration tuning.

The package pairs a coordinate-descent path solver (configurable
convergence threshold and penalty-grid length) with an exact path solver
used as ground truth, measures how configuration choices trade path
accuracy against runtime, trains MLP surrogates on those measurements, and
picks the configuration that maximizes accuracy under a user time budget
via Pareto-front selection.
"""

from .cd import (
    LambdaGrid,
    SolutionPath,
    SolverConfig,
    default_lambda_grid,
    extended_lambda_grid,
    fit_at_lambda,
    fit_path,
    lambda_max,
    soft_threshold,
)
from .cv import CvResult, kfold_cv_cd, kfold_cv_lars, predict
from .data import (
    Dataset,
    raw_coefficients,
    raw_dataset,
    read_csv_dataset,
    sample_covariance,
    standardize,
    write_csv_dataset,
)
from .lars import ExactPath, eval_exact, kkt_residuals, lars_path
from .mlp import (
    MlpModel,
    TrainSpec,
    gradient_check,
    load_model,
    predict_lars_time,
    predict_performance,
    save_model,
    swish,
    train,
)
from .paths import SpeSpec, interpolate, rmse, spe
from .summary import (
    SummaryRecord,
    build_summary,
    read_records,
    run_scenario,
    write_records,
)
from .synth import (
    CovarianceSpec,
    DataFeatures,
    Scenario,
    beta_pattern,
    cov_ar1,
    cov_compound_symmetry,
    cov_inverse_random_structured,
    cov_random_structured,
    dataset_features,
    eigen_features,
    sample_dataset,
)
from .tuner import (
    ParetoPoint,
    TuneResult,
    auto_lasso,
    pareto_front,
    sample_configs,
    select_best,
)

__version__ = "0.1.0"
