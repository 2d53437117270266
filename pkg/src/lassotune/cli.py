"""Command-line front end: summary generation, surrogate training, tuned
fitting with Pareto export, and a synthetic compressed-sensing demo.

Exit codes: 0 success, 1 runtime failure, 2 usage or input error.
All randomness flows from the --seed flag.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time

import numpy as np
from scipy.stats import spearmanr

from . import mlp, summary, tuner
from .cd import (
    DEFAULT_TAU,
    SolverConfig,
    default_lambda_grid,
    extended_lambda_grid,
    fit_path,
)
from .cv import kfold_cv_cd, kfold_cv_lars
from .data import FLOAT_FMT, raw_coefficients, raw_dataset, read_csv_dataset, standardize
from .errors import LassoTuneError, MalformedRow
from .paths import rmse
from .synth import dataset_features

BENCH_SUFFIX = ".bench"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lassotune",
        description="Lasso paths with surrogate-guided configuration tuning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate-summary", help="run scenarios and record measurements")
    gen.add_argument("--scenario", required=True, help="scenario JSON file")
    gen.add_argument("--summary", help="output CSV (default: OUT/summary.csv)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--preset", choices=("desk", "full"), default="desk")
    gen.add_argument("--out", default=".")

    trn = sub.add_parser("train-surrogate", help="train both surrogate models")
    trn.add_argument("--summary", required=True)
    trn.add_argument("--perf-model", help="default: OUT/perf_model.json")
    trn.add_argument("--lars-model", help="default: OUT/lars_model.json")
    trn.add_argument("--seed", type=int, default=0)
    trn.add_argument("--out", default=".")

    tun = sub.add_parser("tune", help="auto-tuned lasso fit under a time budget")
    tun.add_argument("--data", required=True, help="CSV with columns x1..xp,y")
    tun.add_argument("--perf-model", required=True)
    tun.add_argument("--lars-model", required=True)
    tun.add_argument("--t-hope", type=float, default=20.0)
    tun.add_argument("--new-data", help="CSV of rows to predict (x1..xp,y; y ignored)")
    tun.add_argument("--seed", type=int, default=0)
    tun.add_argument("--out", default=".")
    tun.add_argument("--calibrate", action="store_true",
                     help="rescale predicted seconds by a local microbenchmark")

    demo = sub.add_parser("demo-cs", help="sparse-signal recovery demo")
    demo.add_argument("--length", type=int, default=1024)
    demo.add_argument("--sparsity", type=float, default=0.05)
    demo.add_argument("--compressed-dim", type=int, default=700)
    demo.add_argument("--t-hope", type=float, default=20.0)
    demo.add_argument("--perf-model", required=True)
    demo.add_argument("--lars-model", required=True)
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--out", default=".")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "generate-summary": cmd_generate_summary,
        "train-surrogate": cmd_train_surrogate,
        "tune": cmd_tune,
        "demo-cs": cmd_demo_cs,
    }
    try:
        return handlers[args.command](args)
    except (FileNotFoundError, MalformedRow, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LassoTuneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:  # console-script shim
    sys.exit(main())


def cmd_generate_summary(args) -> int:
    if not os.path.exists(args.scenario):
        print(f"error: scenario file not found: {args.scenario}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    output = args.summary or os.path.join(args.out, "summary.csv")
    if args.preset == "desk":
        max_n, max_p = summary.DESK_MAX_N, summary.DESK_MAX_P
    else:
        max_n = max_p = None
    count = summary.build_summary(
        args.scenario, output, master_seed=args.seed, max_n=max_n, max_p=max_p
    )
    print(f"records: {count}")
    print(f"summary: {output}")
    return 0


def cmd_train_surrogate(args) -> int:
    if not os.path.exists(args.summary):
        print(f"error: summary file not found: {args.summary}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    perf_path = args.perf_model or os.path.join(args.out, "perf_model.json")
    lars_path_out = args.lars_model or os.path.join(args.out, "lars_model.json")
    records = list(summary.read_records(args.summary))

    for kind, out_path, defaults in (
        (mlp.PERFORMANCE, perf_path, mlp.PERFORMANCE_SPEC_DEFAULTS),
        (mlp.LARS_TIME, lars_path_out, mlp.LARS_SPEC_DEFAULTS),
    ):
        train_recs, test_recs = _split_records(records, kind, args.seed)
        spec = mlp.TrainSpec(seed=args.seed, **defaults)
        model = mlp.train(train_recs, spec, kind)
        mlp.save_model(model, out_path)
        mses, corrs = heldout_metrics(model, test_recs)
        names = ("spe", "time") if kind == mlp.PERFORMANCE else ("time",)
        for name, m, c in zip(names, mses, corrs):
            print(f"{kind} {name}: heldout_mse={m:.6g} rank_corr={c:.4f}")
        print(f"{kind} model: {out_path}")

    bench = tuner.run_cd_microbenchmark(seed=args.seed)
    bench_path = perf_path + BENCH_SUFFIX
    with open(bench_path, "w") as fh:
        fh.write(FLOAT_FMT % bench + "\n")
    print(f"benchmark: {bench:.4g}s ({bench_path})")
    return 0


_KIND_STREAM = {mlp.PERFORMANCE: 1, mlp.LARS_TIME: 2}


def _split_records(records, kind, seed, holdout=0.1):
    usable = [r for r in records if not r.is_flagged()]
    if kind == mlp.LARS_TIME:
        usable = [r for r in usable if r.t_lars_seconds is not None]
    rng = np.random.default_rng([seed, _KIND_STREAM[kind]])
    perm = rng.permutation(len(usable))
    n_test = max(1, int(round(holdout * len(usable))))
    test = [usable[i] for i in perm[:n_test]]
    train = [usable[i] for i in perm[n_test:]]
    return train, test


def heldout_metrics(model, test_records):
    """Per-target transformed-scale MSE and rank correlation on held-out
    records."""
    x_raw, y_raw = mlp.records_to_arrays(test_records, model.kind)
    pred = mlp.predict_raw(model, x_raw)
    z_pred = mlp.transform_targets(pred, model.target_shift, model.target_scale)
    z_true = mlp.transform_targets(y_raw, model.target_shift, model.target_scale)
    mses, corrs = [], []
    for t in range(y_raw.shape[1]):
        mses.append(float(np.mean((z_pred[:, t] - z_true[:, t]) ** 2)))
        corrs.append(float(spearmanr(pred[:, t], y_raw[:, t]).statistic))
    return mses, corrs


def cmd_tune(args) -> int:
    for path in (args.data, args.perf_model, args.lars_model):
        if not os.path.exists(path):
            print(f"error: file not found: {path}", file=sys.stderr)
            return 2
    if args.new_data and not os.path.exists(args.new_data):
        print(f"error: file not found: {args.new_data}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    dataset = read_csv_dataset(args.data)
    perf_model = mlp.load_model(args.perf_model)
    lars_model = mlp.load_model(args.lars_model)
    new_x = None
    if args.new_data:
        new_x = read_csv_dataset(args.new_data).x

    time_scale = 1.0
    if args.calibrate:
        bench_path = args.perf_model + BENCH_SUFFIX
        if os.path.exists(bench_path):
            with open(bench_path) as fh:
                reference = float(fh.read().strip())
            time_scale = tuner.calibration_factor(reference, seed=args.seed)
            print(f"calibration: time_scale={time_scale:.4f}")
        else:
            print(f"calibration reference missing ({bench_path}); using 1.0")

    result = tuner.auto_lasso(
        dataset.x,
        dataset.y,
        args.t_hope,
        perf_model,
        lars_model,
        new_x=new_x,
        seed=args.seed,
        time_scale=time_scale,
    )

    print(f"branch: {result.tag}")
    if result.config is not None:
        print(
            f"config: tau={result.config.tau:.6g} n_lambda={result.config.n_lambda}"
        )
        print(
            f"predicted: spe={result.predicted_spe:.6g} "
            f"time={result.predicted_time:.6g}s"
        )
    else:
        print(f"predicted: lars_time={result.predicted_time:.6g}s")
    print(
        f"measured: fit={result.measured_fit_seconds:.6g}s "
        f"(cv {result.cv_seconds:.6g}s)"
    )
    if result.selected_lambda is not None:
        print(f"selected lambda: {result.selected_lambda:.10g}")
    else:
        print(f"selected fraction: {result.selected_fraction:.10g}")
    if result.budget_infeasible:
        print("warning: no front point fits the budget; using the fastest one")

    pareto_path = os.path.join(args.out, "pareto.csv")
    tuner.write_pareto_csv(pareto_path, result)
    print(f"pareto: {pareto_path}")
    if result.predictions is not None:
        pred_path = os.path.join(args.out, "predictions.csv")
        with open(pred_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["prediction"])
            for v in result.predictions:
                writer.writerow([FLOAT_FMT % v])
        print(f"predictions: {pred_path}")
    return 0


def cmd_demo_cs(args) -> int:
    if args.compressed_dim >= args.length:
        print(
            f"error: compressed dim {args.compressed_dim} must be smaller "
            f"than the signal length {args.length}",
            file=sys.stderr,
        )
        return 2
    if not (0.0 < args.sparsity < 1.0):
        print(f"error: sparsity must lie in (0, 1), got {args.sparsity}", file=sys.stderr)
        return 2
    for path in (args.perf_model, args.lars_model):
        if not os.path.exists(path):
            print(f"error: file not found: {path}", file=sys.stderr)
            return 2
    perf_model = mlp.load_model(args.perf_model)
    lars_model = mlp.load_model(args.lars_model)

    theta, projection, y = make_cs_instance(
        args.length, args.sparsity, args.compressed_dim, args.seed
    )
    results = reconstruct_cs(
        theta, projection, y, args.t_hope, perf_model, lars_model, seed=args.seed
    )
    for label in ("default", "tuned", "lars"):
        entry = results[label]
        line = f"{label}: rmse={entry['rmse']:.6g} time={entry['seconds']:.4g}s"
        if label == "tuned":
            cfg = entry["config"]
            line += f" config: tau={cfg.tau:.6g} n_lambda={cfg.n_lambda}"
        print(line)
    return 0


def make_cs_instance(length: int, sparsity: float, compressed_dim: int, seed: int):
    """Sparse signal, Gaussian projection, and its noiseless compression."""
    rng = np.random.default_rng(seed)
    nnz = max(1, int(round(sparsity * length)))
    theta = np.zeros(length)
    support = rng.permutation(length)[:nnz]
    theta[support] = rng.standard_normal(nnz)
    projection = rng.standard_normal((compressed_dim, length))
    y = projection @ theta
    return theta, projection, y


def reconstruct_cs(theta, projection, y, t_hope, perf_model, lars_model, seed=0, folds=10):
    """Recover the signal three ways and report RMSE against the truth.

    default: coordinate descent with the stock configuration; tuned: the
    surrogate-selected configuration under the budget; lars: the exact
    path.  Both CD arms and the exact arm pick their penalty by CV.
    """
    data = standardize(raw_dataset(projection, y))
    out = {}

    t0 = time.perf_counter()
    grid = default_lambda_grid(data)
    path = fit_path(data, grid, DEFAULT_TAU)
    cv = kfold_cv_cd(data, grid, DEFAULT_TAU, folds=folds, seed=seed)
    seconds = time.perf_counter() - t0
    coefs, _ = raw_coefficients(path.coefs[cv.selected_index], data)
    out["default"] = {
        "rmse": rmse(coefs, theta),
        "seconds": seconds,
        "config": SolverConfig(tau=DEFAULT_TAU, n_lambda=len(grid)),
    }

    feats = dataset_features(data)
    configs = tuner.sample_configs(tuner.DEFAULT_K, data.p, seed)
    spe_hat, t_hat = mlp.predict_performance_batch(perf_model, feats, configs)
    points = [
        tuner.ParetoPoint(config=c, spe_hat=float(s), t_hat=float(t))
        for c, s, t in zip(configs, spe_hat, t_hat)
    ]
    sel = tuner.select_best(tuner.pareto_front(points), t_hope)
    cfg = sel.point.config
    t0 = time.perf_counter()
    grid = extended_lambda_grid(data, cfg.n_lambda)
    path = fit_path(data, grid, cfg.tau)
    cv = kfold_cv_cd(data, grid, cfg.tau, folds=folds, seed=seed)
    seconds = time.perf_counter() - t0
    coefs, _ = raw_coefficients(path.coefs[cv.selected_index], data)
    out["tuned"] = {"rmse": rmse(coefs, theta), "seconds": seconds, "config": cfg}

    t0 = time.perf_counter()
    cv = kfold_cv_lars(data, folds=folds, seed=seed)
    seconds = time.perf_counter() - t0
    coefs, _ = raw_coefficients(cv.final_coefs, data)
    out["lars"] = {
        "rmse": rmse(coefs, theta),
        "seconds": seconds,
        "predicted_seconds": mlp.predict_lars_time(lars_model, feats),
    }
    return out
