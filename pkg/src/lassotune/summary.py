"""Measurement pipeline: run the exact solver for ground truth, run the
coordinate-descent solver under a grid of configurations, record path error
and wall-clock time (including cross-validation), and persist the records.

Timing uses the monotonic wall clock around the full fit+CV call on a
single thread of control, so measurements stay comparable across records.
The SPE column is reproducible from (scenario, seed, config); timing
columns are environment-dependent.
"""

from __future__ import annotations

import csv
import math
import os
import time
from dataclasses import dataclass

import numpy as np

from .cd import DEFAULT_N_LAMBDA, SolverConfig, extended_lambda_grid, fit_path
from .cv import kfold_cv_cd
from .data import FLOAT_FMT, standardize
from .errors import LassoTuneError, MalformedRow
from .lars import lars_path
from .paths import SpeSpec, spe
from .synth import (
    Scenario,
    beta_pattern,
    features_from_cov,
    load_scenarios,
    sample_dataset,
    scenario_seed,
)

SUMMARY_HEADER = [
    "n", "p",
    "g1", "g2", "g3", "g4", "g5", "gm5", "gm4", "gm3", "gm2", "gm1",
    "tau", "n_lambda", "spe", "t_glmnet", "t_lars",
]
DEFAULT_TAUS = (1e-7, 1e-8, 1e-9)
DESK_MAX_N = 300
DESK_MAX_P = 200


@dataclass(frozen=True)
class SummaryRecord:
    """One measurement: problem characteristics, configuration, path error
    and runtimes.

    A failed configuration is flagged by non-finite spe/t_glmnet rather
    than aborting the pipeline; consumers filter such rows.
    """

    n: int
    p: int
    gamma: np.ndarray
    tau: float
    n_lambda: int
    spe: float
    t_glmnet_seconds: float
    t_lars_seconds: float | None = None

    def is_flagged(self) -> bool:
        return not (math.isfinite(self.spe) and math.isfinite(self.t_glmnet_seconds))


def default_config_grid(p: int, taus=DEFAULT_TAUS) -> list[SolverConfig]:
    """Cross product of thresholds with grid lengths {100, p/2, p, 2p}
    clamped to >= 100; clamping duplicates are removed."""
    lengths = sorted({max(DEFAULT_N_LAMBDA, v) for v in (100, p // 2, p, 2 * p)})
    return [SolverConfig(tau=t, n_lambda=m) for t in taus for m in lengths]


def run_scenario(
    scenario: Scenario,
    config_grid,
    seed: int,
    spe_spec: SpeSpec = SpeSpec(),
    cv_folds: int = 10,
) -> list[SummaryRecord]:
    """Execute one scenario: one dataset, one exact path, one record per
    configuration.

    t_glmnet is the wall clock of the full path fit plus 10-fold CV;
    t_lars is recorded once per dataset from the exact-path run.
    """
    if not config_grid:
        raise ValueError("config grid must be non-empty")
    ss = np.random.SeedSequence([int(seed)])
    cov_seed, beta_seed, data_seed, cv_seed = (
        int(v) for v in ss.generate_state(4, dtype=np.uint64)
    )
    cov = scenario.covariance_spec(cov_seed).materialize()
    feats = features_from_cov(scenario.n, scenario.p, cov)
    beta = beta_pattern(scenario.p, scenario.beta_pattern, beta_seed)
    raw = sample_dataset(scenario.n, cov, beta, scenario.sigma, data_seed)
    data = standardize(raw)

    records = []
    try:
        t0 = time.perf_counter()
        exact = lars_path(data)
        t_lars = time.perf_counter() - t0
    except LassoTuneError:
        for cfg in config_grid:
            records.append(
                _record(feats, cfg, spe=math.nan, t_glmnet=math.nan, t_lars=None)
            )
        return records

    for cfg in config_grid:
        try:
            grid = extended_lambda_grid(data, cfg.n_lambda)
            t0 = time.perf_counter()
            path = fit_path(data, grid, cfg.tau)
            kfold_cv_cd(data, grid, cfg.tau, folds=cv_folds, seed=cv_seed)
            t_glmnet = time.perf_counter() - t0
            spe_val = spe(exact, path, spe_spec)
        except LassoTuneError:
            records.append(
                _record(feats, cfg, spe=math.nan, t_glmnet=math.nan, t_lars=t_lars)
            )
            continue
        records.append(
            _record(feats, cfg, spe=spe_val, t_glmnet=t_glmnet, t_lars=t_lars)
        )
    return records


def _record(feats, cfg, spe, t_glmnet, t_lars) -> SummaryRecord:
    return SummaryRecord(
        n=feats.n,
        p=feats.p,
        gamma=feats.gamma.copy(),
        tau=cfg.tau,
        n_lambda=cfg.n_lambda,
        spe=spe,
        t_glmnet_seconds=t_glmnet,
        t_lars_seconds=t_lars,
    )


def build_summary(
    scenario_file,
    output,
    master_seed: int,
    config_sampling="grid",
    max_n: int | None = DESK_MAX_N,
    max_p: int | None = DESK_MAX_P,
    cv_folds: int = 10,
    progress=None,
) -> int:
    """Run every scenario replication and append records to the output CSV.

    Completed replication indices are journaled to ``output + '.journal'``
    so an interrupted run resumes without recomputing or duplicating work.
    Returns the total record count in the store.
    """
    scenarios = load_scenarios(scenario_file)
    for s in scenarios:
        if max_n is not None and s.n > max_n:
            raise ValueError(
                f"scenario n={s.n} exceeds the preset cap {max_n}; "
                "use the full preset for larger runs"
            )
        if max_p is not None and s.p > max_p:
            raise ValueError(
                f"scenario p={s.p} exceeds the preset cap {max_p}; "
                "use the full preset for larger runs"
            )
    if config_sampling != "grid":
        raise ValueError(f"unknown config sampling {config_sampling!r}")

    journal_path = str(output) + ".journal"
    done = set()
    if os.path.exists(journal_path):
        with open(journal_path) as fh:
            done = {int(line) for line in fh if line.strip()}

    jobs = []
    index = 0
    for s in scenarios:
        for _ in range(s.replications):
            jobs.append((index, s))
            index += 1

    with open(journal_path, "a") as journal:
        for index, s in jobs:
            if index in done:
                continue
            records = run_scenario(
                s,
                default_config_grid(s.p),
                seed=scenario_seed(master_seed, index),
                cv_folds=cv_folds,
            )
            write_records(records, output, append=True)
            journal.write(f"{index}\n")
            journal.flush()
            if progress is not None:
                progress(index, len(jobs))
    return sum(1 for _ in read_records(output))


def write_records(records, path, append: bool = True) -> None:
    """Append records to a CSV store, creating the header when the file is
    new; verifies the header when appending to an existing store."""
    exists = os.path.exists(path) and os.path.getsize(path) > 0
    if exists:
        with open(path, newline="") as fh:
            header = next(csv.reader(fh))
        _check_header(header)
    mode = "a" if (append and exists) else "w"
    with open(path, mode, newline="") as fh:
        writer = csv.writer(fh)
        if mode == "w":
            writer.writerow(SUMMARY_HEADER)
        for r in records:
            row = [str(r.n), str(r.p)]
            row += [FLOAT_FMT % g for g in r.gamma]
            row += [FLOAT_FMT % r.tau, str(r.n_lambda)]
            row.append("" if not math.isfinite(r.spe) else FLOAT_FMT % r.spe)
            row.append(
                ""
                if not math.isfinite(r.t_glmnet_seconds)
                else FLOAT_FMT % r.t_glmnet_seconds
            )
            row.append(
                "" if r.t_lars_seconds is None else FLOAT_FMT % r.t_lars_seconds
            )
            writer.writerow(row)


def read_records(path):
    """Stream records from a CSV store (generator; does not load the file
    into memory).  Malformed rows raise with their 1-based line number."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow("empty summary file", line=1) from None
        _check_header(header)
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(SUMMARY_HEADER):
                raise MalformedRow(
                    f"expected {len(SUMMARY_HEADER)} fields, got {len(row)}",
                    line=line_no,
                )
            try:
                yield SummaryRecord(
                    n=int(row[0]),
                    p=int(row[1]),
                    gamma=np.array([float(v) for v in row[2:12]]),
                    tau=float(row[12]),
                    n_lambda=int(row[13]),
                    spe=float(row[14]) if row[14] != "" else math.nan,
                    t_glmnet_seconds=float(row[15]) if row[15] != "" else math.nan,
                    t_lars_seconds=float(row[16]) if row[16] != "" else None,
                )
            except ValueError as exc:
                raise MalformedRow(f"{exc}", line=line_no) from None


def _check_header(header) -> None:
    if header == SUMMARY_HEADER:
        return
    missing = [c for c in SUMMARY_HEADER if c not in header]
    if missing:
        raise MalformedRow(f"missing column {missing[0]!r} in header", line=1)
    raise MalformedRow("unexpected summary header", line=1)
