"""Shared test helpers: synthetic instances and fabricated summary records."""

import math

import numpy as np
import pytest

import lassotune as lt
from lassotune.summary import SummaryRecord


def make_instance(n, p, rho, seed, pattern=1, sigma=1.0, n_test=0):
    """Standardized compound-symmetry instance (rho=0 gives independence)."""
    cov = lt.cov_compound_symmetry(p, rho) if rho > 0 else np.eye(p)
    beta = lt.beta_pattern(p, pattern, seed)
    if n_test:
        raw, x_test, y_test = lt.sample_dataset(n, cov, beta, sigma, seed, n_test=n_test)
        return lt.standardize(raw), beta, x_test, y_test
    raw = lt.sample_dataset(n, cov, beta, sigma, seed)
    return lt.standardize(raw), beta


def fabricate_records(count, seed, with_lars=True):
    """Plausible synthetic summary records with learnable targets.

    Targets follow smooth laws of the features plus mild noise, so small
    surrogate models trained on them behave sensibly in unit tests without
    running the measurement pipeline.
    """
    rng = np.random.default_rng(seed)
    records = []
    for _ in range(count):
        n = int(rng.integers(30, 301))
        p = int(rng.integers(10, 201))
        g1 = float(rng.uniform(1.0, p / 2.0))
        gm1 = float(rng.uniform(0.01, 0.8))
        gamma = np.concatenate(
            [np.linspace(g1, 1.0, 5), np.linspace(0.9, gm1, 5)]
        )
        tau = float(10.0 ** rng.uniform(-9, -7))
        n_lambda = int(rng.integers(100, 401))
        spe = (
            0.05
            * (g1 / p) ** 0.5
            * (tau / 1e-8) ** 0.25
            * (100.0 / n_lambda) ** 0.5
            * math.exp(rng.normal(0.0, 0.1))
        )
        t_glmnet = (
            1e-7 * n * p * (n_lambda / 100.0) * (1e-8 / tau) ** 0.15
            * math.exp(rng.normal(0.0, 0.1))
        )
        t_lars = 2e-9 * n * min(n, p) ** 2 * math.exp(rng.normal(0.0, 0.1))
        records.append(
            SummaryRecord(
                n=n,
                p=p,
                gamma=gamma,
                tau=tau,
                n_lambda=n_lambda,
                spe=spe,
                t_glmnet_seconds=t_glmnet,
                t_lars_seconds=t_lars if with_lars else None,
            )
        )
    return records


@pytest.fixture(scope="session")
def tiny_models():
    """Small surrogate models trained on fabricated records; enough for
    plumbing tests of prediction, tuning and the CLI."""
    from lassotune.mlp import LARS_TIME, PERFORMANCE, TrainSpec, train

    records = fabricate_records(400, seed=7)
    spec = TrainSpec(hidden=(16, 12), learning_rate=3e-3, epochs=150, batch_size=128, seed=0)
    perf = train(records, spec, PERFORMANCE)
    lars = train(records, spec, LARS_TIME)
    return perf, lars
