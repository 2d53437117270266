"""Synthetic problem generation: covariance families, coefficient patterns,
Gaussian sampling, and eigenvalue feature extraction."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset, raw_dataset, sample_covariance
from .errors import (
    EigenFailure,
    InvalidPattern,
    InvalidRho,
    NotPositiveDefinite,
    NumericalFailure,
)

COV_FAMILIES = (
    "compound_symmetry",
    "ar1",
    "random_structured",
    "inverse_random_structured",
)
_COND_LIMIT = 1e12
N_GAMMA = 10


@dataclass(frozen=True)
class CovarianceSpec:
    """One of the four covariance families with its parameters.

    ``rho`` applies to the first two families, ``seed`` to the last two.
    """

    family: str
    p: int
    rho: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.family not in COV_FAMILIES:
            raise ValueError(f"unknown covariance family {self.family!r}")
        if self.p < 1:
            raise ValueError("p must be positive")
        if self.family in ("compound_symmetry", "ar1") and self.rho is None:
            raise ValueError(f"{self.family} requires rho")
        if self.family.endswith("random_structured") and self.seed is None:
            raise ValueError(f"{self.family} requires a seed")

    def materialize(self) -> np.ndarray:
        if self.family == "compound_symmetry":
            cov = cov_compound_symmetry(self.p, self.rho)
        elif self.family == "ar1":
            cov = cov_ar1(self.p, self.rho)
        elif self.family == "random_structured":
            cov = cov_random_structured(self.p, self.seed)
        else:
            cov = cov_inverse_random_structured(self.p, self.seed)
        if np.linalg.eigvalsh(cov).min() <= 0.0:
            raise NotPositiveDefinite(f"{self.family} produced a non-SPD matrix")
        return cov


@dataclass(frozen=True)
class DataFeatures:
    """Sample size, dimension, and the ten extreme eigenvalues: the top
    five in descending order followed by the fifth-smallest through the
    smallest."""

    n: int
    p: int
    gamma: np.ndarray

    def __post_init__(self):
        g = self.gamma
        if g.shape != (N_GAMMA,):
            raise ValueError(f"gamma must have {N_GAMMA} entries")
        if np.any(g < 0.0):
            raise ValueError("eigenvalue features must be nonnegative")
        if np.any(np.diff(g[:5]) > 0.0) or np.any(np.diff(g[5:]) > 0.0):
            raise ValueError("gamma blocks must be non-increasing")
        g.setflags(write=False)

    def vector(self) -> np.ndarray:
        return np.concatenate([[float(self.n), float(self.p)], self.gamma])


def _check_rho(rho: float) -> float:
    if not (0.0 < rho < 1.0):
        raise InvalidRho(f"rho must lie in (0, 1), got {rho}")
    return float(rho)


def cov_compound_symmetry(p: int, rho: float) -> np.ndarray:
    """Unit diagonal, constant off-diagonal correlation rho."""
    rho = _check_rho(rho)
    return (1.0 - rho) * np.eye(p) + rho * np.ones((p, p))


def cov_ar1(p: int, rho: float) -> np.ndarray:
    """Entries rho^|i-j| (geometrically decaying correlation)."""
    rho = _check_rho(rho)
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def _random_structured_parts(p: int, seed: int):
    """Build the random-structured precision pipeline; returns
    (omega_tilde, omega, c) where c = inv(omega) is the covariance."""
    if p < 2:
        raise ValueError("random structured covariance needs p >= 2")
    rng = np.random.default_rng(seed)
    magnitude = rng.uniform(0.25, 0.75, size=(p, p))
    sign = rng.integers(0, 2, size=(p, p)) * 2 - 1
    e = sign * magnitude
    # zero a random share of symmetric off-diagonal pairs; the share itself
    # is drawn once per matrix
    share = rng.uniform(0.3, 0.9)
    iu = np.triu_indices(p, k=1)
    zero_pair = rng.random(iu[0].size) < share
    mask = np.zeros((p, p), dtype=bool)
    mask[iu[0][zero_pair], iu[1][zero_pair]] = True
    mask |= mask.T
    e[mask] = 0.0
    e_sym = (e + e.T) / 2.0
    evals = np.linalg.eigvalsh(e_sym)
    omega_tilde = e_sym + (0.1 - evals[0]) * np.eye(p)
    cond = (evals[-1] + 0.1 - evals[0]) / 0.1
    if cond > _COND_LIMIT:
        raise NumericalFailure(f"shifted matrix condition {cond:.3e} too large")
    inv_ot = np.linalg.inv(omega_tilde)
    scale_half = np.sqrt(np.diag(inv_ot))
    omega = scale_half[:, None] * omega_tilde * scale_half[None, :]
    try:
        c = np.linalg.inv(omega)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"precision matrix inversion failed: {exc}") from exc
    return omega_tilde, omega, c


def cov_random_structured(p: int, seed: int) -> np.ndarray:
    """Sparse random precision structure rescaled to unit partial variances;
    deterministic in the seed."""
    _, _, c = _random_structured_parts(p, seed)
    return (c + c.T) / 2.0


def cov_inverse_random_structured(p: int, seed: int) -> np.ndarray:
    """The matrix whose inverse is cov_random_structured(p, seed)."""
    _, omega, _ = _random_structured_parts(p, seed)
    return (omega + omega.T) / 2.0


def beta_pattern(p: int, pattern: int, seed: int) -> np.ndarray:
    """True-coefficient patterns: half or a tenth of the entries nonzero,
    with values 1 or standard-normal draws; positions permuted by the seed.

        1: floor(p/2) ones          3: floor(p/2) N(0,1) draws
        2: floor(p/10) ones         4: floor(p/10) N(0,1) draws
    """
    if pattern not in (1, 2, 3, 4):
        raise InvalidPattern(f"pattern must be 1..4, got {pattern}")
    nnz = p // 2 if pattern in (1, 3) else p // 10
    if nnz < 1:
        raise InvalidPattern(
            f"pattern {pattern} needs p >= 10, got p={p}"
        )
    rng = np.random.default_rng(seed)
    beta = np.zeros(p)
    if pattern in (1, 2):
        beta[:nnz] = 1.0
    else:
        beta[:nnz] = rng.standard_normal(nnz)
    return beta[rng.permutation(p)]


def sample_dataset(n, cov, beta, sigma, seed, n_test: int = 0):
    """Draw rows from N(0, cov) and responses y = X beta + eps with
    eps ~ N(0, sigma^2 I); deterministic in the seed.

    Returns the raw Dataset, or (Dataset, x_test, y_test) when held-out
    rows are requested.  Train rows do not depend on n_test.
    """
    cov = np.asarray(cov, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (cov.shape[0],):
        raise ValueError("beta length must match cov dimension")
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"covariance is not SPD: {exc}") from exc
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, cov.shape[0])) @ chol.T
    y = x @ beta + sigma * rng.standard_normal(n)
    train = raw_dataset(x, y)
    if n_test == 0:
        return train
    x_test = rng.standard_normal((n_test, cov.shape[0])) @ chol.T
    y_test = x_test @ beta + sigma * rng.standard_normal(n_test)
    return train, x_test, y_test


def eigen_features(cov) -> np.ndarray:
    """Ten extreme eigenvalues in the DataFeatures ordering.

    For p < 10 the missing slots repeat the nearest available extreme so the
    features stay in the plausible eigenvalue range.
    """
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("cov must be square")
    if not np.allclose(cov, cov.T, atol=1e-10, rtol=0.0):
        raise ValueError("cov must be symmetric")
    try:
        evals = np.linalg.eigvalsh(cov)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigenvalue computation failed: {exc}") from exc
    desc = np.maximum(evals[::-1], 0.0)
    p = desc.size
    top = desc[np.minimum(np.arange(5), p - 1)]
    bottom = desc[np.maximum(np.arange(p - 5, p), 0)]
    return np.concatenate([top, bottom])


def dataset_features(data: Dataset) -> DataFeatures:
    """Features of an observed dataset, using the sample covariance of the
    (standardized) design; shares the ordering convention of training-time
    features so surrogate models consume both interchangeably."""
    return DataFeatures(
        n=data.n, p=data.p, gamma=eigen_features(sample_covariance(data.x))
    )


def features_from_cov(n: int, p: int, cov) -> DataFeatures:
    """Training-time features from a known covariance matrix."""
    return DataFeatures(n=n, p=p, gamma=eigen_features(cov))


@dataclass(frozen=True)
class Scenario:
    """One cell of the simulation design."""

    n: int
    p: int
    family: str
    beta_pattern: int
    sigma: float
    rho: float | None = None
    replications: int = 1

    def __post_init__(self):
        if self.family not in COV_FAMILIES:
            raise ValueError(f"unknown covariance family {self.family!r}")
        if self.family in ("compound_symmetry", "ar1") and self.rho is None:
            raise ValueError(f"{self.family} requires rho")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")

    def covariance_spec(self, seed: int | None) -> CovarianceSpec:
        return CovarianceSpec(family=self.family, p=self.p, rho=self.rho, seed=seed)


def load_scenarios(path) -> list[Scenario]:
    """Read a scenario list from JSON: a list of objects with keys
    n, p, family, beta_pattern, sigma and optionally rho, replications."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"scenario file is not valid JSON: {exc}") from exc
    if not isinstance(raw, list) or not raw:
        raise ValueError("scenario file must contain a non-empty list")
    scenarios = []
    for i, entry in enumerate(raw):
        try:
            scenarios.append(
                Scenario(
                    n=int(entry["n"]),
                    p=int(entry["p"]),
                    family=str(entry["family"]),
                    beta_pattern=int(entry["beta_pattern"]),
                    sigma=float(entry["sigma"]),
                    rho=float(entry["rho"]) if "rho" in entry else None,
                    replications=int(entry.get("replications", 1)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"scenario {i}: {exc}") from exc
    return scenarios


def write_scenarios(scenarios, path) -> None:
    payload = []
    for s in scenarios:
        entry = {
            "n": s.n,
            "p": s.p,
            "family": s.family,
            "beta_pattern": s.beta_pattern,
            "sigma": s.sigma,
            "replications": s.replications,
        }
        if s.rho is not None:
            entry["rho"] = s.rho
        payload.append(entry)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def scenario_seed(master_seed: int, index: int) -> int:
    """Counter-based seed stream: independent per scenario index."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
