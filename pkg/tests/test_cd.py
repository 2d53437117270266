import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lassotune as lt
from lassotune.cd import dense_lambda_grid, objective, null_deviance
from lassotune.errors import (
    DegenerateResponse,
    InvalidConfig,
    MaxIterationsExceeded,
)
from lassotune.lars import eval_exact, kkt_residuals

from conftest import make_instance


# --- soft_threshold ---


def test_soft_threshold_values():
    assert lt.soft_threshold(2.0, 1.0) == 1.0
    assert lt.soft_threshold(-0.5, 1.0) == 0.0
    assert lt.soft_threshold(-3.0, 1.0) == -2.0


@given(st.floats(-1e6, 1e6), st.floats(0, 1e6))
def test_soft_threshold_shrinks(z, lam):
    s = lt.soft_threshold(z, lam)
    assert abs(s) <= abs(z) + 1e-15
    assert s == 0.0 or np.sign(s) == np.sign(z)
    assert abs(s) == max(abs(z) - lam, 0.0)


# --- lambda_max ---


def test_lambda_max_hand_case():
    d = lt.raw_dataset([[1.0], [-1.0]], [2.0, -2.0])
    d = lt.standardize(d)
    assert lt.lambda_max(d) == pytest.approx(2.0, abs=1e-12)


def test_lambda_max_matches_brute_force():
    d, _ = make_instance(50, 10, 0.0, seed=0)
    expected = max(abs(float(d.x[:, j] @ d.y)) / d.n for j in range(d.p))
    assert lt.lambda_max(d) == pytest.approx(expected, rel=1e-15)


def test_lambda_max_degenerate():
    # y orthogonal to the single standardized column
    x = np.array([[1.0], [-1.0], [1.0], [-1.0]])
    y = np.array([1.0, 1.0, -1.0, -1.0])
    d = lt.standardize(lt.raw_dataset(x, y))
    with pytest.raises(DegenerateResponse):
        lt.lambda_max(d)


# --- grids ---


def test_default_grid_n_ge_p():
    d, _ = make_instance(100, 50, 0.0, seed=1)
    g = lt.default_lambda_grid(d)
    assert len(g) == 100
    assert g.values[0] == g.lambda_max
    assert g.lambda_min_def == pytest.approx(1e-4 * g.lambda_max, rel=1e-12)
    assert g.values[-1] == pytest.approx(g.lambda_min_def, rel=1e-12)


def test_default_grid_n_lt_p():
    d, _ = make_instance(50, 80, 0.0, seed=2, pattern=2)
    g = lt.default_lambda_grid(d)
    assert g.lambda_min_def == pytest.approx(1e-2 * g.lambda_max, rel=1e-12)


def test_default_grid_log_spacing():
    d, _ = make_instance(60, 10, 0.0, seed=3)
    g = lt.default_lambda_grid(d)
    ratios = g.values[1:] / g.values[:-1]
    assert np.abs(ratios - ratios[0]).max() < 1e-12


def test_extended_grid_identity_at_100():
    d, _ = make_instance(60, 10, 0.0, seed=4)
    assert np.array_equal(
        lt.extended_lambda_grid(d, 100).values, lt.default_lambda_grid(d).values
    )


def test_extended_grid_appended_values():
    d, _ = make_instance(60, 10, 0.0, seed=5)
    g = lt.extended_lambda_grid(d, 102)
    expected = [g.lambda_min_def * 2 / 3, g.lambda_min_def / 3]
    assert np.allclose(g.values[-2:], expected, rtol=1e-12)
    # the stated hand case: floor 0.3 -> appended 0.2, 0.1
    assert np.allclose(
        0.3 * np.arange(2, 0, -1) / 3.0, [0.2, 0.1]
    )


def test_extended_grid_rejects_small():
    d, _ = make_instance(60, 10, 0.0, seed=6)
    with pytest.raises(InvalidConfig):
        lt.extended_lambda_grid(d, 99)


def test_extended_grid_property_1000_samples():
    d, _ = make_instance(80, 60, 0.0, seed=7)
    rng = np.random.default_rng(8)
    for _ in range(1000):
        n_lambda = int(rng.integers(100, 2 * d.p + 1))
        g = lt.extended_lambda_grid(d, n_lambda)
        assert len(g) == n_lambda
        assert np.all(g.values > 0)
        assert np.all(np.diff(g.values) < 0)


def test_dense_grid_covers_reference_range():
    d, _ = make_instance(60, 80, 0.0, seed=9, pattern=2)
    g = dense_lambda_grid(d, 500)
    assert len(g) == 500
    assert g.values[-1] <= 5e-4


# --- fit_at_lambda ---


def test_fit_above_lambda_max_zero_in_one_sweep():
    d, _ = make_instance(60, 10, 0.5, seed=10)
    lam = lt.lambda_max(d)
    beta, sweeps = lt.fit_at_lambda(d, lam * 1.5, None, 1e-7)
    assert np.all(beta == 0.0)
    assert sweeps == 1
    beta, sweeps = lt.fit_at_lambda(d, lam, None, 1e-7)
    assert np.all(beta == 0.0)


def test_fit_single_coordinate_closed_form():
    rng = np.random.default_rng(11)
    x = rng.standard_normal((80, 1))
    y = 2.0 * x[:, 0] + rng.standard_normal(80)
    d = lt.standardize(lt.raw_dataset(x, y))
    z = float(d.x[:, 0] @ d.y) / d.n
    lam = abs(z) / 3
    beta, _ = lt.fit_at_lambda(d, lam, None, 1e-14)
    assert beta[0] == pytest.approx(lt.soft_threshold(z, lam), abs=1e-10)


def test_fit_matches_lars_at_tight_tau():
    d, _ = make_instance(100, 5, 0.0, seed=12)
    exact = lt.lars_path(d)
    for lam in np.geomspace(exact.lambda_max * 0.8, exact.lambda_max * 0.01, 5):
        beta, _ = lt.fit_at_lambda(d, float(lam), None, 1e-12)
        assert np.abs(beta - eval_exact(exact, float(lam))).max() < 1e-6


def test_fit_iteration_cap():
    d, _ = make_instance(100, 40, 0.9, seed=13)
    lam = lt.lambda_max(d) * 1e-3
    with pytest.raises(MaxIterationsExceeded):
        lt.fit_at_lambda(d, lam, None, 1e-13, max_sweeps=2)


def test_fit_kkt_at_tight_tau():
    # the KKT slack left by the improvement-based stopping rule scales with
    # sqrt(tau) and with predictor correlation; at low correlation and
    # tau = 1e-14 the stated 1e-6 bound holds with margin
    for seed in (14, 15):
        d, _ = make_instance(120, 30, 0.0, seed=seed)
        grid = lt.extended_lambda_grid(d, 150)
        path = lt.fit_path(d, grid, 1e-14)
        for k, lam in enumerate(grid.values):
            gap, excess, signs_ok = kkt_residuals(d, path.coefs[k], float(lam))
            assert gap <= 1e-6
            assert excess <= 1e-6
            assert signs_ok


def test_monotone_descent_objective():
    # final objective never exceeds the zero-vector objective
    d, _ = make_instance(90, 25, 0.5, seed=15)
    grid = lt.default_lambda_grid(d)
    path = lt.fit_path(d, grid, 1e-8)
    zero = np.zeros(d.p)
    for k, lam in enumerate(grid.values):
        assert objective(d, path.coefs[k], float(lam)) <= objective(d, zero, float(lam)) + 1e-12


# --- fit_path ---


def test_path_single_point_grid():
    d, _ = make_instance(60, 10, 0.0, seed=16)
    lam_max = lt.lambda_max(d)
    from lassotune.cd import LambdaGrid

    g = LambdaGrid(
        values=np.array([lam_max]), lambda_max=lam_max, lambda_min_def=lam_max
    )
    path = lt.fit_path(d, g, 1e-8)
    assert np.all(path.coefs[0] == 0.0)


def test_path_zero_boundary_exact():
    d, _ = make_instance(70, 15, 0.5, seed=17)
    path = lt.fit_path(d, lt.default_lambda_grid(d), 1e-7)
    assert np.all(path.coefs[0] == 0.0)


def test_path_dense_grid_spe_small():
    d, _ = make_instance(200, 50, 0.0, seed=18)
    exact = lt.lars_path(d)
    path = lt.fit_path(d, dense_lambda_grid(d, 2000), 1e-12)
    assert lt.spe(exact, path) < 1e-4


def test_threshold_monotonicity_statistical():
    # stricter threshold does not worsen the median path error
    spes = {1e-7: [], 1e-9: []}
    for seed in range(20):
        d, _ = make_instance(80, 40, 0.5, seed=100 + seed)
        exact = lt.lars_path(d)
        grid = lt.extended_lambda_grid(d, 150)
        for tau in spes:
            spes[tau].append(lt.spe(exact, lt.fit_path(d, grid, tau)))
    assert np.median(spes[1e-9]) <= np.median(spes[1e-7])


def test_path_iterations_recorded():
    d, _ = make_instance(60, 10, 0.0, seed=19)
    path = lt.fit_path(d, lt.default_lambda_grid(d), 1e-7)
    assert path.iterations.shape == (100,)
    assert np.all(path.iterations >= 1)


def test_solver_config_validation():
    with pytest.raises(InvalidConfig):
        lt.SolverConfig(tau=0.0, n_lambda=100)
    with pytest.raises(InvalidConfig):
        lt.SolverConfig(tau=1e-8, n_lambda=99)
    cfg = lt.SolverConfig(tau=1e-8, n_lambda=100)
    assert cfg.tau == 1e-8


def test_null_deviance_convention():
    d, _ = make_instance(50, 5, 0.0, seed=20)
    assert null_deviance(d) == pytest.approx(float(d.y @ d.y) / d.n, rel=1e-15)
