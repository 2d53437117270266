import numpy as np
import pytest

import lassotune as lt
from lassotune.cd import dense_lambda_grid, objective
from lassotune.errors import NonFiniteInput, SingularGram
from lassotune.lars import eval_exact, kkt_residuals

from conftest import make_instance


def orthonormal_instance(n, p, seed):
    """Centered design with X'X/N = I to machine precision."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, p))
    g -= g.mean(axis=0)  # column space orthogonal to the constant vector
    q, _ = np.linalg.qr(g)
    x = q * np.sqrt(n)
    y = x @ (rng.standard_normal(p) * 2) + rng.standard_normal(n) * 0.3
    y -= y.mean()
    return lt.Dataset(
        x=x, y=y, standardized=True,
        x_means=np.zeros(p), x_scales=np.ones(p), y_mean=0.0,
    )


def test_orthogonal_design_closed_form():
    # with orthonormal columns each coefficient is the soft threshold of its
    # own correlation, and knots sit at the sorted correlation magnitudes
    d = orthonormal_instance(400, 8, seed=0)
    z = d.x.T @ d.y / d.n
    path = lt.lars_path(d)
    expected_knots = np.sort(np.abs(z))[::-1]
    assert np.abs(path.knots[: 8] - expected_knots).max() < 1e-6
    for lam in np.geomspace(path.lambda_max, 1e-4, 25):
        expected = lt.soft_threshold(z, float(lam))
        got = eval_exact(path, float(lam))
        assert np.abs(got - expected).max() < 1e-6


def test_single_predictor_two_knots():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((60, 1))
    y = 1.5 * x[:, 0] + rng.standard_normal(60) * 0.1
    d = lt.standardize(lt.raw_dataset(x, y))
    path = lt.lars_path(d)
    assert len(path.knots) == 2
    assert path.knots[1] == 0.0
    # linear segment between the two knots
    mid = path.knots[0] / 2
    assert eval_exact(path, float(mid)) == pytest.approx(path.knot_coefs[1] / 2)


def test_kkt_at_every_knot():
    for seed in range(5):
        d, _ = make_instance(200, 50, 0.5, seed=seed)
        path = lt.lars_path(d)
        for k, lam in enumerate(path.knots):
            gap, excess, signs_ok = kkt_residuals(d, path.knot_coefs[k], float(lam))
            assert gap <= 1e-8
            assert excess <= 1e-8
            assert signs_ok


def test_lars_never_worse_than_cd():
    for seed in range(3):
        d, _ = make_instance(100, 20, 0.5, seed=seed)
        path = lt.lars_path(d)
        rng = np.random.default_rng(seed)
        for lam in rng.uniform(1e-3, path.lambda_max, size=50):
            lam = float(lam)
            beta_cd, _ = lt.fit_at_lambda(d, lam, None, 1e-10)
            obj_exact = objective(d, eval_exact(path, lam), lam)
            obj_cd = objective(d, beta_cd, lam)
            assert obj_exact <= obj_cd + 1e-9


def test_continuity_at_knots():
    d, _ = make_instance(120, 25, 0.3, seed=3)
    path = lt.lars_path(d)
    delta = 1e-8
    for lam in path.knots[1:-1]:
        lam = float(lam)
        lo = eval_exact(path, max(lam - delta, 0.0))
        hi = eval_exact(path, lam + delta)
        assert np.abs(hi - lo).max() < 1e-5


def test_sign_consistency_at_knots():
    d, _ = make_instance(150, 30, 0.5, seed=4)
    path = lt.lars_path(d)
    for k, lam in enumerate(path.knots):
        if lam <= 1e-9:
            continue
        beta = path.knot_coefs[k]
        c = d.x.T @ (d.y - d.x @ beta) / d.n
        nz = beta != 0.0
        assert np.all(np.sign(c[nz]) == np.sign(beta[nz]))


def test_knot_count_bound_statistical():
    # the active set changes at least min(N-1, p) times along a full path
    counts, bounds = [], []
    for seed in range(10):
        n, p = (120, 40) if seed % 2 == 0 else (40, 80)
        d, _ = make_instance(n, p, 0.0, seed=200 + seed, pattern=1)
        path = lt.lars_path(d)
        counts.append(len(path.knots) - 1)
        bounds.append(min(n - 1, p))
    ok = sum(c >= b for c, b in zip(counts, bounds))
    assert ok >= 8  # generic data; allow rare early terminations


def test_active_set_changes_between_knots():
    d, _ = make_instance(100, 20, 0.3, seed=5)
    path = lt.lars_path(d)
    sets = [frozenset(s) for s in path.active_sets]
    # every event knot changes the set; only the terminal knot may repeat
    for a, b in zip(sets[:-2], sets[1:-1]):
        assert a != b


def test_eval_exact_boundaries():
    d, _ = make_instance(90, 12, 0.0, seed=6)
    path = lt.lars_path(d)
    assert np.all(eval_exact(path, 2 * path.lambda_max) == 0.0)
    for k in (0, len(path.knots) // 2, -1):
        lam = float(path.knots[k])
        assert np.array_equal(eval_exact(path, lam), path.knot_coefs[k])
    km = len(path.knots) // 2
    mid = (path.knots[km] + path.knots[km + 1]) / 2
    expected = (path.knot_coefs[km] + path.knot_coefs[km + 1]) / 2
    assert eval_exact(path, float(mid)) == pytest.approx(expected)
    below = eval_exact(path, path.knots[-1] * 0.5) if path.knots[-1] > 0 else None
    if below is not None:
        assert np.array_equal(below, path.knot_coefs[-1])


def test_duplicated_column_raises():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((50, 4))
    x[:, 3] = x[:, 1]
    y = x @ np.array([1.0, -2.0, 0.5, 0.0]) + 0.1 * rng.standard_normal(50)
    d = lt.standardize(lt.raw_dataset(x, y))
    with pytest.raises(SingularGram):
        lt.lars_path(d)


def test_requires_standardized():
    rng = np.random.default_rng(8)
    raw = lt.raw_dataset(rng.standard_normal((30, 3)), rng.standard_normal(30))
    with pytest.raises(ValueError):
        lt.lars_path(raw)


def test_first_knot_zero_and_decreasing():
    d, _ = make_instance(80, 15, 0.5, seed=9)
    path = lt.lars_path(d)
    assert np.all(path.knot_coefs[0] == 0.0)
    assert np.all(np.diff(path.knots) < 0)
    assert path.knots[-1] >= 0.0


def test_path_matches_dense_cd_globally():
    d, _ = make_instance(150, 30, 0.0, seed=10)
    exact = lt.lars_path(d)
    approx = lt.fit_path(d, dense_lambda_grid(d, 1500), 1e-12)
    assert lt.spe(exact, approx) < 1e-4
