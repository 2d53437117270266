import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lassotune as lt
from lassotune.errors import MalformedRow, NonFiniteInput, ZeroVarianceColumn


def test_standardize_fixed_point():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((40, 5))
    y = rng.standard_normal(40)
    d1 = lt.standardize(lt.raw_dataset(x, y))
    d2 = lt.standardize(lt.raw_dataset(d1.x, d1.y))
    assert np.abs(d2.x - d1.x).max() < 1e-12
    assert np.abs(d2.y - d1.y).max() < 1e-12


def test_standardize_hand_case():
    # column (2, 0): mean 1, 1/N variance 1 -> standardized (1, -1)
    d = lt.standardize(lt.raw_dataset([[2.0], [0.0]], [1.0, -1.0]))
    assert np.allclose(d.x[:, 0], [1.0, -1.0])
    assert np.allclose(d.y, [1.0, -1.0])
    assert d.y_mean == 0.0


def test_standardize_constant_column():
    with pytest.raises(ZeroVarianceColumn) as exc:
        lt.standardize(lt.raw_dataset([[1.0, 3.0], [2.0, 3.0]], [0.0, 1.0]))
    assert exc.value.column == 1


def test_non_finite_rejected():
    with pytest.raises(NonFiniteInput):
        lt.raw_dataset([[1.0, np.nan], [2.0, 3.0]], [0.0, 1.0])


def test_standardized_invariants():
    rng = np.random.default_rng(1)
    x = rng.uniform(-5, 5, size=(100, 8)) * rng.uniform(0.1, 30, size=8)
    y = rng.standard_normal(100) * 12 + 4
    d = lt.standardize(lt.raw_dataset(x, y))
    assert np.abs(d.x.mean(axis=0)).max() <= 1e-10
    assert np.abs(d.x.var(axis=0) - 1).max() <= 1e-8
    assert abs(d.y.mean()) <= 1e-10


def test_dataset_immutability():
    d = lt.standardize(lt.raw_dataset([[2.0], [0.0]], [1.0, -1.0]))
    with pytest.raises(ValueError):
        d.x[0, 0] = 5.0


def test_raw_view_round_trip():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((30, 4)) * 3 + 1
    y = rng.standard_normal(30) + 2
    d = lt.standardize(lt.raw_dataset(x, y))
    from lassotune.data import raw_view

    xr, yr = raw_view(d)
    assert np.abs(xr - x).max() < 1e-10
    assert np.abs(yr - y).max() < 1e-10


def test_raw_coefficients_consistency():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((50, 6)) * rng.uniform(0.5, 4, size=6)
    y = rng.standard_normal(50)
    d = lt.standardize(lt.raw_dataset(x, y))
    coefs = rng.standard_normal(6)
    beta_raw, intercept = lt.raw_coefficients(coefs, d)
    new_x = rng.standard_normal((7, 6))
    via_std = lt.predict(coefs, d, new_x)
    via_raw = new_x @ beta_raw + intercept
    assert np.abs(via_std - via_raw).max() < 1e-10


def test_sample_covariance_convention():
    x = np.array([[1.0, 2.0], [3.0, 2.0], [5.0, 8.0]])
    cov = lt.sample_covariance(x)
    xc = x - x.mean(axis=0)
    assert np.allclose(cov, xc.T @ xc / 3.0)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    x = rng.standard_normal((20, 3))
    y = rng.standard_normal(20)
    path = tmp_path / "data.csv"
    lt.write_csv_dataset(path, x, y)
    d = lt.read_csv_dataset(path)
    assert np.array_equal(d.x, x)
    assert np.array_equal(d.y, y)
    assert not d.standardized


def test_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,y\n1,2,3\n4,5,6\n")
    with pytest.raises(MalformedRow) as exc:
        lt.read_csv_dataset(path)
    assert exc.value.line == 1


def test_csv_missing_value(tmp_path):
    path = tmp_path / "gap.csv"
    path.write_text("x1,x2,y\n1,2,3\n4,,6\n")
    with pytest.raises(MalformedRow) as exc:
        lt.read_csv_dataset(path)
    assert exc.value.line == 3


def test_csv_bad_field(tmp_path):
    path = tmp_path / "junk.csv"
    path.write_text("x1,y\n1,2\noops,4\n")
    with pytest.raises(MalformedRow) as exc:
        lt.read_csv_dataset(path)
    assert exc.value.line == 3


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(1, 6), st.integers(0, 10_000))
def test_standardize_always_valid(n, p, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p)) * rng.uniform(0.1, 10, size=p)
    x += rng.uniform(-3, 3, size=p)
    y = rng.standard_normal(n)
    try:
        d = lt.standardize(lt.raw_dataset(x, y))
    except ZeroVarianceColumn:
        return  # tiny n can produce constant columns by chance
    assert d.standardized
