import numpy as np
import pytest

from dcsvar.errors import DegenerateInputError, NotPositiveDefiniteError
from dcsvar.series import TimeSeriesMatrix
from dcsvar.whiten import (CholeskiOrdered, CovarianceSvd, DataSvd,
                           kurtosis_order, whiten)

VARIANTS = [CholeskiOrdered(), CholeskiOrdered((2, 0, 1)), CovarianceSvd(),
            DataSvd()]


def _sample(seed=0, t=300, n=3):
    rng = np.random.default_rng(seed)
    mix = rng.standard_normal((n, n)) + 2 * np.eye(n)
    return TimeSeriesMatrix(rng.standard_t(6, (t, n)) @ mix.T,
                            tuple(f"y{i}" for i in range(n)))


@pytest.mark.parametrize("method", VARIANTS)
def test_whitened_covariance_is_identity(method):
    data = _sample()
    white, info = whiten(data, method)
    z = white.values
    cov = (z - z.mean(axis=0)).T @ (z - z.mean(axis=0)) / z.shape[0]
    np.testing.assert_allclose(cov, np.eye(3), atol=1e-10)
    assert white.names == data.names
    assert info.factor.shape == (3, 3)


@pytest.mark.parametrize("method", VARIANTS)
def test_factor_reproduces_covariance(method):
    data = _sample(1)
    x = data.values
    cov = (x - x.mean(axis=0)).T @ (x - x.mean(axis=0)) / x.shape[0]
    _, info = whiten(data, method)
    np.testing.assert_allclose(info.factor @ info.factor.T, cov,
                               rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(info.inverse_factor @ info.factor, np.eye(3),
                               atol=1e-9)


def test_choleski_order_triangular_under_permutation():
    data = _sample(2)
    x = data.values
    order = (2, 0, 1)
    _, info = whiten(data, CholeskiOrdered(order))
    # permuting rows/cols into the requested order recovers lower triangular
    perm = np.array(order)
    permuted = info.factor[np.ix_(perm, perm)]
    np.testing.assert_allclose(permuted, np.tril(permuted), atol=1e-12)
    assert np.all(np.diag(permuted) > 0)
    # but the factor itself acts on the original column order
    cov = (x - x.mean(axis=0)).T @ (x - x.mean(axis=0)) / x.shape[0]
    np.testing.assert_allclose(info.factor @ info.factor.T, cov, rtol=1e-9)


def test_default_choleski_is_plain_lower_triangular():
    data = _sample(3)
    _, info = whiten(data, CholeskiOrdered())
    np.testing.assert_allclose(info.factor, np.tril(info.factor), atol=1e-12)


def test_data_svd_matches_covariance_root_up_to_rotation():
    data = _sample(4)
    white_d, _ = whiten(data, DataSvd())
    # left singular vectors scaled by sqrt(T): columns have norm sqrt(T)
    norms = np.linalg.norm(white_d.values, axis=0)
    np.testing.assert_allclose(norms, np.sqrt(data.values.shape[0]),
                               rtol=1e-10)


@pytest.mark.parametrize("method", VARIANTS)
def test_apply_matches_whiten(method):
    data = _sample(5)
    white, info = whiten(data, method)
    np.testing.assert_allclose(info.apply(data.values), white.values,
                               atol=1e-10)


def test_array_input_accepted():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((120, 2))
    white, _ = whiten(x, CovarianceSvd())
    z = white.values
    cov = (z - z.mean(axis=0)).T @ (z - z.mean(axis=0)) / z.shape[0]
    np.testing.assert_allclose(cov, np.eye(2), atol=1e-10)


def test_kurtosis_order_ranks_by_tail_weight():
    rng = np.random.default_rng(7)
    t = 4000
    cols = np.column_stack([rng.standard_normal(t),
                            rng.standard_t(3, t),
                            rng.uniform(-1, 1, t)])
    order = kurtosis_order(cols)
    assert list(order) == [1, 0, 2]


def test_choleski_order_validation():
    data = _sample(8)
    with pytest.raises(Exception, match="permutation"):
        whiten(data, CholeskiOrdered((0, 0, 1)))
    with pytest.raises(Exception, match="permutation"):
        whiten(data, CholeskiOrdered((0, 1)))


def test_rank_deficient_covariance_rejected():
    rng = np.random.default_rng(9)
    base = rng.standard_normal((50, 2))
    dup = np.column_stack([base, base[:, 0]])
    with pytest.raises(NotPositiveDefiniteError) as err:
        whiten(dup, CholeskiOrdered())
    assert err.value.smallest_eigenvalue <= 1e-8
    with pytest.raises(NotPositiveDefiniteError):
        whiten(dup, CovarianceSvd())


def test_too_few_rows_rejected():
    rng = np.random.default_rng(10)
    with pytest.raises(DegenerateInputError):
        whiten(rng.standard_normal((3, 3)), CholeskiOrdered())
