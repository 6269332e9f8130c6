"""Prewhitening transforms applied to residuals before rotation search.

Each variant produces rows with identity sample covariance; they differ in
which square root of the covariance is used, which matters once shocks are
heavy-tailed enough that sample covariances stop settling down.  The factor
``P`` always satisfies ``whitened = (X - mean) @ inv(P).T`` and
``P @ P.T = sample covariance`` (divisor T, not T-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DegenerateInputError, NotPositiveDefiniteError, ParameterError
from .series import TimeSeriesMatrix, as_timeseries
from .shocks import sample_kurtosis

__all__ = [
    "CholeskiOrdered", "CovarianceSvd", "DataSvd", "Whitener", "whiten",
    "kurtosis_order",
]


@dataclass(frozen=True)
class CholeskiOrdered:
    """Choleski factor of the sample covariance taken in the variable order
    ``order`` (a permutation of ``0..n-1``; ``None`` keeps the natural order).
    The factor is lower triangular after permuting rows/columns to ``order``.
    """

    order: tuple[int, ...] | None = None


@dataclass(frozen=True)
class CovarianceSvd:
    """Symmetric positive square root of the sample covariance."""


@dataclass(frozen=True)
class DataSvd:
    """Left singular vectors of the centered data, scaled by sqrt(T)."""


WhitenVariant = CholeskiOrdered | CovarianceSvd | DataSvd


@dataclass(frozen=True)
class Whitener:
    """Fitted whitening transform.

    ``factor`` is the square root ``P`` of the sample covariance that was
    inverted; ``inverse_factor`` its inverse, so candidate unmixing matrices
    are ``rotation @ inverse_factor``.
    """

    variant: WhitenVariant
    mean: np.ndarray
    factor: np.ndarray
    inverse_factor: np.ndarray
    nobs: int

    def apply(self, data) -> np.ndarray:
        x = as_timeseries(data).values
        return (x - self.mean) @ self.inverse_factor.T


def _permutation_matrix_order(order: tuple[int, ...], n: int) -> np.ndarray:
    if sorted(order) != list(range(n)):
        raise ParameterError(
            f"order must be a permutation of 0..{n - 1}, got {order}")
    return np.asarray(order, dtype=int)


def whiten(data, variant: WhitenVariant | None = None
           ) -> tuple[TimeSeriesMatrix, Whitener]:
    """Demean ``data`` and transform it to identity sample covariance.

    Returns the whitened series (columns in the original variable order for
    every variant, including ordered Choleski) and the fitted
    :class:`Whitener`.
    """
    if variant is None:
        variant = CholeskiOrdered()
    ts = as_timeseries(data)
    x = ts.values
    t_obs, n = x.shape
    if t_obs < n + 1:
        raise DegenerateInputError(
            f"whitening needs more than n+1 = {n + 1} rows, got {t_obs}")
    if not np.all(np.isfinite(x)):
        raise DegenerateInputError("whitening input contains non-finite values")
    mean = x.mean(axis=0)
    xc = x - mean

    if isinstance(variant, DataSvd):
        u, sv, vt = np.linalg.svd(xc, full_matrices=False)
        if sv[-1] <= sv[0] * 1e-13:
            raise NotPositiveDefiniteError(
                "centered data is numerically rank deficient "
                f"(smallest/largest singular value = {sv[-1] / sv[0]:.3e})")
        root_t = np.sqrt(t_obs)
        whitened = root_t * u
        factor = vt.T * (sv / root_t)
        inverse = root_t * (vt / sv[:, None])
    elif isinstance(variant, CovarianceSvd):
        cov = xc.T @ xc / t_obs
        eigval, eigvec = np.linalg.eigh(cov)
        if eigval[0] <= 0.0:
            raise NotPositiveDefiniteError(
                "sample covariance is not positive definite",
                smallest_eigenvalue=float(eigval[0]))
        factor = (eigvec * np.sqrt(eigval)) @ eigvec.T
        inverse = (eigvec / np.sqrt(eigval)) @ eigvec.T
        whitened = xc @ inverse.T
    elif isinstance(variant, CholeskiOrdered):
        cov = xc.T @ xc / t_obs
        order = variant.order if variant.order is not None else tuple(range(n))
        idx = _permutation_matrix_order(tuple(order), n)
        cov_p = cov[np.ix_(idx, idx)]
        try:
            chol = np.linalg.cholesky(cov_p)
        except np.linalg.LinAlgError:
            raise NotPositiveDefiniteError(
                "sample covariance is not positive definite",
                smallest_eigenvalue=float(np.linalg.eigvalsh(cov_p)[0])) from None
        inv_chol = solve_triangular(chol, np.eye(n), lower=True)
        factor = np.zeros((n, n))
        factor[np.ix_(idx, idx)] = chol
        inverse = np.zeros((n, n))
        inverse[np.ix_(idx, idx)] = inv_chol
        whitened = xc @ inverse.T
    else:
        raise ParameterError(f"unknown whitening variant {variant!r}")

    fitted = Whitener(variant=variant, mean=mean, factor=factor,
                      inverse_factor=inverse, nobs=t_obs)
    return ts.with_values(whitened, keep_dates=True), fitted


def kurtosis_order(data) -> tuple[int, ...]:
    """Column indices sorted by descending sample kurtosis (ties keep the
    earlier column first)."""
    x = as_timeseries(data).values
    kurts = np.array([sample_kurtosis(x[:, j]) for j in range(x.shape[1])])
    return tuple(int(j) for j in np.argsort(-kurts, kind="stable"))
