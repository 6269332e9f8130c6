"""Reduced-form VAR estimation and moving-average inversion.

Estimation is equation-by-equation least squares through a rank-revealing
SVD solve; no Gaussian likelihood is ever used, so the routines stay valid
when innovations have infinite variance in the limit experiments (the fitted
coefficients are still well defined draw by draw).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DegenerateInputError, EstimationError, ParameterError
from .series import TimeSeriesMatrix, as_timeseries

__all__ = [
    "VarFit", "fit_var", "ma_coefficients", "low_frequency_detrend",
    "purge_exogenous",
]


def _ols(design: np.ndarray, target: np.ndarray, what: str
         ) -> tuple[np.ndarray, np.ndarray, float]:
    """SVD least squares; returns (coefficients, residuals, condition)."""
    if design.shape[0] <= design.shape[1]:
        raise DegenerateInputError(
            f"{what}: {design.shape[0]} usable rows for {design.shape[1]} "
            "regressors")
    coeff, _, rank, sv = linalg.lstsq(design, target, lapack_driver="gelsd")
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if rank < design.shape[1]:
        raise EstimationError(
            f"{what}: design matrix is rank deficient "
            f"(rank {rank} of {design.shape[1]}, condition {cond:.3e})")
    residuals = target - design @ coeff
    return coeff, residuals, cond


@dataclass(frozen=True)
class VarFit:
    """Least-squares VAR estimate.

    ``lag_matrices[h-1][i, j]`` multiplies variable ``j`` at lag ``h`` in the
    equation for variable ``i``.  ``residual_cov`` uses divisor T (matching
    the whitening convention), computed from demeaned residuals.
    """

    lag_matrices: tuple[np.ndarray, ...]
    intercept: np.ndarray | None
    exog_coefficients: np.ndarray | None
    residuals: TimeSeriesMatrix
    residual_cov: np.ndarray
    condition_number: float
    names: tuple[str, ...]

    @property
    def order(self) -> int:
        return len(self.lag_matrices)

    @property
    def lag_matrix_sum(self) -> np.ndarray:
        return np.sum(self.lag_matrices, axis=0)


def fit_var(data, order: int, intercept: bool = True, exog=None) -> VarFit:
    """Fit a VAR(``order``) by least squares.

    ``exog``, when given, must have one row per row of ``data``; the rows
    aligned with the regression sample enter contemporaneously.
    """
    ts = as_timeseries(data)
    y = ts.values
    t_obs, n = y.shape
    if order < 1:
        raise ParameterError(f"lag order must be at least 1, got {order}")
    if t_obs <= order:
        raise DegenerateInputError(
            f"{t_obs} observations cannot support lag order {order}")
    if not np.all(np.isfinite(y)):
        raise DegenerateInputError("estimation input contains non-finite values")

    blocks = []
    if intercept:
        blocks.append(np.ones((t_obs - order, 1)))
    for h in range(1, order + 1):
        blocks.append(y[order - h:t_obs - h])
    n_exog = 0
    if exog is not None:
        x = as_timeseries(exog).values
        if x.shape[0] != t_obs:
            raise DegenerateInputError(
                f"exog has {x.shape[0]} rows, data has {t_obs}")
        n_exog = x.shape[1]
        blocks.append(x[order:])
    design = np.hstack(blocks)
    target = y[order:]

    coeff, residuals, cond = _ols(design, target, "fit_var")

    pos = 1 if intercept else 0
    inter = coeff[0] if intercept else None
    lags = tuple(coeff[pos + (h - 1) * n: pos + h * n].T.copy()
                 for h in range(1, order + 1))
    exog_coeff = coeff[pos + order * n:].T.copy() if n_exog else None

    centered = residuals - residuals.mean(axis=0)
    res_cov = centered.T @ centered / residuals.shape[0]
    return VarFit(
        lag_matrices=lags,
        intercept=inter,
        exog_coefficients=exog_coeff,
        residuals=TimeSeriesMatrix(residuals, ts.names),
        residual_cov=res_cov,
        condition_number=cond,
        names=ts.names,
    )


def ma_coefficients(lag_matrices, mixing, horizons: int) -> np.ndarray:
    """Structural moving-average matrices out to ``horizons``.

    Returns an array of shape ``(horizons + 1, n, n)`` whose slice ``h`` maps
    date-``t`` structural shocks to date-``t+h`` responses; slice 0 equals
    ``mixing``.
    """
    if horizons < 0:
        raise ParameterError(f"horizons must be nonnegative, got {horizons}")
    lags = [np.asarray(a, dtype=float) for a in lag_matrices]
    b = np.asarray(mixing, dtype=float)
    n = b.shape[0]
    order = len(lags)
    reduced = np.empty((horizons + 1, n, n))
    reduced[0] = np.eye(n)
    for h in range(1, horizons + 1):
        acc = np.zeros((n, n))
        for j in range(1, min(h, order) + 1):
            acc += lags[j - 1] @ reduced[h - j]
        reduced[h] = acc
    return reduced @ b


def low_frequency_detrend(data, n_cosines: int) -> TimeSeriesMatrix:
    """Remove the projection onto a constant and the ``n_cosines`` slowest
    cosine basis functions ``cos(j*pi*(t - 1/2)/T)``, column by column."""
    ts = as_timeseries(data)
    y = ts.values
    t_obs = y.shape[0]
    if n_cosines < 0:
        raise ParameterError(f"n_cosines must be nonnegative, got {n_cosines}")
    if n_cosines + 1 >= t_obs:
        raise DegenerateInputError(
            f"{n_cosines} cosine terms cannot be fit to {t_obs} rows")
    grid = (np.arange(1, t_obs + 1) - 0.5) / t_obs
    design = np.ones((t_obs, n_cosines + 1))
    for j in range(1, n_cosines + 1):
        design[:, j] = np.cos(j * np.pi * grid)
    coeff, residuals, _ = _ols(design, y, "low_frequency_detrend")
    return ts.with_values(residuals, keep_dates=True)


def purge_exogenous(data, exog, lags: int) -> TimeSeriesMatrix:
    """Residuals of ``data`` after regressing out current and ``lags`` past
    values of ``exog`` (plus a constant).  The first ``lags`` rows are lost."""
    ts = as_timeseries(data)
    y = ts.values
    x = as_timeseries(exog).values
    t_obs = y.shape[0]
    if x.shape[0] != t_obs:
        raise DegenerateInputError(
            f"exog has {x.shape[0]} rows, data has {t_obs}")
    if lags < 0:
        raise ParameterError(f"lags must be nonnegative, got {lags}")
    blocks = [np.ones((t_obs - lags, 1))]
    for ell in range(lags + 1):
        blocks.append(x[lags - ell:t_obs - ell])
    design = np.hstack(blocks)
    _, residuals, _ = _ols(design, y[lags:], "purge_exogenous")
    return ts.with_values(residuals)
