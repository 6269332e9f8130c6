"""Distance-covariance statistics for independence measurement.

The central quantity is a V-statistic measuring dependence between two blocks
of columns through pairwise distances raised to an exponent ``beta`` in
(0, 2).  It is zero in the population exactly under independence, needs no
moment conditions beyond fractional ones, and aggregates over adjacent
column splits into the rotation-search objective used for shock recovery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import _kernels
from .errors import DegenerateInputError, InternalConsistencyError, ParameterError

__all__ = ["DistCovConfig", "dist_cov", "dist_cov_fast", "aggregate_objective"]


@dataclass(frozen=True)
class DistCovConfig:
    """Exponent applied to pairwise Euclidean distances; must lie in (0, 2)."""

    beta: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.beta < 2.0:
            raise ParameterError(f"beta must lie in (0, 2), got {self.beta}")


def _as_block(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DegenerateInputError(f"{name} must be 1-D or 2-D, got ndim={x.ndim}")
    if x.shape[0] < 2:
        raise DegenerateInputError(
            f"{name} needs at least 2 observations, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DegenerateInputError(f"{name} contains non-finite values")
    return x


def _clamp(value: float, scale: float) -> float:
    if value >= 0.0:
        return value
    if value >= -1e-12 * max(1.0, scale):
        return 0.0
    raise InternalConsistencyError(
        f"distance covariance evaluated to {value}, beyond rounding tolerance")


def dist_cov(x, y, config: DistCovConfig | None = None) -> float:
    """Squared distance covariance between blocks ``x`` and ``y``.

    Both arguments are arrays with T rows; columns form the coordinates of
    each block.  The estimate is the plain V-statistic: every pair enters,
    including self-pairs with zero distance.  Always nonnegative.
    """
    cfg = config or DistCovConfig()
    x = _as_block(x, "x")
    y = _as_block(y, "y")
    if x.shape[0] != y.shape[0]:
        raise DegenerateInputError(
            f"blocks disagree on T: {x.shape[0]} vs {y.shape[0]}")
    a = cdist(x, x)
    b = cdist(y, y)
    if cfg.beta != 1.0:
        a **= cfg.beta
        b **= cfg.beta
    t1 = float((a * b).mean())
    t2 = float(a.mean() * b.mean())
    t3 = float((a.mean(axis=1) * b.mean(axis=1)).mean())
    return _clamp(t1 + t2 - 2.0 * t3, t1 + t2)


def dist_cov_fast(x, y, config: DistCovConfig | None = None) -> float:
    """Same statistic as :func:`dist_cov` in O(T log T).

    The fast path applies to a pair of scalar series with ``beta == 1``:
    single-column sums come from sorted prefix sums, the cross term from
    binary-indexed-tree sweeps in x-order.  Other inputs fall back to
    :func:`dist_cov`.
    """
    cfg = config or DistCovConfig()
    xb = _as_block(x, "x")
    yb = _as_block(y, "y")
    if cfg.beta != 1.0 or xb.shape[1] != 1 or yb.shape[1] != 1:
        return dist_cov(x, y, cfg)
    if xb.shape[0] != yb.shape[0]:
        raise DegenerateInputError(
            f"blocks disagree on T: {xb.shape[0]} vs {yb.shape[0]}")
    xv = xb[:, 0]
    yv = yb[:, 0]
    t_obs = xv.size

    order = np.argsort(xv, kind="stable")
    xs = xv[order]
    ys = yv[order]
    y_sorted = np.sort(yv, kind="stable")
    yrank = np.searchsorted(y_sorted, ys, side="left").astype(np.int64)

    sum_x, rows_x_sorted = _kernels.sorted_abs_row_sums(xs)
    sum_y, rows_y_sorted = _kernels.sorted_abs_row_sums(y_sorted)
    cross = _kernels.crossed_abs_product_sum(xs, ys, yrank)

    rows_x = np.empty(t_obs)
    rows_x[order] = rows_x_sorted
    rows_y = np.empty(t_obs)
    rows_y[np.argsort(yv, kind="stable")] = rows_y_sorted

    tt = float(t_obs)
    t1 = 2.0 * cross / (tt * tt)
    t2 = (sum_x / (tt * tt)) * (sum_y / (tt * tt))
    t3 = float(rows_x @ rows_y) / (tt * tt * tt)
    return _clamp(t1 + t2 - 2.0 * t3, t1 + t2)


def aggregate_objective(s, config: DistCovConfig | None = None) -> float:
    """Sum of :func:`dist_cov` between column ``k`` and all columns right of
    it, for ``k = 1 .. n-1``; zero in the population iff the columns are
    mutually independent (non-Gaussian case)."""
    cfg = config or DistCovConfig()
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[1] < 2:
        raise DegenerateInputError(
            f"need a T x n array with n >= 2, got shape {s.shape}")
    if s.shape[0] < 2:
        raise DegenerateInputError(
            f"need at least 2 observations, got {s.shape[0]}")
    if not np.all(np.isfinite(s)):
        raise DegenerateInputError("objective input contains non-finite values")
    s = np.ascontiguousarray(s)
    if s.shape[1] == 3 and cfg.beta == 1.0:
        return float(_kernels.mt_objective3(s))
    return float(_kernels.mt_objective(s, cfg.beta))
