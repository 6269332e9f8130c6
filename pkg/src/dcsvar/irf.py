"""Impulse responses to an identified structural shock.

Three estimators of the same object: responses implied by inverting the
fitted VAR, responses from a recursive (triangular) factorization of the
residual covariance, and direct local-projection regressions of future
outcomes on the recovered shock.  At horizon zero the local projection with
the full shock set reproduces the impact column of the mixing matrix
exactly, which pins down the bookkeeping conventions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace as _replace

import numpy as np

from .errors import DegenerateInputError, ParameterError
from .ica import IcaResult
from .series import as_timeseries
from .var import _ols, ma_coefficients

__all__ = [
    "IrfTable", "irf_var_implied", "irf_choleski", "irf_local_projection",
    "unit_effect_rescale",
]


@dataclass(frozen=True)
class IrfTable:
    """Responses of every variable to one shock, horizons 0..H.

    ``responses[h, i]`` is the horizon-``h`` response of variable ``i``;
    horizon 0 is the impact.  ``shock_scale`` records any rescaling applied
    (1.0 for raw estimates).
    """

    estimator: str
    shock: int
    responses: np.ndarray
    names: tuple[str, ...]
    se: np.ndarray | None = None
    shock_scale: float = 1.0

    @property
    def horizons(self) -> np.ndarray:
        return np.arange(self.responses.shape[0])


def _check_shock(shock: int, n: int) -> None:
    if not 0 <= shock < n:
        raise ParameterError(f"shock index must lie in [0, {n - 1}], got {shock}")


def _names_for(names, n: int) -> tuple[str, ...]:
    if names is None:
        return tuple(f"y{j + 1}" for j in range(n))
    names = tuple(names)
    if len(names) != n:
        raise ParameterError(f"{len(names)} names for {n} variables")
    return names


def irf_var_implied(lag_matrices, mixing, shock: int, horizons: int,
                    names=None) -> IrfTable:
    """Responses from the moving-average inversion of a fitted VAR combined
    with an impact matrix (column ``shock`` of ``mixing`` at horizon 0)."""
    psi = ma_coefficients(lag_matrices, mixing, horizons)
    n = psi.shape[1]
    _check_shock(shock, n)
    return IrfTable(
        estimator="var", shock=shock,
        responses=psi[:, :, shock].copy(),
        names=_names_for(names, n),
    )


def irf_choleski(lag_matrices, residual_cov, shock: int, horizons: int,
                 ordering=None, names=None) -> IrfTable:
    """Responses under a recursive ordering of the residual covariance.

    ``ordering`` lists variable indices from first (contemporaneously
    unaffected by later ones) to last; ``shock`` indexes a position in that
    ordering.  Responses are reported for all variables in their original
    order.
    """
    cov = np.asarray(residual_cov, dtype=float)
    n = cov.shape[0]
    if cov.shape != (n, n):
        raise ParameterError(f"residual covariance must be square, got {cov.shape}")
    order = tuple(ordering) if ordering is not None else tuple(range(n))
    if sorted(order) != list(range(n)):
        raise ParameterError(
            f"ordering must be a permutation of 0..{n - 1}, got {order}")
    _check_shock(shock, n)
    idx = np.asarray(order, dtype=int)
    try:
        chol = np.linalg.cholesky(cov[np.ix_(idx, idx)])
    except np.linalg.LinAlgError:
        raise DegenerateInputError(
            "residual covariance is not positive definite") from None
    impact = np.zeros((n, n))
    impact[idx, :] = chol
    psi = ma_coefficients(lag_matrices, impact, horizons)
    return IrfTable(
        estimator="chol", shock=shock,
        responses=psi[:, :, shock].copy(),
        names=_names_for(names, n),
    )


def irf_local_projection(data, shocks, shock: int, horizons: int, lags: int,
                         include_other_shocks: bool = True) -> IrfTable:
    """Direct regressions of ``y_{t+h}`` on the date-``t`` recovered shock.

    ``shocks`` must hold one row per regression date, i.e. rows aligned with
    ``data`` rows ``lags`` onward (the residual sample of a VAR with the same
    lag count).  Controls are an intercept, the remaining contemporaneous
    shocks (unless disabled) and ``lags`` own lags of all variables.  With
    the full shock set, horizon 0 reproduces the impact column of the mixing
    matrix those shocks came from.
    """
    ts = as_timeseries(data)
    y = ts.values
    u = as_timeseries(shocks).values
    t_obs, n = y.shape
    if lags < 0:
        raise ParameterError(f"lags must be nonnegative, got {lags}")
    if horizons < 0:
        raise ParameterError(f"horizons must be nonnegative, got {horizons}")
    if u.shape[0] != t_obs - lags:
        raise DegenerateInputError(
            f"shocks have {u.shape[0]} rows; expected {t_obs - lags} "
            f"(data rows minus lags)")
    _check_shock(shock, u.shape[1])

    others = [j for j in range(u.shape[1]) if j != shock] \
        if include_other_shocks else []
    responses = np.empty((horizons + 1, n))
    ses = np.empty((horizons + 1, n))
    for h in range(horizons + 1):
        rows = t_obs - lags - h
        if rows < 2:
            raise DegenerateInputError(
                f"horizon {h} leaves only {rows} usable rows")
        blocks = [np.ones((rows, 1)), u[:rows, [shock]]]
        if others:
            blocks.append(u[:rows, others])
        for ell in range(1, lags + 1):
            blocks.append(y[lags - ell:lags - ell + rows])
        design = np.hstack(blocks)
        target = y[lags + h:lags + h + rows]
        coeff, residuals, _ = _ols(design, target, f"local projection h={h}")
        responses[h] = coeff[1]
        dof = max(rows - design.shape[1], 1)
        sigma2 = (residuals**2).sum(axis=0) / dof
        xtx_inv = np.linalg.inv(design.T @ design)
        ses[h] = np.sqrt(sigma2 * xtx_inv[1, 1])
    return IrfTable(
        estimator="lp", shock=shock, responses=responses,
        names=ts.names, se=ses,
    )


def unit_effect_rescale(obj, target_variable: int):
    """Rescale so the impact of the shock on ``target_variable`` equals one.

    For an :class:`IrfTable` the responses (and standard errors) are divided
    by the horizon-0 response of the target; the divisor is recorded in
    ``shock_scale``.  For an :class:`IcaResult` the unit-variance convention
    is rescaled (shock column of the mixing matrix, matching unmixing row and
    shock series); the unit-row-norm matrices stay untouched.
    """
    if isinstance(obj, IrfTable):
        n = obj.responses.shape[1]
        if not 0 <= target_variable < n:
            raise ParameterError(
                f"target must lie in [0, {n - 1}], got {target_variable}")
        scale = float(obj.responses[0, target_variable])
        if scale == 0.0:
            raise DegenerateInputError(
                "impact on the target variable is zero; cannot rescale")
        return _replace(
            obj,
            responses=obj.responses / scale,
            se=None if obj.se is None else obj.se / abs(scale),
            shock_scale=obj.shock_scale * scale,
        )
    if isinstance(obj, IcaResult):
        shock = 0  # highest-kurtosis shock, first after ordering
        n = obj.mixing.shape[0]
        if not 0 <= target_variable < n:
            raise ParameterError(
                f"target must lie in [0, {n - 1}], got {target_variable}")
        scale = float(obj.mixing[target_variable, shock])
        if scale == 0.0:
            raise DegenerateInputError(
                "impact on the target variable is zero; cannot rescale")
        mixing = obj.mixing.copy()
        unmixing = obj.unmixing.copy()
        shocks = obj.shocks.values.copy()
        mixing[:, shock] /= scale
        unmixing[shock] *= scale
        shocks[:, shock] *= scale
        return _replace(
            obj,
            mixing=mixing,
            unmixing=unmixing,
            shocks=obj.shocks.with_values(shocks),
        )
    raise ParameterError(
        f"can rescale IrfTable or IcaResult, got {type(obj).__name__}")
