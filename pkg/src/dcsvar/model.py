"""Structural VAR data-generating processes with independent shocks.

A model is a lag polynomial, a mixing matrix mapping structural shocks to
innovations, and one shock distribution per component.  An optional damping
rule shrinks the loadings of the first shock onto the remaining equations at
rate ``T**-(1/alpha - 1/2)``, the scaling under which a shock with tail index
``alpha < 2`` keeps a bounded footprint on the other variables as the sample
grows; matrices are frozen at the terminal sample size before simulating.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, SimulationError
from .series import TimeSeriesMatrix
from .shocks import ShockSpec, format_shock, parse_shock, sample_shock

__all__ = [
    "HeavyTailDamping", "SvarModel", "SimulationResult", "effective_matrices",
    "simulate", "normalize_unmixing", "model_to_dict", "model_from_dict",
]


@dataclass(frozen=True)
class HeavyTailDamping:
    """Damping of first-shock loadings outside the first equation.

    ``tail_index`` is the stability index of the first shock; entries (i, 1)
    for i >= 2 of every lag matrix and of the mixing matrix are divided by
    ``T ** (1/tail_index - 1/2)``.
    """

    tail_index: float

    def __post_init__(self):
        if not 0.0 < self.tail_index < 2.0:
            raise ParameterError(
                f"damping needs a tail index in (0, 2), got {self.tail_index}")

    @property
    def exponent(self) -> float:
        return 1.0 / self.tail_index - 0.5

    def scale(self, t_obs: int) -> float:
        return float(t_obs) ** (-self.exponent)


def _companion_radius(lag_matrices: tuple[np.ndarray, ...]) -> float:
    n = lag_matrices[0].shape[0]
    p = len(lag_matrices)
    comp = np.zeros((n * p, n * p))
    comp[:n] = np.hstack(lag_matrices)
    if p > 1:
        comp[n:, :n * (p - 1)] = np.eye(n * (p - 1))
    return float(np.abs(np.linalg.eigvals(comp)).max())


@dataclass(frozen=True, eq=False)
class SvarModel:
    """Data-generating process ``y_t = sum_h A_h y_{t-h} + B u_t``."""

    lag_matrices: tuple[np.ndarray, ...]
    mixing: np.ndarray
    shocks: tuple[ShockSpec, ...]
    hl: HeavyTailDamping | None = None
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        lags = tuple(np.asarray(a, dtype=float) for a in self.lag_matrices)
        if not lags:
            raise ParameterError("need at least one lag matrix")
        mixing = np.asarray(self.mixing, dtype=float)
        n = mixing.shape[0]
        if mixing.shape != (n, n):
            raise ParameterError(f"mixing must be square, got {mixing.shape}")
        for h, a in enumerate(lags, start=1):
            if a.shape != (n, n):
                raise ParameterError(
                    f"lag matrix {h} has shape {a.shape}, expected {(n, n)}")
        object.__setattr__(self, "lag_matrices", lags)
        object.__setattr__(self, "mixing", mixing)
        if len(self.shocks) != n:
            raise ParameterError(
                f"{len(self.shocks)} shock specs for {n} components")
        if abs(np.linalg.det(mixing)) < 1e-12:
            raise ParameterError("mixing matrix is numerically singular")
        radius = _companion_radius(lags)
        if radius >= 1.0 - 1e-10:
            raise ParameterError(
                f"lag polynomial is unstable (companion spectral radius {radius:.6f})")
        names = self.names or tuple(f"y{j + 1}" for j in range(n))
        if len(names) != n:
            raise ParameterError(f"{len(names)} names for {n} variables")
        object.__setattr__(self, "names", tuple(names))

    @property
    def nvar(self) -> int:
        return self.mixing.shape[0]

    @property
    def order(self) -> int:
        return len(self.lag_matrices)


@dataclass(frozen=True)
class SimulationResult:
    y: TimeSeriesMatrix
    shocks: TimeSeriesMatrix
    lag_matrices: tuple[np.ndarray, ...]
    mixing: np.ndarray


def effective_matrices(model: SvarModel, t_obs: int
                       ) -> tuple[tuple[np.ndarray, ...], np.ndarray]:
    """Lag and mixing matrices after damping at sample size ``t_obs``.

    Without a damping rule these are copies of the model matrices.
    """
    if t_obs < 1:
        raise ParameterError(f"sample size must be positive, got {t_obs}")
    lags = tuple(a.copy() for a in model.lag_matrices)
    mixing = model.mixing.copy()
    if model.hl is not None:
        scale = model.hl.scale(t_obs)
        for a in lags:
            a[1:, 0] *= scale
        mixing[1:, 0] *= scale
    return lags, mixing


def simulate(model: SvarModel, t_obs: int, seed, burn_in: int = 200
             ) -> SimulationResult:
    """Simulate ``t_obs`` observations after a burn-in started at zeros.

    Shock components draw from per-component child seeds split off ``seed``,
    so adding a component never changes the draws of earlier ones.  Damped
    matrices are evaluated at ``t_obs`` and held fixed along the path.
    """
    if t_obs < 1:
        raise ParameterError(f"sample size must be positive, got {t_obs}")
    if burn_in < 0:
        raise ParameterError(f"burn-in must be nonnegative, got {burn_in}")
    root = seed if isinstance(seed, np.random.SeedSequence) \
        else np.random.SeedSequence(seed)
    children = root.spawn(model.nvar)
    total = t_obs + burn_in
    shocks = np.column_stack([
        sample_shock(spec, total, child)
        for spec, child in zip(model.shocks, children)
    ])
    lags, mixing = effective_matrices(model, t_obs)
    innovations = shocks @ mixing.T
    n = model.nvar
    p = model.order
    path = np.zeros((total + p, n))
    for t in range(total):
        row = innovations[t]
        acc = row.copy()
        for h, a in enumerate(lags, start=1):
            acc += a @ path[p + t - h]
        path[p + t] = acc
        if not np.all(np.isfinite(acc)):
            raise SimulationError(
                f"path left the representable range at step {t + 1} of {total}")
    y = path[p + burn_in:]
    return SimulationResult(
        y=TimeSeriesMatrix(y, model.names),
        shocks=TimeSeriesMatrix(shocks[burn_in:],
                                tuple(f"u{j + 1}" for j in range(n))),
        lag_matrices=lags,
        mixing=mixing,
    )


def normalize_unmixing(w_init: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale each row of an unmixing matrix to unit Euclidean norm.

    Returns ``(w, b)`` with ``b`` the inverse of the scaled matrix; used to
    put designs into the normalization in which shocks are identified.
    """
    w = np.asarray(w_init, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ParameterError(f"unmixing matrix must be square, got {w.shape}")
    norms = np.linalg.norm(w, axis=1)
    if np.any(norms < 1e-12):
        raise ParameterError("unmixing matrix has a zero row")
    scaled = w / norms[:, None]
    return scaled, np.linalg.inv(scaled)


def model_to_dict(model: SvarModel) -> dict:
    """Plain-data description of a model (for YAML/JSON round-trips)."""
    out = {
        "lag_matrices": [a.tolist() for a in model.lag_matrices],
        "mixing": model.mixing.tolist(),
        "shocks": [format_shock(s) for s in model.shocks],
        "names": list(model.names),
    }
    if model.hl is not None:
        out["hl_tail_index"] = model.hl.tail_index
    return out


def model_from_dict(data: dict) -> SvarModel:
    """Inverse of :func:`model_to_dict`."""
    try:
        lags = tuple(np.asarray(a, dtype=float) for a in data["lag_matrices"])
        mixing = np.asarray(data["mixing"], dtype=float)
        shocks = tuple(parse_shock(s) for s in data["shocks"])
    except KeyError as exc:
        raise ParameterError(f"model description is missing field {exc}") from None
    hl = None
    if data.get("hl_tail_index") is not None:
        hl = HeavyTailDamping(float(data["hl_tail_index"]))
    return SvarModel(lag_matrices=lags, mixing=mixing, shocks=shocks, hl=hl,
                     names=tuple(data.get("names") or ()))
