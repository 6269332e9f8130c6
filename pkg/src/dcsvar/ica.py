"""Shock recovery by rotation search over whitened residuals.

After prewhitening, every candidate unmixing matrix is an orthogonal rotation
of the whitening factor; the rotation minimizing the aggregate
distance-covariance objective makes the recovered components as mutually
independent as the sample allows.  The minimizer is normalized to a canonical
scale/sign/order, then rows are re-sorted so the most kurtotic recovered
shock comes first, which is where a rare-disaster shock lands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .distcov import DistCovConfig, aggregate_objective
from .errors import DegenerateInputError, ParameterError
from .series import TimeSeriesMatrix, as_timeseries
from .shocks import sample_kurtosis
from .whiten import Whitener, WhitenVariant, whiten

__all__ = [
    "OptimizerSettings", "OptimizerReport", "IcaResult", "givens_rotation",
    "omega_normalize", "estimate_unmixing", "amari_distance",
    "label_disaster_shock",
]


@dataclass(frozen=True)
class OptimizerSettings:
    """Multi-start rotation-search controls.

    ``restarts`` counts starting angle vectors: the identity rotation plus
    ``restarts - 1`` random draws from ``seed``.

    With ``search="bracket"`` every start is screened with ``coarse_sweeps``
    cyclic passes of bounded per-angle line searches whose bracket halfwidth
    is ``step0``; with ``polish`` the best start is then refined until an
    angle sweep improves the objective by less than ``tol`` at the finest
    bracket width.  ``polish=False`` keeps the coarse result as the estimate,
    giving a deliberately truncated search that stays near the basin of its
    starting rotation; narrow ``step0`` strengthens that locality.

    With ``search="pattern"`` each start descends by compass steps: one angle
    at a time moves by at most ``step0``, a move is accepted only when it
    lowers the objective, and the step shrinks when neither direction helps.
    The path is connected and strictly downhill, so the iterate converges
    inside the basin the start belongs to instead of hopping between basins;
    ``coarse_sweeps`` and ``polish`` are ignored.
    """

    restarts: int = 8
    seed: int = 0
    max_sweeps: int = 500
    tol: float = 1e-9
    coarse_sweeps: int = 6
    step0: float = math.pi / 2
    polish: bool = True
    search: str = "bracket"

    def __post_init__(self):
        if self.restarts < 1:
            raise ParameterError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_sweeps < 1 or self.coarse_sweeps < 1:
            raise ParameterError("sweep limits must be positive")
        if self.tol <= 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if not 0 < self.step0 <= math.pi:
            raise ParameterError(
                f"step0 must lie in (0, pi], got {self.step0}")
        if self.search not in ("bracket", "pattern"):
            raise ParameterError(
                f"search must be 'bracket' or 'pattern', got {self.search!r}")


@dataclass(frozen=True)
class OptimizerReport:
    converged: bool
    evaluations: int
    sweeps: int
    restarts: int
    best_start: int


@dataclass(frozen=True)
class IcaResult:
    """Fitted unmixing in two scale conventions.

    ``unmixing_unit_rows`` has unit-Euclidean-norm rows (the normalization in
    which the mixing matrix is identified); ``unmixing`` rescales each row so
    the corresponding recovered shock has unit sample variance.  Rows of both
    are sorted by descending sample kurtosis of the recovered shocks, and
    ``shocks`` holds the unit-variance versions.
    """

    whitener: Whitener
    rotation: np.ndarray
    unmixing_unit_rows: np.ndarray
    mixing_unit_rows: np.ndarray
    unmixing: np.ndarray
    mixing: np.ndarray
    shocks: TimeSeriesMatrix
    shock_scales: np.ndarray
    kurtosis: tuple[float, ...]
    objective_value: float
    report: OptimizerReport


_GOLDEN_STEP_SHRINK = 0.25
_FINAL_STEP = 1e-4


def givens_rotation(angles, n: int) -> np.ndarray:
    """Product of plane rotations over index pairs (0,1), (0,2), ...,
    (n-2, n-1), one angle per pair in that fixed order."""
    angles = np.asarray(angles, dtype=float)
    expected = n * (n - 1) // 2
    if angles.shape != (expected,):
        raise ParameterError(
            f"need {expected} angles for dimension {n}, got {angles.shape}")
    out = np.eye(n)
    idx = 0
    for i in range(n):
        for j in range(i + 1, n):
            c = math.cos(angles[idx])
            s = math.sin(angles[idx])
            g = np.eye(n)
            g[i, i] = c
            g[j, j] = c
            g[i, j] = -s
            g[j, i] = s
            out = out @ g
            idx += 1
    return out


def omega_normalize(w: np.ndarray) -> np.ndarray:
    """Canonical representative of a nonsingular unmixing matrix.

    Rows are scaled to unit Euclidean norm, each row is flipped so its
    largest-modulus entry is positive, and rows are sorted lexicographically
    (ascending, first column most significant).
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ParameterError(f"unmixing matrix must be square, got {w.shape}")
    norms = np.linalg.norm(w, axis=1)
    if np.any(norms < 1e-12):
        raise DegenerateInputError("unmixing matrix has a zero row")
    out = w / norms[:, None]
    for i in range(out.shape[0]):
        if out[i, np.argmax(np.abs(out[i]))] < 0:
            out[i] = -out[i]
    order = sorted(range(out.shape[0]), key=lambda i: tuple(out[i]))
    return out[order]


class _Objective:
    """Callable objective with an evaluation counter."""

    def __init__(self, z: np.ndarray, config: DistCovConfig):
        self.config = config
        self.n = z.shape[1]
        self.evaluations = 0
        self._fast = self.n == 3 and config.beta == 1.0
        if self._fast:
            self._cols = tuple(np.ascontiguousarray(z[:, j]) for j in range(3))
        else:
            self._z = z

    def __call__(self, angles: np.ndarray) -> float:
        self.evaluations += 1
        o = givens_rotation(angles, self.n)
        if self._fast:
            z0, z1, z2 = self._cols
            return float(_kernels.mt_objective3_rotated(z0, z1, z2, o))
        return aggregate_objective(self._z @ o.T, self.config)


def _coordinate_descent(objective: _Objective, angles0: np.ndarray,
                        max_sweeps: int, tol: float, xatol: float,
                        final_step: float, step0: float = math.pi / 2
                        ) -> tuple[np.ndarray, float, int, bool]:
    """Cyclic per-angle bounded line searches with a shrinking bracket."""
    angles = angles0.copy()
    value = objective(angles)
    step = step0
    converged = False
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        before = value
        for k in range(angles.size):
            def g(theta, k=k):
                trial = angles.copy()
                trial[k] = theta
                return objective(trial)

            res = minimize_scalar(
                g, bounds=(angles[k] - step, angles[k] + step),
                method="bounded",
                options={"xatol": max(xatol, step * 1e-3)})
            if res.fun < value:
                value = float(res.fun)
                angles[k] = float(res.x)
        if before - value < tol:
            if step <= final_step:
                converged = True
                break
            step *= _GOLDEN_STEP_SHRINK
    return angles, value, sweeps, converged


def _pattern_descent(objective: _Objective, angles0: np.ndarray,
                     step0: float, max_sweeps: int, tol: float
                     ) -> tuple[np.ndarray, float, int, bool]:
    """Per-angle compass search: accept only downhill moves of the current
    step, double the step on success (capped at ``step0``), halve on failure.
    Moves are contiguous, so the descent cannot leave its starting basin."""
    angles = angles0.copy()
    value = objective(angles)
    steps = np.full(angles.size, step0)
    converged = False
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        improved = False
        for k in range(angles.size):
            while steps[k] >= _FINAL_STEP:
                best_v, best_t = value, None
                for cand in (angles[k] - steps[k], angles[k] + steps[k]):
                    trial = angles.copy()
                    trial[k] = cand
                    v = objective(trial)
                    if v < best_v:
                        best_v, best_t = v, cand
                if best_t is None:
                    steps[k] *= 0.5
                    continue
                if value - best_v >= tol:
                    improved = True
                angles[k] = best_t
                value = best_v
                steps[k] = min(steps[k] * 2.0, step0)
                break
        if not improved and np.all(steps < _FINAL_STEP):
            converged = True
            break
    return angles, value, sweeps, converged


def estimate_unmixing(data, variant: WhitenVariant | None = None,
                      config: DistCovConfig | None = None,
                      settings: OptimizerSettings | None = None) -> IcaResult:
    """Recover an unmixing matrix from residuals by whitening plus rotation
    search minimizing the aggregate distance-covariance objective."""
    cfg = config or DistCovConfig()
    opts = settings or OptimizerSettings()
    ts = as_timeseries(data)
    whitened_ts, whitener = whiten(ts, variant)
    z = whitened_ts.values
    n = z.shape[1]
    if n < 2:
        raise DegenerateInputError("need at least two components to unmix")
    n_angles = n * (n - 1) // 2

    objective = _Objective(z, cfg)
    rng = np.random.default_rng(opts.seed)
    starts = [np.zeros(n_angles)]
    for _ in range(opts.restarts - 1):
        starts.append(rng.uniform(-math.pi / 2, math.pi / 2, n_angles))

    total_sweeps = 0
    if opts.search == "pattern":
        runs = []
        for start in starts:
            angles, value, sweeps, conv = _pattern_descent(
                objective, start, opts.step0, opts.max_sweeps, opts.tol)
            runs.append((value, angles, conv))
            total_sweeps += sweeps
        best_start = int(np.argmin([v for v, _, _ in runs]))
        value, angles, converged = runs[best_start]
    else:
        screened: list[tuple[float, np.ndarray]] = []
        for start in starts:
            # fixed bracket, loose tolerance: enough to rank basins
            angles, value, sweeps, _ = _coordinate_descent(
                objective, start, opts.coarse_sweeps, max(opts.tol, 1e-6),
                xatol=4e-2, final_step=math.inf, step0=opts.step0)
            screened.append((value, angles))
            total_sweeps += sweeps
        best_start = int(np.argmin([v for v, _ in screened]))
        if opts.polish:
            angles, value, sweeps, converged = _coordinate_descent(
                objective, screened[best_start][1], opts.max_sweeps, opts.tol,
                xatol=1e-5, final_step=_FINAL_STEP,
                step0=min(0.2, opts.step0))
            total_sweeps += sweeps
        else:
            value, angles = screened[best_start]
            converged = False

    rotation = givens_rotation(angles, n)
    w_raw = rotation @ whitener.inverse_factor
    w_unit = omega_normalize(w_raw)

    centered = ts.values - whitener.mean
    recovered = centered @ w_unit.T
    kurts = np.array([sample_kurtosis(recovered[:, j]) for j in range(n)])
    order = np.argsort(-kurts, kind="stable")
    w_unit = w_unit[order]
    recovered = recovered[:, order]
    kurts = kurts[order]

    scales = recovered.std(axis=0)
    if np.any(scales <= 0):
        raise DegenerateInputError("a recovered shock is constant")
    w_scaled = w_unit / scales[:, None]
    shocks = recovered / scales

    return IcaResult(
        whitener=whitener,
        rotation=rotation,
        unmixing_unit_rows=w_unit,
        mixing_unit_rows=np.linalg.inv(w_unit),
        unmixing=w_scaled,
        mixing=np.linalg.inv(w_scaled),
        shocks=TimeSeriesMatrix(
            shocks, tuple(f"shock{j + 1}" for j in range(n))),
        shock_scales=scales,
        kurtosis=tuple(float(k) for k in kurts),
        objective_value=float(value),
        report=OptimizerReport(
            converged=converged,
            evaluations=objective.evaluations,
            sweeps=total_sweeps,
            restarts=opts.restarts,
            best_start=best_start,
        ),
    )


def amari_distance(reference: np.ndarray, candidate: np.ndarray) -> float:
    """Scale- and permutation-blind discrepancy between two matrices.

    The score is built from ``|reference @ inv(candidate)|`` and vanishes
    exactly when that product is a scaled permutation, i.e. when
    ``candidate`` equals ``reference`` up to row order and row scale.  To
    compare an estimated unmixing matrix with the truth, pass the true
    unmixing as ``reference`` and the estimate as ``candidate`` (or vice
    versa); the product then measures how far the composite
    unmix-then-remix map is from a one-to-one relabeling of shocks.
    """
    a0 = np.asarray(reference, dtype=float)
    a1 = np.asarray(candidate, dtype=float)
    if a0.shape != a1.shape or a0.ndim != 2 or a0.shape[0] != a0.shape[1]:
        raise ParameterError(
            f"need two square matrices of equal size, got {a0.shape} and {a1.shape}")
    try:
        ratio = np.abs(a0 @ np.linalg.inv(a1))
    except np.linalg.LinAlgError:
        raise DegenerateInputError("candidate matrix is singular") from None
    p = a0.shape[0]
    rows = (ratio.sum(axis=1) / ratio.max(axis=1) - 1.0).sum()
    cols = (ratio.sum(axis=0) / ratio.max(axis=0) - 1.0).sum()
    return float((rows + cols) / (2.0 * p))


def label_disaster_shock(result: IcaResult, sign: str | None = None,
                         on_variable: int = 0) -> tuple[int, IcaResult]:
    """Locate the disaster-type shock and optionally fix its sign.

    The candidate is the highest-kurtosis recovered shock, which is row 0
    after ordering.  ``sign`` of ``"positive"`` or ``"negative"`` flips the
    shock so its impact on ``on_variable`` has that sign; ``None`` leaves
    signs as normalized.
    """
    if sign not in (None, "positive", "negative"):
        raise ParameterError(f"sign must be positive, negative or None, got {sign!r}")
    index = 0
    if sign is None:
        return index, result
    n = result.mixing.shape[0]
    if not 0 <= on_variable < n:
        raise ParameterError(f"on_variable must lie in [0, {n - 1}], got {on_variable}")
    impact = result.mixing_unit_rows[on_variable, index]
    want_negative = sign == "negative"
    if (impact < 0) == want_negative:
        return index, result
    flip = np.ones(n)
    flip[index] = -1.0
    shocks = result.shocks.values * flip
    adjusted = replace(
        result,
        unmixing_unit_rows=result.unmixing_unit_rows * flip[:, None],
        mixing_unit_rows=result.mixing_unit_rows * flip[None, :],
        unmixing=result.unmixing * flip[:, None],
        mixing=result.mixing * flip[None, :],
        shocks=result.shocks.with_values(shocks),
    )
    return index, adjusted
