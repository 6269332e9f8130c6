"""Shock distributions and tail diagnostics.

Every structural-shock family used by the simulation designs lives here:
symmetric and skewed alpha-stable draws (Chambers-Mallows-Stuck), standard
Pareto, Student t (optionally scaled to unit variance), Gaussian, and Pearson
distributions pinned down by their first four moments.  The module also
provides the truncated arrival-time series whose powers approximate positive
stable laws, the normalization-free sample kurtosis statistic, and the Hill
tail-index estimator.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from ._pearson import pearson_sampler
from .errors import DegenerateInputError, ParameterError

__all__ = [
    "StableShock", "ParetoShock", "StudentTShock", "GaussianShock",
    "PearsonShock", "parse_shock", "format_shock", "sample_shock",
    "simulate_stable_limit", "sample_kurtosis", "hill_tail_index",
]

Seed = "int | np.random.SeedSequence | np.random.Generator"


@dataclass(frozen=True)
class StableShock:
    """Alpha-stable law, unit scale.  ``alpha = 2`` is Gaussian with variance 2."""

    alpha: float
    skew: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ParameterError(f"stable index must lie in (0, 2], got {self.alpha}")
        if not -1.0 <= self.skew <= 1.0:
            raise ParameterError(f"stable skew must lie in [-1, 1], got {self.skew}")


@dataclass(frozen=True)
class ParetoShock:
    """Standard Pareto on [1, inf): P(X > x) = x**-tail_index."""

    tail_index: float

    def __post_init__(self):
        if self.tail_index <= 0.0:
            raise ParameterError(f"tail index must be positive, got {self.tail_index}")


@dataclass(frozen=True)
class StudentTShock:
    """Student t; scaled by sqrt((dof-2)/dof) to unit variance by default."""

    dof: float
    standardize: bool = True

    def __post_init__(self):
        if self.dof <= 0.0:
            raise ParameterError(f"degrees of freedom must be positive, got {self.dof}")
        if self.standardize and self.dof <= 2.0:
            raise ParameterError(
                f"unit-variance scaling needs dof > 2, got {self.dof}")


@dataclass(frozen=True)
class GaussianShock:
    """Standard normal."""


@dataclass(frozen=True)
class PearsonShock:
    """Pearson-system member with the given first four moments."""

    mean: float
    variance: float
    skewness: float
    kurtosis: float

    def __post_init__(self):
        pearson_sampler(self.mean, self.variance, self.skewness, self.kurtosis)


ShockSpec = StableShock | ParetoShock | StudentTShock | GaussianShock | PearsonShock

_SPEC_RE = re.compile(r"^\s*([a-zA-Z][a-zA-Z-]*)\s*(?:\(([^)]*)\))?\s*$")


def parse_shock(text: str) -> ShockSpec:
    """Parse a shock description such as ``"stable(1.1)"`` or ``"t(5)"``.

    Recognized forms: ``gaussian``, ``stable(alpha[,skew])``, ``pareto(a)``,
    ``t(dof)``, ``t(dof,raw)`` for the unscaled variant, and
    ``pearson(mean,var,skew,kurt)``.
    """
    m = _SPEC_RE.match(text)
    if not m:
        raise ParameterError(f"cannot parse shock spec {text!r}")
    name = m.group(1).lower()
    args = [a.strip() for a in (m.group(2) or "").split(",") if a.strip()]
    try:
        if name == "gaussian":
            return GaussianShock()
        if name == "stable":
            return StableShock(float(args[0]), float(args[1]) if len(args) > 1 else 0.0)
        if name == "pareto":
            return ParetoShock(float(args[0]))
        if name == "t":
            if len(args) > 1 and args[1] == "raw":
                return StudentTShock(float(args[0]), standardize=False)
            return StudentTShock(float(args[0]))
        if name == "pearson":
            return PearsonShock(*(float(a) for a in args))
    except (IndexError, TypeError, ValueError) as exc:
        raise ParameterError(f"bad arguments in shock spec {text!r}: {exc}") from None
    raise ParameterError(f"unknown shock family {name!r} in {text!r}")


def format_shock(spec: ShockSpec) -> str:
    """Inverse of :func:`parse_shock`."""
    if isinstance(spec, GaussianShock):
        return "gaussian"
    if isinstance(spec, StableShock):
        return f"stable({spec.alpha:g},{spec.skew:g})"
    if isinstance(spec, ParetoShock):
        return f"pareto({spec.tail_index:g})"
    if isinstance(spec, StudentTShock):
        return f"t({spec.dof:g})" if spec.standardize else f"t({spec.dof:g},raw)"
    if isinstance(spec, PearsonShock):
        return (f"pearson({spec.mean:g},{spec.variance:g},"
                f"{spec.skewness:g},{spec.kurtosis:g})")
    raise ParameterError(f"not a shock spec: {spec!r}")


def _stable_draws(alpha: float, skew: float, rng: np.random.Generator,
                  size: int) -> np.ndarray:
    u = rng.uniform(-np.pi / 2, np.pi / 2, size)
    e = rng.standard_exponential(size)
    if alpha == 1.0:
        if skew == 0.0:
            return np.tan(u)
        h = np.pi / 2 + skew * u
        return (2.0 / np.pi) * (h * np.tan(u)
                                - skew * np.log((np.pi / 2) * e * np.cos(u) / h))
    t = skew * math.tan(math.pi * alpha / 2)
    shift = math.atan(t) / alpha
    scale = (1.0 + t * t) ** (1.0 / (2.0 * alpha))
    w = alpha * (u + shift)
    return (scale * np.sin(w) / np.cos(u) ** (1.0 / alpha)
            * (np.cos(u - w) / e) ** ((1.0 - alpha) / alpha))


def sample_shock(spec: ShockSpec, count: int, seed) -> np.ndarray:
    """Draw ``count`` i.i.d. shocks; deterministic given ``(spec, count, seed)``."""
    if count < 0:
        raise ParameterError(f"count must be nonnegative, got {count}")
    rng = np.random.default_rng(seed)
    if isinstance(spec, GaussianShock):
        return rng.standard_normal(count)
    if isinstance(spec, StableShock):
        return _stable_draws(spec.alpha, spec.skew, rng, count)
    if isinstance(spec, ParetoShock):
        # 1 - U lies in (0, 1], keeping the inverse-CDF draw finite
        return (1.0 - rng.random(count)) ** (-1.0 / spec.tail_index)
    if isinstance(spec, StudentTShock):
        x = rng.standard_t(spec.dof, count)
        if spec.standardize:
            x *= math.sqrt((spec.dof - 2.0) / spec.dof)
        return x
    if isinstance(spec, PearsonShock):
        draw = pearson_sampler(spec.mean, spec.variance, spec.skewness,
                               spec.kurtosis)
        return draw(rng, count)
    raise ParameterError(f"not a shock spec: {spec!r}")


def simulate_stable_limit(alpha: float, n_terms: int, draws: int, seed) -> np.ndarray:
    """Sums of reciprocal-power arrival times, ``sum_m Gamma_m**(-1/alpha)``.

    ``Gamma_m`` are partial sums of unit exponentials.  The sum converges in
    ``n_terms`` only for ``alpha < 1``; larger indices are accepted so that
    coupled calls at several ``alpha`` values reuse identical arrival times
    (the draw stream does not depend on ``alpha``).
    """
    if alpha <= 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if n_terms < 1:
        raise ParameterError(f"n_terms must be at least 1, got {n_terms}")
    if draws < 1:
        raise ParameterError(f"draws must be at least 1, got {draws}")
    rng = np.random.default_rng(seed)
    out = np.empty(draws)
    for i in range(draws):
        arrivals = np.cumsum(rng.standard_exponential(n_terms))
        out[i] = np.sum(arrivals ** (-1.0 / alpha))
    return out


def sample_kurtosis(x: np.ndarray) -> float:
    """``T * sum(d**4) / sum(d**2)**2`` for demeaned ``d``; about 3 for Gaussian
    samples and of order ``T`` when a single observation dominates."""
    x = np.asarray(x, dtype=float).ravel()
    t = x.size
    if t < 2:
        raise DegenerateInputError(f"kurtosis needs at least 2 observations, got {t}")
    d = x - x.mean()
    peak = float(np.max(np.abs(d)))
    if peak == 0.0:
        raise DegenerateInputError("kurtosis undefined for a constant sample")
    d /= peak  # scale-invariant statistic; avoids under/overflow in d**4
    s2 = float(np.sum(d * d))
    return float(t * np.sum(d**4) / s2**2)


def hill_tail_index(x: np.ndarray, k: int) -> float:
    """Hill estimate of the tail index from the top ``k`` order statistics of
    ``|x|``; scale-invariant by construction."""
    a = np.abs(np.asarray(x, dtype=float).ravel())
    t = a.size
    if not 1 <= k <= t - 1:
        raise ParameterError(f"k must lie in [1, {t - 1}], got {k}")
    top = np.sort(a)[::-1][:k + 1]
    if top[-1] <= 0.0:
        raise DegenerateInputError(
            "Hill estimator needs the top k+1 absolute values to be positive")
    logs = np.log(top)
    mean_excess = float(np.mean(logs[:k]) - logs[k])
    if mean_excess <= 0.0:
        raise DegenerateInputError("tied order statistics give a zero log excess")
    return 1.0 / mean_excess
