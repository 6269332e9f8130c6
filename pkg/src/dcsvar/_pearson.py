"""Pearson-system sampler parameterized by its first four moments.

The density solves f'(x)/f(x) = -(a + x) / (c0 + c1*x + c2*x**2) with x
measured from the mean and a = c1; the classical coefficient formulas map
(variance, skewness, kurtosis) onto (c0, c1, c2).  Root configuration of the
quadratic selects the family (beta, gamma, inverse gamma, beta prime, scaled
Student t, or the type with complex roots, sampled by inverse CDF on a tangent
grid).  Negative skewness is handled by mirroring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ParameterError

_EPS = 1e-9


@dataclass(frozen=True)
class _PearsonBase:
    """Sampler for the mean-zero, positive-skew base distribution."""

    kind: str
    draw: object  # callable (rng, size) -> ndarray


def _tangent_grid_sampler(inv_half_c2: float, nu: float, vertex: float,
                          half_width: float) -> _PearsonBase:
    # density over theta = arctan((x - vertex)/half_width) is
    # cos(theta)**(2m - 2) * exp(-nu*theta) with m = inv_half_c2 / 2;
    # invert its CDF on a dense theta grid.
    m = inv_half_c2 / 2.0
    if 2.0 * m - 2.0 <= 0.0:
        raise ParameterError("moment combination gives a non-integrable density")
    theta = np.linspace(-np.pi / 2, np.pi / 2, 32769)[1:-1]
    log_g = (2.0 * m - 2.0) * np.log(np.cos(theta)) - nu * theta
    g = np.exp(log_g - log_g.max())
    cdf = np.concatenate(([0.0], np.cumsum((g[1:] + g[:-1]) * 0.5 * np.diff(theta))))
    cdf /= cdf[-1]

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        th = np.interp(u, cdf, theta)
        return vertex + half_width * np.tan(th)

    return _PearsonBase("tangent", draw)


def _pearson_base(variance: float, skewness: float, kurtosis: float) -> _PearsonBase:
    """Base sampler assuming mean zero and skewness >= 0."""
    sigma = math.sqrt(variance)
    beta1 = skewness**2
    beta2 = kurtosis

    if beta1 < _EPS and abs(beta2 - 3.0) < _EPS:
        return _PearsonBase(
            "normal", lambda rng, size: sigma * rng.standard_normal(size))

    denom = 10.0 * beta2 - 12.0 * beta1 - 18.0
    if abs(denom) < _EPS:
        raise ParameterError(
            "moment combination lies on a boundary of the Pearson chart "
            f"(10*kurt - 12*skew^2 - 18 = {denom:g})")
    c0 = variance * (4.0 * beta2 - 3.0 * beta1) / denom
    c1 = sigma * skewness * (beta2 + 3.0) / denom
    c2 = (2.0 * beta2 - 3.0 * beta1 - 6.0) / denom

    if abs(c2) < _EPS:
        # gamma: x = c1 * G(k) - c0/c1 with shape k = c0/c1**2
        shape = c0 / c1**2
        gamma = stats.gamma(shape)

        def draw(rng, size, _g=gamma, _c1=c1, _loc=c0 / c1):
            return _c1 * _g.rvs(size=size, random_state=rng) - _loc

        return _PearsonBase("gamma", draw)

    disc = c1**2 - 4.0 * c0 * c2
    kappa = c1**2 / (4.0 * c0 * c2)

    if abs(kappa - 1.0) < _EPS:
        # double root: shifted inverse gamma
        root = -c1 / (2.0 * c2)
        shape = 1.0 / c2 - 1.0
        scale = -(c1 + root) / c2
        if shape <= 0.0 or scale <= 0.0:
            raise ParameterError("degenerate inverse-gamma parameters")
        ig = stats.invgamma(shape, scale=scale)

        def draw(rng, size, _ig=ig, _root=root):
            return _root + _ig.rvs(size=size, random_state=rng)

        return _PearsonBase("invgamma", draw)

    if disc > 0.0:
        sq = math.sqrt(disc)
        r_lo = (-c1 - sq) / (2.0 * c2) if c2 > 0 else (-c1 + sq) / (2.0 * c2)
        r_hi = (-c1 + sq) / (2.0 * c2) if c2 > 0 else (-c1 - sq) / (2.0 * c2)
        k_lo = -(r_lo + c1) / (c2 * (r_lo - r_hi))
        k_hi = -(r_hi + c1) / (c2 * (r_hi - r_lo))
        if c0 * c2 < 0.0:
            # root product c0/c2 negative, so the roots straddle zero
            # (kappa < 0, but written sign-of-zero safe for c1 == 0):
            # scaled beta on (r_lo, r_hi)
            if k_lo <= -1.0 or k_hi <= -1.0:
                raise ParameterError("beta exponents out of range")
            be = stats.beta(k_lo + 1.0, k_hi + 1.0)

            def draw(rng, size, _b=be, _lo=r_lo, _w=r_hi - r_lo):
                return _lo + _w * _b.rvs(size=size, random_state=rng)

            return _PearsonBase("beta", draw)

        # both roots on one side (negative, given skewness >= 0): beta prime
        # on (r_hi, infinity); exponents satisfy k_lo + k_hi = -1/c2
        a_bp = k_hi + 1.0
        b_bp = 1.0 / c2 - 1.0
        if a_bp <= 0.0 or b_bp <= 0.0:
            raise ParameterError("beta-prime exponents out of range")
        bp = stats.betaprime(a_bp, b_bp)

        def draw(rng, size, _bp=bp, _hi=r_hi, _w=r_hi - r_lo):
            return _hi + _w * _bp.rvs(size=size, random_state=rng)

        return _PearsonBase("betaprime", draw)

    # complex roots
    vertex = -c1 / (2.0 * c2)
    half_width = math.sqrt(c0 / c2 - (c1 / (2.0 * c2)) ** 2)
    if abs(c1) < _EPS:
        # symmetric: scaled Student t
        dof = 1.0 / c2 - 1.0
        if dof <= 4.0:
            raise ParameterError("implied t degrees of freedom too small")
        scale = math.sqrt(c0 / (c2 * dof))

        def draw(rng, size, _s=scale, _d=dof):
            return _s * rng.standard_t(_d, size)

        return _PearsonBase("student", draw)

    nu = (c1 + vertex) / (c2 * half_width)
    return _tangent_grid_sampler(1.0 / c2, nu, vertex, half_width)


_CACHE: dict[tuple[float, float, float], _PearsonBase] = {}


def pearson_sampler(mean: float, variance: float, skewness: float,
                    kurtosis: float):
    """Return ``draw(rng, size)`` sampling the Pearson family member with the
    requested first four moments."""
    if variance <= 0.0:
        raise ParameterError(f"variance must be positive, got {variance}")
    if kurtosis <= skewness**2 + 1.0 + _EPS:
        raise ParameterError(
            f"kurtosis {kurtosis} violates kurtosis > skewness^2 + 1")
    key = (float(variance), abs(float(skewness)), float(kurtosis))
    base = _CACHE.get(key)
    if base is None:
        base = _pearson_base(*key)
        _CACHE[key] = base
    flip = -1.0 if skewness < 0 else 1.0

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return mean + flip * base.draw(rng, size)

    return draw
