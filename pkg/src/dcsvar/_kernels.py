"""Compiled inner loops for the distance-covariance statistics.

All loops run in a fixed order so repeated calls reduce in exactly the same
sequence; the long single-stream accumulations in the sorted-data path carry
Neumaier compensation.
"""

from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True)
def mt_objective(s, beta):
    """Sum over k of the distance covariance between column k and the block of
    columns right of k, as one fused pass over all observation pairs.

    ``s`` is a T x n float64 array, ``beta`` the distance exponent.
    """
    t_obs, n = s.shape
    nk = n - 1
    sum_a = np.zeros(nk)
    sum_b = np.zeros(nk)
    sum_ab = np.zeros(nk)
    row_a = np.zeros((nk, t_obs))
    row_b = np.zeros((nk, t_obs))
    d = np.empty(n)
    for i in range(t_obs):
        for j in range(i + 1, t_obs):
            for c in range(n):
                d[c] = abs(s[i, c] - s[j, c])
            tail = d[n - 1] * d[n - 1]
            for k in range(n - 2, -1, -1):
                a = d[k]
                b = np.sqrt(tail)
                if beta != 1.0:
                    a = a**beta
                    b = b**beta
                sum_a[k] += a
                sum_b[k] += b
                sum_ab[k] += a * b
                row_a[k, i] += a
                row_a[k, j] += a
                row_b[k, i] += b
                row_b[k, j] += b
                if k > 0:
                    tail += d[k] * d[k]
    total = 0.0
    tt = float(t_obs)
    for k in range(nk):
        t1 = 2.0 * sum_ab[k] / (tt * tt)
        t2 = (2.0 * sum_a[k] / (tt * tt)) * (2.0 * sum_b[k] / (tt * tt))
        t3 = 0.0
        for i in range(t_obs):
            t3 += row_a[k, i] * row_b[k, i]
        t3 /= tt * tt * tt
        v = t1 + t2 - 2.0 * t3
        if v < 0.0:
            v = 0.0
        total += v
    return total


@nb.njit(cache=True)
def permuted_objectives(s, perms, beta):
    """Objective recomputed under row permutations applied per column.

    ``perms`` has shape (draws, n, T); row ``b`` holds one permutation of
    ``0..T-1`` for every column.
    """
    draws = perms.shape[0]
    t_obs, n = s.shape
    out = np.empty(draws)
    sp = np.empty_like(s)
    for b in range(draws):
        for c in range(n):
            for t in range(t_obs):
                sp[t, c] = s[perms[b, c, t], c]
        out[b] = mt_objective(sp, beta)
    return out


@nb.njit(cache=True, fastmath=True)
def _mt3_core(x0, x1, x2):
    # three-column specialization of mt_objective at beta = 1, unrolled so the
    # pair loop stays in registers; fastmath only reassociates reductions,
    # which stays deterministic for fixed input
    t_obs = x0.size
    sa0 = 0.0
    sb0 = 0.0
    sab0 = 0.0
    sa1 = 0.0
    sb1 = 0.0
    sab1 = 0.0
    ra0 = np.zeros(t_obs)
    rb0 = np.zeros(t_obs)
    ra1 = np.zeros(t_obs)
    rb1 = np.zeros(t_obs)
    for i in range(t_obs):
        xi0 = x0[i]
        xi1 = x1[i]
        xi2 = x2[i]
        ra0i = 0.0
        rb0i = 0.0
        ra1i = 0.0
        rb1i = 0.0
        for j in range(i + 1, t_obs):
            d0 = abs(xi0 - x0[j])
            d1 = abs(xi1 - x1[j])
            d2 = abs(xi2 - x2[j])
            b = np.sqrt(d1 * d1 + d2 * d2)
            sa0 += d0
            sb0 += b
            sab0 += d0 * b
            sa1 += d1
            sb1 += d2
            sab1 += d1 * d2
            ra0i += d0
            rb0i += b
            ra1i += d1
            rb1i += d2
            ra0[j] += d0
            rb0[j] += b
            ra1[j] += d1
            rb1[j] += d2
        ra0[i] += ra0i
        rb0[i] += rb0i
        ra1[i] += ra1i
        rb1[i] += rb1i
    tt = float(t_obs)
    t3a = 0.0
    t3b = 0.0
    for i in range(t_obs):
        t3a += ra0[i] * rb0[i]
        t3b += ra1[i] * rb1[i]
    v0 = (2.0 * sab0 / (tt * tt)
          + (2.0 * sa0 / (tt * tt)) * (2.0 * sb0 / (tt * tt))
          - 2.0 * t3a / (tt * tt * tt))
    v1 = (2.0 * sab1 / (tt * tt)
          + (2.0 * sa1 / (tt * tt)) * (2.0 * sb1 / (tt * tt))
          - 2.0 * t3b / (tt * tt * tt))
    if v0 < 0.0:
        v0 = 0.0
    if v1 < 0.0:
        v1 = 0.0
    return v0 + v1


@nb.njit(cache=True, fastmath=True)
def mt_objective3(s):
    """``mt_objective`` for the three-column, beta = 1 case."""
    return _mt3_core(np.ascontiguousarray(s[:, 0]),
                     np.ascontiguousarray(s[:, 1]),
                     np.ascontiguousarray(s[:, 2]))


@nb.njit(cache=True, fastmath=True)
def mt_objective3_rotated(z0, z1, z2, o):
    """Objective of the whitened columns rotated by the 3 x 3 matrix ``o``
    (columns of ``z o_transpose``), keeping the whole evaluation compiled."""
    t_obs = z0.size
    s0 = np.empty(t_obs)
    s1 = np.empty(t_obs)
    s2 = np.empty(t_obs)
    for t in range(t_obs):
        s0[t] = o[0, 0] * z0[t] + o[0, 1] * z1[t] + o[0, 2] * z2[t]
        s1[t] = o[1, 0] * z0[t] + o[1, 1] * z1[t] + o[1, 2] * z2[t]
        s2[t] = o[2, 0] * z0[t] + o[2, 1] * z1[t] + o[2, 2] * z2[t]
    return _mt3_core(s0, s1, s2)


@nb.njit(cache=True, fastmath=True)
def permuted_objectives3(s, perms):
    """Three-column specialization of :func:`permuted_objectives`."""
    draws = perms.shape[0]
    t_obs = s.shape[0]
    p0 = np.empty(t_obs)
    p1 = np.empty(t_obs)
    p2 = np.empty(t_obs)
    out = np.empty(draws)
    for b in range(draws):
        for t in range(t_obs):
            p0[t] = s[perms[b, 0, t], 0]
            p1[t] = s[perms[b, 1, t], 1]
            p2[t] = s[perms[b, 2, t], 2]
        out[b] = _mt3_core(p0, p1, p2)
    return out


@nb.njit(cache=True)
def sorted_abs_row_sums(xs):
    """Row sums of the pairwise absolute-difference matrix of a sorted vector.

    Returns ``(grand_total, row_sums)`` where ``row_sums[i] = sum_j |x_i-x_j|``
    in sorted order.
    """
    t_obs = xs.size
    prefix = np.empty(t_obs + 1)
    prefix[0] = 0.0
    for i in range(t_obs):
        prefix[i + 1] = prefix[i] + xs[i]
    rows = np.empty(t_obs)
    total = 0.0
    comp = 0.0
    for i in range(t_obs):
        j = i + 1
        r = (2.0 * j - t_obs) * xs[i] + prefix[t_obs] - 2.0 * prefix[j]
        rows[i] = r
        fresh = total + r
        if abs(total) >= abs(r):
            comp += (total - fresh) + r
        else:
            comp += (r - fresh) + total
        total = fresh
    return total + comp, rows


@nb.njit(cache=True)
def crossed_abs_product_sum(xs, ys, yrank):
    """``sum_{i<j} (x_j - x_i) * |y_j - y_i|`` for x-sorted input.

    Four binary indexed trees over y-ranks accumulate count, sum(x), sum(y)
    and sum(x*y) of already-seen points, so each contribution costs O(log T).
    """
    t_obs = xs.size
    size = t_obs + 1
    f_cnt = np.zeros(size)
    f_x = np.zeros(size)
    f_y = np.zeros(size)
    f_xy = np.zeros(size)
    tot_x = 0.0
    tot_y = 0.0
    tot_xy = 0.0
    total = 0.0
    comp = 0.0
    for j in range(t_obs):
        xj = xs[j]
        yj = ys[j]
        r = yrank[j] + 1
        c_le = 0.0
        sx_le = 0.0
        sy_le = 0.0
        sxy_le = 0.0
        i = r
        while i > 0:
            c_le += f_cnt[i]
            sx_le += f_x[i]
            sy_le += f_y[i]
            sxy_le += f_xy[i]
            i -= i & (-i)
        c_gt = j - c_le
        contrib = (xj * yj * c_le - xj * sy_le - yj * sx_le + sxy_le)
        contrib += (xj * (tot_y - sy_le) - xj * yj * c_gt
                    - (tot_xy - sxy_le) + yj * (tot_x - sx_le))
        fresh = total + contrib
        if abs(total) >= abs(contrib):
            comp += (total - fresh) + contrib
        else:
            comp += (contrib - fresh) + total
        total = fresh
        i = r
        while i < size:
            f_cnt[i] += 1.0
            f_x[i] += xj
            f_y[i] += yj
            f_xy[i] += xj * yj
            i += i & (-i)
        tot_x += xj
        tot_y += yj
        tot_xy += xj * yj
    return total + comp
