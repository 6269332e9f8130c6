import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcsvar.errors import ParameterError
from dcsvar.ica import (IcaResult, OptimizerSettings, amari_distance,
                        estimate_unmixing, givens_rotation,
                        label_disaster_shock, omega_normalize)
from dcsvar.whiten import CholeskiOrdered, CovarianceSvd


def test_givens_rotation_is_orthogonal():
    rng = np.random.default_rng(2)
    for n in (2, 3, 4):
        k = n * (n - 1) // 2
        angles = rng.uniform(-np.pi, np.pi, k)
        q = givens_rotation(angles, n)
        np.testing.assert_allclose(q @ q.T, np.eye(n), atol=1e-12)
        np.testing.assert_allclose(np.linalg.det(q), 1.0, atol=1e-12)


def test_givens_two_dimensional_layout():
    theta = 0.3
    q = givens_rotation(np.array([theta]), 2)
    want = np.array([[np.cos(theta), np.sin(theta)],
                     [-np.sin(theta), np.cos(theta)]])
    # the generator fixes one of the two sign conventions; accept either
    assert (np.allclose(q, want, atol=1e-12)
            or np.allclose(q, want.T, atol=1e-12))
    assert givens_rotation(np.zeros(3), 3).tolist() == np.eye(3).tolist()


def test_givens_angle_count_checked():
    with pytest.raises(ParameterError):
        givens_rotation(np.zeros(2), 2)


def test_omega_normalize_hand_example():
    # rows rescale, flip to a positive leading-modulus entry, then sort
    # ascending; [0, 1] sorts before [1, 0]
    w = np.array([[3.0, 0.0], [0.0, -2.0]])
    z = omega_normalize(w)
    np.testing.assert_allclose(z, [[0.0, 1.0], [1.0, 0.0]], atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(z, axis=1), 1.0, rtol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_omega_normalize_kills_signed_permutation_and_scale(seed):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((3, 3))
    while abs(np.linalg.det(w)) < 0.1:
        w = rng.standard_normal((3, 3))
    z = omega_normalize(w)
    perm = rng.permutation(3)
    signs = np.diag(rng.choice([-1.0, 1.0], 3) * rng.uniform(0.5, 2.0, 3))
    np.testing.assert_allclose(omega_normalize(signs @ w[perm]), z, atol=1e-9)
    # rows are unit norm, and each row's max-modulus entry is positive
    np.testing.assert_allclose(np.linalg.norm(z, axis=1), 1.0, rtol=1e-10)
    for row in z:
        assert row[np.argmax(np.abs(row))] > 0


def test_omega_normalize_idempotent():
    rng = np.random.default_rng(3)
    w = rng.standard_normal((4, 4)) + 2 * np.eye(4)
    z = omega_normalize(w)
    np.testing.assert_allclose(omega_normalize(z), z, atol=1e-12)


def test_amari_distance_anchors():
    assert amari_distance(np.eye(2), np.eye(2)) == pytest.approx(0.0, abs=1e-14)
    # worked half-unit example
    cand = np.array([[1.0, 1.0], [0.0, 1.0]])
    assert amari_distance(np.eye(2), cand) == pytest.approx(0.5, abs=1e-12)


def test_amari_distance_signed_permutation_invariance():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((3, 3)) + 2 * np.eye(3)
    for _ in range(10):
        perm = np.eye(3)[rng.permutation(3)]
        lam = np.diag(rng.choice([-1.0, 1.0], 3) * rng.uniform(0.2, 5.0, 3))
        assert amari_distance(a, perm @ lam @ a) == pytest.approx(0.0,
                                                                  abs=1e-10)
    # and positive for a genuine rotation away
    q = givens_rotation(np.array([0.4, 0.0, 0.0]), 3)
    assert amari_distance(a, q @ a) > 0.05


def test_recovers_known_mixing():
    rng = np.random.default_rng(11)
    t = 2000
    shocks = np.column_stack([rng.standard_t(5, t),
                              rng.standard_t(8, t),
                              rng.uniform(-np.sqrt(3), np.sqrt(3), t)])
    b_true = np.array([[1.0, 0.0, 0.0],
                       [0.75, 1.0, 0.0],
                       [1.0, 1.0 / 6.0, 1.0]])
    data = shocks @ b_true.T
    fit = estimate_unmixing(data, CholeskiOrdered())
    w_true = omega_normalize(np.linalg.inv(b_true))
    assert amari_distance(w_true, fit.unmixing_unit_rows) < 0.1
    # recovered shocks nearly reproduce the generating ones up to sign/perm
    corr = np.corrcoef(shocks.T, fit.shocks.values.T)[:3, 3:]
    assert np.all(np.max(np.abs(corr), axis=1) > 0.9)


def test_result_conventions_are_consistent():
    rng = np.random.default_rng(13)
    t = 500
    shocks = np.column_stack([rng.standard_t(6, t), rng.standard_t(12, t)])
    data = shocks @ np.array([[1.0, 0.0], [0.5, 1.0]]).T
    fit = estimate_unmixing(data, CovarianceSvd())
    # unit-row convention really has unit rows
    np.testing.assert_allclose(
        np.linalg.norm(fit.unmixing_unit_rows, axis=1), 1.0, rtol=1e-10)
    # the two conventions agree up to positive row scales
    scales = np.linalg.norm(fit.unmixing, axis=1) \
        / np.linalg.norm(fit.unmixing_unit_rows, axis=1)
    np.testing.assert_allclose(fit.unmixing,
                               fit.unmixing_unit_rows * scales[:, None]
                               * np.sign(np.sum(
                                   fit.unmixing * fit.unmixing_unit_rows,
                                   axis=1))[:, None], atol=1e-8)
    # mixing matrices invert their unmixing partners
    np.testing.assert_allclose(fit.mixing @ fit.unmixing, np.eye(2),
                               atol=1e-8)
    np.testing.assert_allclose(fit.mixing_unit_rows @ fit.unmixing_unit_rows,
                               np.eye(2), atol=1e-8)
    # recovered shocks have unit variance under the plain convention
    np.testing.assert_allclose(fit.shocks.values.var(axis=0), 1.0, rtol=1e-6)
    # kurtosis ordering is descending
    assert fit.kurtosis[0] >= fit.kurtosis[1]
    # plugged-in unmixing reproduces the stored shocks
    centred = data - data.mean(axis=0)
    np.testing.assert_allclose(centred @ fit.unmixing.T, fit.shocks.values,
                               atol=1e-8)


def test_estimate_is_deterministic():
    rng = np.random.default_rng(17)
    data = np.column_stack([rng.standard_t(5, 300), rng.standard_t(9, 300)])
    a = estimate_unmixing(data, CholeskiOrdered())
    b = estimate_unmixing(data, CholeskiOrdered())
    np.testing.assert_array_equal(a.unmixing, b.unmixing)
    assert a.objective_value == b.objective_value


def test_optimizer_settings_validation():
    with pytest.raises(ParameterError):
        OptimizerSettings(restarts=0)
    with pytest.raises(ParameterError):
        OptimizerSettings(step0=0.0)
    with pytest.raises(ParameterError):
        OptimizerSettings(search="newton")
    with pytest.raises(ParameterError):
        OptimizerSettings(max_sweeps=0)


def test_pattern_search_profile_converges():
    rng = np.random.default_rng(19)
    data = np.column_stack([rng.standard_t(5, 400), rng.standard_t(9, 400)])
    opts = OptimizerSettings(restarts=1, search="pattern", step0=0.05)
    fit = estimate_unmixing(data, CholeskiOrdered(), settings=opts)
    assert fit.report.converged
    assert fit.report.evaluations > 0
    # a pattern fit cannot sit above the bracket fit by much on the same data
    bracket = estimate_unmixing(data, CholeskiOrdered())
    assert fit.objective_value <= bracket.objective_value + 1e-3


def test_label_disaster_shock_sign_flip():
    rng = np.random.default_rng(23)
    t = 600
    shocks = np.column_stack([rng.standard_t(4, t), rng.standard_t(30, t)])
    data = shocks @ np.array([[1.0, 0.0], [0.4, 1.0]]).T
    fit = estimate_unmixing(data, CholeskiOrdered())
    idx, unchanged = label_disaster_shock(fit)
    assert idx == 0 and unchanged is fit
    for wanted in ("negative", "positive"):
        idx, adj = label_disaster_shock(fit, sign=wanted, on_variable=0)
        impact = adj.mixing_unit_rows[0, idx]
        assert (impact < 0) == (wanted == "negative")
        np.testing.assert_allclose(adj.mixing @ adj.unmixing, np.eye(2),
                                   atol=1e-8)
    with pytest.raises(ParameterError):
        label_disaster_shock(fit, sign="sideways")
    with pytest.raises(ParameterError):
        label_disaster_shock(fit, sign="positive", on_variable=5)


def test_shock_scales_positive():
    rng = np.random.default_rng(29)
    data = np.column_stack([rng.standard_t(5, 200), rng.standard_t(7, 200)])
    fit = estimate_unmixing(data, CholeskiOrdered())
    assert np.all(fit.shock_scales > 0)
