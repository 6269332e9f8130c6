import numpy as np
import pytest

from dcsvar.errors import ParameterError, SimulationError
from dcsvar.model import (HeavyTailDamping, SvarModel, effective_matrices,
                          model_from_dict, model_to_dict, normalize_unmixing,
                          simulate)
from dcsvar.montecarlo import DESIGN_LAG_MATRIX, DESIGN_MIXING_INIT
from dcsvar.shocks import GaussianShock, StableShock, StudentTShock


def _toy_model(lag_scale=0.5):
    a = lag_scale * np.eye(2)
    b = np.array([[1.0, 0.0], [0.4, 1.0]])
    return SvarModel(lag_matrices=(a,), mixing=b,
                     shocks=(GaussianShock(), GaussianShock()))


def test_validation_rejects_bad_inputs():
    good = _toy_model()
    with pytest.raises(ParameterError):
        SvarModel(lag_matrices=(np.eye(2),), mixing=good.mixing,
                  shocks=good.shocks)  # unit root
    with pytest.raises(ParameterError):
        SvarModel(lag_matrices=(0.5 * np.eye(3),), mixing=good.mixing,
                  shocks=good.shocks)  # dimension clash
    with pytest.raises(ParameterError):
        SvarModel(lag_matrices=(0.5 * np.eye(2),),
                  mixing=np.array([[1.0, 2.0], [0.5, 1.0]]),
                  shocks=good.shocks)  # singular mixing
    with pytest.raises(ParameterError):
        SvarModel(lag_matrices=(0.5 * np.eye(2),), mixing=good.mixing,
                  shocks=(GaussianShock(),))  # wrong shock count


def test_stability_uses_companion_matrix():
    # each lag matrix tame, companion unstable
    a1 = np.array([[0.0, 0.0], [0.0, 0.0]])
    a2 = 1.2 * np.eye(2)
    with pytest.raises(ParameterError):
        SvarModel(lag_matrices=(a1, a2), mixing=np.eye(2),
                  shocks=(GaussianShock(), GaussianShock()))
    # and a genuinely stable VAR(2) passes
    SvarModel(lag_matrices=(0.4 * np.eye(2), 0.3 * np.eye(2)),
              mixing=np.eye(2), shocks=(GaussianShock(), GaussianShock()))


def test_damping_scales_first_column_below_diagonal():
    shocks = (StableShock(1.1), StudentTShock(5), StudentTShock(10))
    damped = SvarModel(
        lag_matrices=(DESIGN_LAG_MATRIX.copy(),),
        mixing=DESIGN_MIXING_INIT["NLT"].copy(),
        shocks=shocks, hl=HeavyTailDamping(1.1))
    t = 400
    lags, mixing = effective_matrices(damped, t)
    scale = t ** (-(1.0 / 1.1 - 0.5))
    expect_b = DESIGN_MIXING_INIT["NLT"].astype(float).copy()
    expect_b[1:, 0] *= scale
    expect_a = DESIGN_LAG_MATRIX.astype(float).copy()
    expect_a[1:, 0] *= scale
    np.testing.assert_allclose(mixing, expect_b, rtol=1e-12)
    np.testing.assert_allclose(lags[0], expect_a, rtol=1e-12)
    # no damping rule: matrices come back unchanged, as fresh copies
    plain = SvarModel(lag_matrices=(DESIGN_LAG_MATRIX.copy(),),
                      mixing=DESIGN_MIXING_INIT["NLT"].copy(), shocks=shocks)
    lags2, mixing2 = effective_matrices(plain, t)
    np.testing.assert_allclose(mixing2, plain.mixing)
    assert mixing2 is not plain.mixing


def test_damping_requires_heavy_tail():
    with pytest.raises(ParameterError):
        HeavyTailDamping(2.5)
    with pytest.raises(ParameterError):
        HeavyTailDamping(0.0)


def test_simulate_matches_direct_recursion():
    model = _toy_model()
    res = simulate(model, t_obs=50, seed=123, burn_in=0)
    assert res.y.values.shape == (50, 2)
    u = res.shocks.values
    assert u.shape == (50, 2)
    # recursion oracle: y_t = A y_{t-1} + B u_t with zero pre-sample
    y = np.zeros((50, 2))
    prev = np.zeros(2)
    for t in range(50):
        y[t] = model.lag_matrices[0] @ prev + model.mixing @ u[t]
        prev = y[t]
    np.testing.assert_allclose(res.y.values, y, atol=1e-12)


def test_simulate_deterministic_and_burn_in_drops_rows():
    model = _toy_model()
    a = simulate(model, t_obs=80, seed=7)
    b = simulate(model, t_obs=80, seed=7)
    np.testing.assert_array_equal(a.y.values, b.y.values)
    np.testing.assert_array_equal(a.shocks.values, b.shocks.values)
    c = simulate(model, t_obs=80, seed=8)
    assert not np.array_equal(a.y.values, c.y.values)
    assert a.y.values.shape == (80, 2)


def test_shock_streams_are_component_stable():
    # adding a variable must not disturb the first component's draws
    m2 = _toy_model()
    a3 = 0.5 * np.eye(3)
    b3 = np.eye(3)
    b3[1, 0] = 0.4
    m3 = SvarModel(lag_matrices=(a3,), mixing=b3,
                   shocks=(GaussianShock(), GaussianShock(), GaussianShock()))
    s2 = simulate(m2, t_obs=40, seed=99, burn_in=0).shocks.values
    s3 = simulate(m3, t_obs=40, seed=99, burn_in=0).shocks.values
    np.testing.assert_array_equal(s2[:, 0], s3[:, 0])
    np.testing.assert_array_equal(s2[:, 1], s3[:, 1])


@pytest.mark.filterwarnings("ignore:overflow")
def test_simulate_flags_divergence():
    # innovations of order 1e308 overflow within a few accumulation steps
    model = SvarModel(lag_matrices=(0.9 * np.eye(1),),
                      mixing=1e308 * np.eye(1), shocks=(GaussianShock(),))
    with pytest.raises(SimulationError, match="step"):
        simulate(model, t_obs=500, seed=5)


def test_normalize_unmixing_design_anchors():
    # lower-triangular design: unit-norm rows of inv(B) keep triangular shape
    _, b_eff = normalize_unmixing(np.linalg.inv(DESIGN_MIXING_INIT["LT"]))
    np.testing.assert_allclose(
        b_eff,
        [[1.0, 0.0, 0.0],
         [0.75, 1.25, 0.0],
         [1.0, 0.208333, 1.339180]], atol=5e-6)
    _, b_eff = normalize_unmixing(np.linalg.inv(DESIGN_MIXING_INIT["NLT"]))
    np.testing.assert_allclose(
        b_eff,
        [[1.581139, 2.121320, 0.0],
         [1.581139, 0.707107, 0.0],
         [0.0, 0.0, 1.0]], atol=5e-6)


def test_normalize_unmixing_properties():
    rng = np.random.default_rng(17)
    for _ in range(20):
        w = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        z, b = normalize_unmixing(w)
        np.testing.assert_allclose(np.linalg.norm(z, axis=1), 1.0, rtol=1e-12)
        np.testing.assert_allclose(b @ z, np.eye(3), atol=1e-9)
        # idempotent and invariant to positive row scaling
        np.testing.assert_allclose(normalize_unmixing(z)[0], z, atol=1e-12)
        scaled = np.diag([2.0, 0.5, 7.0]) @ w
        np.testing.assert_allclose(normalize_unmixing(scaled)[0], z,
                                   atol=1e-12)


def test_dict_roundtrip():
    model = SvarModel(
        lag_matrices=(DESIGN_LAG_MATRIX.copy(),),
        mixing=DESIGN_MIXING_INIT["LT"].copy(),
        shocks=(StableShock(1.1), StudentTShock(5), StudentTShock(10)))
    spec = model_to_dict(model)
    clone = model_from_dict(spec)
    np.testing.assert_allclose(clone.lag_matrices[0], model.lag_matrices[0])
    np.testing.assert_allclose(clone.mixing, model.mixing)
    assert clone.shocks == model.shocks
    # simulation agrees across the roundtrip
    a = simulate(model, t_obs=30, seed=3)
    b = simulate(clone, t_obs=30, seed=3)
    np.testing.assert_array_equal(a.y.values, b.y.values)


def test_dict_roundtrip_preserves_damping_tag():
    base = _toy_model()
    model = SvarModel(lag_matrices=base.lag_matrices, mixing=base.mixing,
                      shocks=base.shocks, hl=HeavyTailDamping(1.3))
    spec = model_to_dict(model)
    assert spec["hl_tail_index"] == 1.3
    clone = model_from_dict(spec)
    assert clone.hl == HeavyTailDamping(1.3)
    spec.pop("hl_tail_index")
    assert model_from_dict(spec).hl is None
