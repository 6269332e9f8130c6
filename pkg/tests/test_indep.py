import numpy as np
import pytest

from dcsvar.distcov import DistCovConfig, aggregate_objective
from dcsvar.errors import DegenerateInputError, ParameterError
from dcsvar.indep import PermutationTestResult, permutation_test
from dcsvar.indep import test_battery as battery


def test_perfect_dependence_gives_smallest_p():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(80)
    data = np.column_stack([x, x])
    res = permutation_test(data, n_permutations=99, seed=1)
    assert res.p_value == pytest.approx(1.0 / 100.0)
    assert res.rejects(0.1)
    assert res.n_permutations == 99
    assert res.permuted_statistics.shape == (99,)
    assert np.all(res.permuted_statistics < res.statistic)


def test_p_value_counting_rule():
    rng = np.random.default_rng(5)
    data = rng.standard_normal((60, 2))
    res = permutation_test(data, n_permutations=49, seed=7)
    exceed = int(np.sum(res.permuted_statistics >= res.statistic))
    assert res.p_value == pytest.approx((exceed + 1) / 50.0)
    assert 1.0 / 50.0 <= res.p_value <= 1.0


def test_observed_statistic_matches_objective():
    rng = np.random.default_rng(9)
    data = rng.standard_t(5, (50, 3))
    res = permutation_test(data, n_permutations=19, seed=3)
    assert res.statistic == pytest.approx(aggregate_objective(data),
                                          rel=1e-12)
    cfg = DistCovConfig(beta=0.8)
    res = permutation_test(data, n_permutations=19, config=cfg, seed=3)
    assert res.statistic == pytest.approx(aggregate_objective(data, cfg),
                                          rel=1e-12)


def test_deterministic_across_seed_forms():
    rng = np.random.default_rng(11)
    data = rng.standard_normal((40, 2))
    a = permutation_test(data, n_permutations=29, seed=42)
    b = permutation_test(data, n_permutations=29,
                         seed=np.random.SeedSequence(42))
    np.testing.assert_array_equal(a.permuted_statistics,
                                  b.permuted_statistics)
    assert a.p_value == b.p_value
    c = permutation_test(data, n_permutations=29, seed=43)
    assert not np.array_equal(a.permuted_statistics, c.permuted_statistics)


def test_null_calibration_smoke():
    # independent columns: rejection rate at the 10% level stays near 10%
    rng = np.random.default_rng(13)
    rej = 0
    reps = 100
    for i in range(reps):
        data = rng.standard_normal((60, 2))
        rej += permutation_test(data, n_permutations=19, seed=1000 + i
                                ).rejects(0.1)
    assert 0.01 <= rej / reps <= 0.19


def test_rejects_is_inclusive_at_the_level():
    res = PermutationTestResult(statistic=1.0, p_value=0.1,
                                permuted_statistics=np.zeros(9),
                                n_permutations=9)
    assert res.rejects(0.1)
    assert not res.rejects(0.099)


def test_battery_names_and_prefix_stability():
    rng = np.random.default_rng(17)
    series = {
        "raw": rng.standard_normal((50, 2)),
        "white": rng.standard_normal((50, 2)),
        "shocks": rng.standard_normal((50, 3)),
    }
    out = battery(series, n_permutations=19, seed=5)
    assert list(out) == ["raw", "white", "shocks"]
    # dropping a later entry leaves earlier results untouched
    partial = battery({"raw": series["raw"], "white": series["white"]},
                      n_permutations=19, seed=5)
    np.testing.assert_array_equal(out["raw"].permuted_statistics,
                                  partial["raw"].permuted_statistics)
    np.testing.assert_array_equal(out["white"].permuted_statistics,
                                  partial["white"].permuted_statistics)


def test_validation():
    rng = np.random.default_rng(19)
    data = rng.standard_normal((30, 2))
    with pytest.raises(ParameterError):
        permutation_test(data, n_permutations=0)
    with pytest.raises(DegenerateInputError):
        permutation_test(rng.standard_normal(30), n_permutations=9)
