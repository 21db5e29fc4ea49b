import numpy as np
import pytest

from dcbats.combine import (
    barycenter_1d,
    combine_marginals,
    coverage_rate,
    credible_interval,
    empirical_quantile,
    functional_draws,
    w2_distance_1d,
)
from dcbats.core import DrawSet, LinearFunctional
from dcbats.errors import (
    DimensionError,
    DomainError,
    EmptyInputError,
    LengthMismatchError,
    SpaceMismatchError,
)


def make_set(draws, label="subseq"):
    return DrawSet(draws=np.asarray(draws, dtype=float), burn_in=0,
                   acceptance_rate=0.3, seed=1, target_label=label)


# --- functional projection -------------------------------------------------


def test_functional_coordinate_projection():
    ds = make_set([[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]])
    f = LinearFunctional.coordinate(0, 2)
    np.testing.assert_array_equal(functional_draws(ds, f), [1.0, 2.0, 3.0])


def test_functional_affine_map():
    draws = np.array([[1.0], [2.0]])
    f = LinearFunctional(a=[2.0], b=1.0)
    np.testing.assert_array_equal(functional_draws(draws, f), [3.0, 5.0])


def test_functional_linearity_of_mean():
    rng = np.random.default_rng(12)
    draws = rng.standard_normal((500, 3))
    f = LinearFunctional(a=[0.5, -1.0, 2.0], b=0.7)
    vals = functional_draws(draws, f)
    want = f.a @ draws.mean(axis=0) + f.b
    assert vals.mean() == pytest.approx(want, rel=1e-12)


def test_functional_dimension_check():
    with pytest.raises(DimensionError):
        functional_draws(np.zeros((4, 3)), LinearFunctional(a=[1.0, 0.0]))


# --- empirical quantile ------------------------------------------------------


def test_quantile_pinned_examples():
    assert empirical_quantile(np.array([1.0, 2.0, 3.0, 4.0]), 0.5) == 2.0
    for u in (0.01, 0.5, 0.99, 1.0):
        assert empirical_quantile(np.array([7.0]), u) == 7.0


def test_quantile_large_normal_sample():
    draws = np.random.default_rng(8).standard_normal(10 ** 6)
    assert abs(empirical_quantile(draws, 0.975) - 1.960) < 0.01


def test_quantile_steps_at_index_fractions():
    x = np.array([10.0, 20.0, 30.0, 40.0])
    # j/S >= u picks the smallest such order statistic
    assert empirical_quantile(x, 0.25) == 10.0
    assert empirical_quantile(x, 0.2500001) == 20.0
    assert empirical_quantile(x, 0.75) == 30.0
    assert empirical_quantile(x, 1.0) == 40.0
    assert empirical_quantile(x, 1e-12) == 10.0


def test_quantile_does_not_sort_in_place():
    x = np.array([3.0, 1.0, 2.0])
    assert empirical_quantile(x, 0.5) == 2.0
    np.testing.assert_array_equal(x, [3.0, 1.0, 2.0])


def test_quantile_domain():
    x = np.array([1.0, 2.0])
    with pytest.raises(DomainError):
        empirical_quantile(x, 0.0)
    with pytest.raises(DomainError):
        empirical_quantile(x, 1.0000001)
    with pytest.raises(DomainError):
        empirical_quantile(x, -0.3)
    with pytest.raises(EmptyInputError):
        empirical_quantile(np.array([]), 0.5)


def test_quantile_float_index_robustness():
    # u exactly at j/S for awkward S must not round to the next statistic
    x = np.arange(1.0, 1001.0)
    assert empirical_quantile(x, 0.025) == 25.0
    x3 = np.array([1.0, 2.0, 3.0])
    assert empirical_quantile(x3, 1.0 / 3.0) == 1.0
    assert empirical_quantile(x3, 2.0 / 3.0) == 2.0


# --- barycenter ---------------------------------------------------------------


def test_barycenter_of_one_set_is_sorted_input():
    res = barycenter_1d([np.array([3.0, 1.0, 2.0])])
    np.testing.assert_array_equal(res.pseudo_draws, [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(res.q_bar, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(res.u_grid, [1 / 3, 2 / 3, 1.0])


def test_barycenter_of_point_masses():
    res = barycenter_1d([np.zeros(3), np.full(3, 2.0)])
    np.testing.assert_array_equal(res.pseudo_draws, [1.0, 1.0, 1.0])


def test_barycenter_hand_oracle():
    # sorted columns [1,2,3] and [4,5,6]; rowwise means are exact
    res = barycenter_1d([np.array([2.0, 3.0, 1.0]), np.array([6.0, 4.0, 5.0])])
    np.testing.assert_array_equal(res.pseudo_draws, [2.5, 3.5, 4.5])
    assert res.pseudo_draws is not res.q_bar
    np.testing.assert_array_equal(res.q_bar, res.pseudo_draws)


def test_barycenter_gaussian_oracle():
    rng = np.random.default_rng(3)
    s = 10 ** 5
    res = barycenter_1d([rng.standard_normal(s),
                         rng.standard_normal(s) + 2.0])
    assert res.pseudo_draws.mean() == pytest.approx(1.0, abs=0.02)
    assert res.pseudo_draws.var(ddof=1) == pytest.approx(1.0, abs=0.05)


def test_barycenter_matches_independent_quantile_average():
    rng = np.random.default_rng(44)
    sets = [rng.standard_normal(64) * (k + 1) for k in range(3)]
    res = barycenter_1d(sets)
    for i in (1, 13, 40, 64):
        u = i / 64
        want = np.mean([empirical_quantile(s, u) for s in sets])
        assert res.q_bar[i - 1] == pytest.approx(want, rel=1e-12)


def test_barycenter_q_bar_monotone():
    rng = np.random.default_rng(7)
    sets = [rng.standard_normal(257), np.exp(rng.standard_normal(257))]
    res = barycenter_1d(sets)
    assert np.all(np.diff(res.q_bar) >= 0.0)
    assert np.all(np.diff(res.pseudo_draws) >= 0.0)


def test_barycenter_affine_equivariance():
    rng = np.random.default_rng(15)
    sets = [rng.standard_normal(50) for _ in range(4)]
    base = barycenter_1d(sets)
    scaled = barycenter_1d([3.0 * s - 1.5 for s in sets])
    np.testing.assert_allclose(scaled.pseudo_draws,
                               3.0 * base.pseudo_draws - 1.5, rtol=1e-12)


def test_barycenter_strict_size_checking():
    sets = [np.zeros(4), np.zeros(6)]
    with pytest.raises(LengthMismatchError):
        barycenter_1d(sets)
    # non-strict falls back to a common midpoint grid, no pseudo-draws
    res = barycenter_1d(sets, strict=False)
    assert res.pseudo_draws is None
    assert res.u_grid.size == 6
    np.testing.assert_allclose(res.u_grid, (np.arange(1, 7) - 0.5) / 6)
    np.testing.assert_array_equal(res.q_bar, np.zeros(6))


def test_barycenter_explicit_grid():
    grid = np.array([0.25, 0.5, 0.75])
    sets = [np.array([1.0, 2.0, 3.0, 4.0]), np.array([5.0, 6.0, 7.0, 8.0])]
    res = barycenter_1d(sets, u_grid=grid)
    assert res.pseudo_draws is None
    want = [(1.0 + 5.0) / 2, (2.0 + 6.0) / 2, (3.0 + 7.0) / 2]
    np.testing.assert_array_equal(res.q_bar, want)


def test_barycenter_grid_validation():
    sets = [np.arange(4.0)]
    with pytest.raises(DomainError):
        barycenter_1d(sets, u_grid=np.array([0.0, 0.5]))
    with pytest.raises(DomainError):
        barycenter_1d(sets, u_grid=np.array([0.5, 0.5]))
    with pytest.raises(DomainError):
        barycenter_1d(sets, u_grid=np.array([0.5, 1.1]))
    with pytest.raises(EmptyInputError):
        barycenter_1d(sets, u_grid=np.array([]))
    with pytest.raises(EmptyInputError):
        barycenter_1d([])


def test_barycenter_needs_functional_for_matrix_draws():
    ds = make_set(np.zeros((5, 2)))
    with pytest.raises(DomainError):
        barycenter_1d([ds])
    res = barycenter_1d([ds], functional=LinearFunctional.coordinate(1, 2))
    assert res.functional is not None


# --- W2 distance ----------------------------------------------------------


def test_w2_identity():
    x = np.random.default_rng(0).standard_normal(100)
    assert w2_distance_1d(x, x.copy()) == 0.0


def test_w2_point_masses():
    assert w2_distance_1d(np.array([3.0]), np.array([-1.5])) == 4.5


def test_w2_translation():
    x = np.random.default_rng(1).standard_normal(1000)
    assert w2_distance_1d(x, x + 2.7) == pytest.approx(2.7, abs=1e-12)


def test_w2_symmetry_and_triangle():
    rng = np.random.default_rng(2)
    for _ in range(50):
        a = rng.standard_normal(30)
        b = rng.standard_normal(30) + rng.uniform(-2, 2)
        c = np.exp(rng.standard_normal(30))
        assert w2_distance_1d(a, b) == pytest.approx(w2_distance_1d(b, a))
        assert w2_distance_1d(a, c) <= (w2_distance_1d(a, b)
                                        + w2_distance_1d(b, c) + 1e-10)


def test_w2_quantile_duality():
    # squared distance equals the mean squared quantile gap on u_i = i/S
    rng = np.random.default_rng(9)
    a = rng.standard_normal(40)
    b = 2.0 * rng.standard_normal(40) + 1.0
    gaps = [(empirical_quantile(a, i / 40) - empirical_quantile(b, i / 40)) ** 2
            for i in range(1, 41)]
    assert w2_distance_1d(a, b) ** 2 == pytest.approx(np.mean(gaps), rel=1e-12)


def test_w2_input_checks():
    with pytest.raises(EmptyInputError):
        w2_distance_1d(np.array([]), np.array([]))
    with pytest.raises(LengthMismatchError):
        w2_distance_1d(np.zeros(3), np.zeros(4))


# --- credible intervals and coverage -----------------------------------------


def test_credible_interval_order_statistics():
    x = np.arange(1.0, 1001.0)
    assert credible_interval(x, 0.95) == (25.0, 975.0)


def test_credible_interval_single_atom():
    assert credible_interval(np.array([4.2]), 0.5) == (4.2, 4.2)


def test_credible_interval_translation():
    x = np.random.default_rng(5).standard_normal(500)
    lo, hi = credible_interval(x, 0.9)
    lo2, hi2 = credible_interval(x + 10.0, 0.9)
    assert lo2 == pytest.approx(lo + 10.0, rel=1e-12)
    assert hi2 == pytest.approx(hi + 10.0, rel=1e-12)


def test_credible_interval_level_domain():
    x = np.arange(10.0)
    with pytest.raises(DomainError):
        credible_interval(x, 0.0)
    with pytest.raises(DomainError):
        credible_interval(x, 1.0)


def test_credible_interval_awkward_levels():
    # levels whose tail masses are not exactly representable must still
    # land on the intended order statistics
    x = np.arange(1.0, 101.0)
    assert credible_interval(x, 0.9) == (5.0, 95.0)
    assert credible_interval(x, 0.8) == (10.0, 90.0)


def test_coverage_rate_fractions():
    all_in = [(0.0, 2.0)] * 4
    assert coverage_rate(all_in, [1.0, 0.0, 2.0, 1.5]) == 1.0
    assert coverage_rate(all_in, [3.0, -1.0, 2.1, 5.0]) == 0.0
    half = [(0.0, 1.0), (0.0, 1.0), (5.0, 6.0), (5.0, 6.0)]
    assert coverage_rate(half, [0.5, 0.5, 0.0, 0.0]) == 0.5


def test_coverage_rate_validation():
    with pytest.raises(EmptyInputError):
        coverage_rate([], [])
    with pytest.raises(LengthMismatchError):
        coverage_rate([(0.0, 1.0)], [0.5, 0.5])
    with pytest.raises(DomainError):
        coverage_rate([(1.0, 0.0)], [0.5])


# --- marginal combination ------------------------------------------------------


def test_combine_marginals_hand_oracle():
    a = make_set([[1.0, 60.0], [3.0, 40.0], [2.0, 50.0]])
    b = make_set([[4.0, 90.0], [6.0, 70.0], [5.0, 80.0]])
    results, intervals = combine_marginals([a, b], level=0.5)
    np.testing.assert_array_equal(results[0].pseudo_draws, [2.5, 3.5, 4.5])
    np.testing.assert_array_equal(results[1].pseudo_draws, [55.0, 65.0, 75.0])
    # equal-tail interval of 3 pseudo-draws at level 0.5: u = 0.25 and 0.75
    assert intervals[0] == (2.5, 4.5)
    assert intervals[1] == (55.0, 75.0)


def test_combine_marginals_identical_sets():
    rng = np.random.default_rng(21)
    draws = rng.standard_normal((50, 3))
    sets = [make_set(draws) for _ in range(4)]
    results, _ = combine_marginals(sets)
    for j in range(3):
        np.testing.assert_array_equal(results[j].pseudo_draws,
                                      np.sort(draws[:, j]))


def test_combine_marginals_interval_composition():
    rng = np.random.default_rng(30)
    sets = [make_set(rng.standard_normal((200, 2))) for _ in range(3)]
    results, intervals = combine_marginals(sets, level=0.9)
    for res, got in zip(results, intervals):
        assert got == credible_interval(res.pseudo_draws, 0.9)


def test_combine_marginals_dimension_mismatch():
    a = make_set(np.zeros((5, 2)))
    b = make_set(np.zeros((5, 3)))
    with pytest.raises(SpaceMismatchError):
        combine_marginals([a, b])
    with pytest.raises(EmptyInputError):
        combine_marginals([])
