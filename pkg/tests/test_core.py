import numpy as np
import pytest

from dcbats.core import (
    Block,
    DrawSet,
    Interval,
    LinearFunctional,
    ParameterSpace,
    POSITIVE,
    REAL,
    TimeSeries,
    extract_segment,
    make_partition,
)
from dcbats.errors import (
    DimensionError,
    DivisibilityError,
    DomainError,
)


def test_time_series_promotes_1d_obs():
    ts = TimeSeries(obs=[1.0, 2.0, 3.0])
    assert ts.obs.shape == (3, 1)
    assert ts.T == 3
    assert ts.obs_dim == 1
    assert ts.cov_dim == 0


def test_time_series_is_read_only():
    ts = TimeSeries(obs=np.ones((4, 2)), covariates=np.zeros((4, 3)))
    with pytest.raises(ValueError):
        ts.obs[0, 0] = 9.0
    with pytest.raises(ValueError):
        ts.covariates[0, 0] = 9.0


def test_time_series_copies_input():
    raw = np.ones((3, 1))
    ts = TimeSeries(obs=raw)
    raw[0, 0] = 7.0
    assert ts.obs[0, 0] == 1.0


def test_time_series_rejects_bad_shapes():
    with pytest.raises(DimensionError):
        TimeSeries(obs=np.ones((2, 2, 2)))
    with pytest.raises(DomainError):
        TimeSeries(obs=np.empty((0, 1)))
    with pytest.raises(DimensionError):
        TimeSeries(obs=np.ones((3, 1)), covariates=np.ones((4, 1)))
    with pytest.raises(DimensionError):
        TimeSeries(obs=np.ones((3, 2)), labels=("only-one",))


def test_time_series_rejects_non_finite():
    with pytest.raises(DomainError):
        TimeSeries(obs=[1.0, np.nan])
    with pytest.raises(DomainError):
        TimeSeries(obs=[1.0, 2.0], covariates=[np.inf, 0.0])


def test_make_partition_even_split():
    part = make_partition(12, 3)
    assert part.m == 4
    assert part.ranges == ((0, 4), (4, 8), (8, 12))
    # K = 1 and K = T are both legal edges
    assert make_partition(5, 1).ranges == ((0, 5),)
    assert make_partition(3, 3).m == 1


def test_make_partition_rejects_bad_k():
    with pytest.raises(DivisibilityError):
        make_partition(10, 3)
    with pytest.raises(DomainError):
        make_partition(10, 0)
    with pytest.raises(DomainError):
        make_partition(10, 11)


def test_extract_segment_slices_obs_and_covariates():
    obs = np.arange(12, dtype=float).reshape(6, 2)
    cov = np.arange(6, dtype=float)[:, None]
    ts = TimeSeries(obs=obs, covariates=cov, labels=("a", "b"))
    part = make_partition(6, 3)
    seg = extract_segment(ts, part, 2)
    np.testing.assert_array_equal(seg.obs, obs[2:4])
    np.testing.assert_array_equal(seg.covariates, cov[2:4])
    assert seg.labels == ("a", "b")
    assert seg.T == 2


def test_extract_segment_concatenation_recovers_series():
    ts = TimeSeries(obs=np.random.default_rng(3).standard_normal((20, 1)))
    part = make_partition(20, 4)
    rebuilt = np.vstack([extract_segment(ts, part, k).obs for k in range(1, 5)])
    np.testing.assert_array_equal(rebuilt, ts.obs)


def test_extract_segment_bounds_checked():
    ts = TimeSeries(obs=np.ones((6, 1)))
    part = make_partition(6, 2)
    with pytest.raises(IndexError):
        extract_segment(ts, part, 0)
    with pytest.raises(IndexError):
        extract_segment(ts, part, 3)
    with pytest.raises(DimensionError):
        extract_segment(TimeSeries(obs=np.ones((4, 1))), part, 1)


def test_parameter_space_layout():
    space = ParameterSpace((
        Block("alpha", 1, REAL),
        Block("beta", 3, REAL),
        Block("sigma_sq", 1, POSITIVE),
    ))
    assert space.d == 5
    assert space.flat_names() == (
        "alpha", "beta[1]", "beta[2]", "beta[3]", "sigma_sq",
    )
    sl = space.slices()
    assert sl["beta"] == slice(1, 4)
    assert sl["sigma_sq"] == slice(4, 5)


def test_parameter_space_rejects_duplicates_and_empty():
    with pytest.raises(DomainError):
        ParameterSpace((Block("a", 1, REAL), Block("a", 2, REAL)))
    with pytest.raises(DomainError):
        ParameterSpace(())
    with pytest.raises(DomainError):
        Block("x", 0, REAL)


def test_parameter_space_contains():
    space = ParameterSpace((
        Block("mu", 1, REAL),
        Block("v", 1, POSITIVE),
        Block("r", 1, Interval(0.0, 1.0)),
    ))
    assert space.contains(np.array([-3.0, 0.5, 0.2]))
    assert not space.contains(np.array([0.0, 0.0, 0.2]))   # boundary of v
    assert not space.contains(np.array([0.0, 1.0, 1.0]))   # boundary of r
    assert not space.contains(np.array([np.inf, 1.0, 0.5]))
    with pytest.raises(DimensionError):
        space.contains(np.zeros(2))


def test_interval_validates_bounds():
    with pytest.raises(DomainError):
        Interval(1.0, 1.0)
    with pytest.raises(DomainError):
        Interval(0.0, np.inf)


def test_draw_set_validation():
    ds = DrawSet(draws=np.zeros((5, 2)), burn_in=3, acceptance_rate=0.4,
                 seed=7, target_label="full")
    assert ds.S == 5 and ds.d == 2
    with pytest.raises(ValueError):
        ds.draws[0, 0] = 1.0
    with pytest.raises(DimensionError):
        DrawSet(draws=np.zeros(5), burn_in=0, acceptance_rate=0.5,
                seed=0, target_label="x")
    with pytest.raises(DomainError):
        DrawSet(draws=np.zeros((5, 2)), burn_in=-1, acceptance_rate=0.5,
                seed=0, target_label="x")
    with pytest.raises(DomainError):
        DrawSet(draws=np.zeros((5, 2)), burn_in=0, acceptance_rate=1.5,
                seed=0, target_label="x")
    with pytest.raises(DomainError):
        DrawSet(draws=np.zeros((5, 2)), burn_in=0, acceptance_rate=0.5,
                seed=-1, target_label="x")


def test_linear_functional():
    f = LinearFunctional(a=[1.0, -2.0], b=0.5)
    assert f.a.shape == (2,)
    g = LinearFunctional.coordinate(1, 3)
    np.testing.assert_array_equal(g.a, [0.0, 1.0, 0.0])
    assert g.b == 0.0
    with pytest.raises(DomainError):
        LinearFunctional(a=[0.0, 0.0])
    with pytest.raises(DimensionError):
        LinearFunctional(a=np.zeros((2, 2)))
