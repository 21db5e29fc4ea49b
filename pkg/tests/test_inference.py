import math

import numpy as np
import pytest

from dcbats.core import Block, ParameterSpace, POSITIVE, REAL, TimeSeries
from dcbats.errors import (
    DimensionError,
    DomainError,
    InitializationError,
    NonFiniteError,
    NonPositiveVarianceError,
    SpaceMismatchError,
)
from dcbats.inference import (
    PosteriorTarget,
    SamplerConfig,
    _resolve_adapt_start,
    _rwm_chain,
    adaptive_rwm_sample,
    chain_seed,
    derive_seed,
    effective_sample_size,
    run_dcbats,
    run_full_posterior,
    target_log_density,
)
from dcbats.models import ArErrorRegression, FixedParams
from dcbats.priors import (
    HalfNormalPrior,
    InverseGammaPrior,
    NormalPrior,
    PriorSpec,
)


def iid_normal_model():
    """x_t ~ N(alpha, 1) iid; a one-parameter conjugate playground."""
    return FixedParams(ArErrorRegression(p_cov=0),
                       {"phi": [0.0, 0.0], "sigma_sq": 1.0})


def normal_prior_for(model, var=100.0):
    return PriorSpec.for_space(model.parameter_space(),
                               {"alpha": NormalPrior(0.0, var)})


# --- seeding ---------------------------------------------------------------


def test_derive_seed_matches_seed_sequence():
    # contract: child seed = first uint64 of SeedSequence(master, spawn_key=path)
    want = int(np.random.SeedSequence(7, spawn_key=(2, 5, 1))
               .generate_state(1, np.uint64)[0])
    assert derive_seed(7, 2, 5, 1) == want
    assert chain_seed(7, 3) == derive_seed(7, 3)


def test_derive_seed_paths_are_distinct():
    seen = {derive_seed(0, *path) for path in
            [(1,), (2,), (1, 1), (1, 2), (2, 1), (0,), (0, 0)]}
    assert len(seen) == 7
    assert derive_seed(0, 1) != derive_seed(1, 1)


def test_derive_seed_is_stable():
    assert derive_seed(5, 1) == derive_seed(5, 1)
    assert all(0 <= derive_seed(s, 1) < 2 ** 64 for s in (0, 1, 2 ** 63))


# --- config validation -------------------------------------------------------


def test_sampler_config_defaults():
    cfg = SamplerConfig(n_iterations=1000)
    assert cfg.burn_in == 500
    assert cfg.adapt_start is None
    assert cfg.seed == 0


def test_sampler_config_validation():
    with pytest.raises(DomainError):
        SamplerConfig(n_iterations=1)
    with pytest.raises(DomainError):
        SamplerConfig(n_iterations=10, burn_in=0)
    with pytest.raises(DomainError):
        SamplerConfig(n_iterations=10, burn_in=10)
    with pytest.raises(DomainError):
        SamplerConfig(n_iterations=10, initial_step_scale=0.0)
    with pytest.raises(DomainError):
        SamplerConfig(n_iterations=10, adapt_regularizer=0.0)
    with pytest.raises(DomainError):
        SamplerConfig(n_iterations=10, adapt_start=0)
    with pytest.raises(DomainError):
        SamplerConfig(n_iterations=10, seed=-1)
    with pytest.raises(DimensionError):
        SamplerConfig(n_iterations=10, init=np.zeros((2, 2)))


def test_adapt_start_resolution():
    assert _resolve_adapt_start(SamplerConfig(n_iterations=10), d=3) == 100
    assert _resolve_adapt_start(SamplerConfig(n_iterations=10), d=20) == 200
    cfg = SamplerConfig(n_iterations=10, adapt_start=50)
    assert _resolve_adapt_start(cfg, d=5) == 50
    with pytest.raises(DomainError):
        _resolve_adapt_start(cfg, d=30)  # explicit start below 2 d


# --- target log density ------------------------------------------------------


def test_target_log_density_assembles_terms():
    model = ArErrorRegression(p_cov=0)
    space = model.parameter_space()
    prior = PriorSpec.for_space(space, {
        "alpha": NormalPrior(0.0, 4.0),
        "phi": NormalPrior(0.0, 1.0),
        "sigma_sq": InverseGammaPrior(3.0, 10.0),
    })
    series = model.simulate(model.default_true_parameters(), 12, seed=1)
    eta = np.array([0.3, 0.1, -0.2, math.log(1.5)])
    theta = np.array([0.3, 0.1, -0.2, 1.5])

    from dcbats.priors import prior_log_density
    want_ll = model.log_likelihood(theta, series)
    want_lp = prior_log_density(prior, theta)
    log_jac = math.log(1.5)  # d(exp)/d(eta) at the one positive coordinate

    target = PosteriorTarget(model=model, prior=prior, series=series)
    got = target_log_density(target, eta, space)
    assert got == pytest.approx(want_ll + want_lp + log_jac, rel=1e-12)


def test_target_power_scales_only_likelihood():
    model = iid_normal_model()
    space = model.parameter_space()
    prior = normal_prior_for(model)
    series = model.simulate(np.array([0.5]), 20, seed=2)
    eta = np.array([0.4])
    base = PosteriorTarget(model=model, prior=prior, series=series, power=1.0)
    powered = PosteriorTarget(model=model, prior=prior, series=series, power=7.0)
    ll = model.log_likelihood(np.array([0.4]), series)
    gap = (target_log_density(powered, eta, space)
           - target_log_density(base, eta, space))
    assert gap == pytest.approx(6.0 * ll, rel=1e-13)


def test_target_is_minus_inf_outside_support():
    model = ArErrorRegression(p_cov=0)
    space = model.parameter_space()
    prior = PriorSpec.for_space(space, {
        "alpha": NormalPrior(0.0, 1.0),
        "phi": NormalPrior(0.0, 1.0),
        "sigma_sq": InverseGammaPrior(3.0, 10.0),
    })
    series = model.simulate(model.default_true_parameters(), 5, seed=0)
    target = PosteriorTarget(model=model, prior=prior, series=series)
    # exp(-800) underflows to zero, leaving sigma_sq on the boundary
    got = target_log_density(target, np.array([0.0, 0.0, 0.0, -800.0]), space)
    assert got == -math.inf
    with pytest.raises(DimensionError):
        target_log_density(target, np.zeros(3), space)


class _VarianceLossModel:
    def log_likelihood(self, theta, series):
        raise NonPositiveVarianceError("synthetic variance loss")


def test_target_treats_variance_loss_as_reject():
    space = ParameterSpace((Block("a", 1, REAL),))
    prior = PriorSpec.for_space(space, {"a": NormalPrior(0.0, 1.0)})
    series = TimeSeries(obs=np.ones(3))
    target = PosteriorTarget(model=_VarianceLossModel(), prior=prior,
                             series=series)
    assert target_log_density(target, np.zeros(1), space) == -math.inf


def test_posterior_target_validation():
    model = iid_normal_model()
    series = model.simulate(np.array([0.0]), 4, seed=0)
    prior = normal_prior_for(model)
    with pytest.raises(DomainError):
        PosteriorTarget(model=model, prior=prior, series=series, power=0.5)


# --- the chain ---------------------------------------------------------------


def test_chain_rng_call_order_is_frozen():
    """Each iteration consumes exactly one normal vector then one uniform.

    The first pre-adaptation proposal must therefore equal
    init + scale * z1 with z1 from a fresh generator; anything else means
    the draw order changed and seeds stop being comparable across runs.
    """
    def flat(eta):
        return 0.0  # accept everything: log(u) < 0 for u in (0,1)

    d = 3
    cfg = SamplerConfig(n_iterations=4, burn_in=1, seed=123,
                        initial_step_scale=0.5)
    init = np.zeros(d)
    states, rate, props, accepts = _rwm_chain(flat, d, cfg, init,
                                              np.random.default_rng(123),
                                              keep_proposals=True)
    ref = np.random.default_rng(123)
    expect = []
    current = init.copy()
    for _ in range(4):
        z = ref.standard_normal(d)
        ref.random()  # the accept uniform follows immediately
        current = current + 0.5 * z
        expect.append(current.copy())
    np.testing.assert_array_equal(props, np.array(expect))
    np.testing.assert_array_equal(states, np.array(expect))
    assert rate == 1.0
    assert accepts.all()


def test_acceptance_rate_windows():
    rng = np.random.default_rng(0)

    def std_normal(eta):
        return -0.5 * float(eta @ eta)

    d = 2
    # adaptation never starts: the whole-run rate is reported
    cfg = SamplerConfig(n_iterations=200, burn_in=10, seed=5, adapt_start=200)
    states, rate, props, accepts = _rwm_chain(std_normal, d, cfg, np.zeros(d),
                                              np.random.default_rng(5),
                                              keep_proposals=True)
    assert rate == pytest.approx(accepts.mean())
    # adaptation from 100: the reported window is the tail only
    cfg2 = SamplerConfig(n_iterations=200, burn_in=10, seed=5, adapt_start=100)
    _, rate2, _, accepts2 = _rwm_chain(std_normal, d, cfg2, np.zeros(d),
                                       np.random.default_rng(5),
                                       keep_proposals=True)
    assert rate2 == pytest.approx(accepts2[100:].mean())


def test_chain_raises_on_nan_target():
    def bad(eta):
        return math.nan

    cfg = SamplerConfig(n_iterations=10, burn_in=1, seed=0)
    with pytest.raises(NonFiniteError):
        _rwm_chain(bad, 1, cfg, np.zeros(1), np.random.default_rng(0))


def test_sampling_is_deterministic():
    model = iid_normal_model()
    prior = normal_prior_for(model)
    series = model.simulate(np.array([0.3]), 50, seed=11)
    cfg = SamplerConfig(n_iterations=400, seed=9)
    a = run_full_posterior(model, prior, series, cfg)
    b = run_full_posterior(model, prior, series, cfg)
    np.testing.assert_array_equal(a.draws, b.draws)
    assert a.acceptance_rate == b.acceptance_rate
    assert a.seed == b.seed
    assert a.target_label == "full"
    assert a.S == 400 - cfg.burn_in
    c = run_full_posterior(model, prior, series,
                           SamplerConfig(n_iterations=400, seed=10))
    assert not np.array_equal(a.draws, c.draws)


def test_draws_respect_supports():
    model = ArErrorRegression(p_cov=0)
    space = model.parameter_space()
    prior = PriorSpec.for_space(space, {
        "alpha": NormalPrior(0.0, 100.0),
        "phi": NormalPrior(0.0, 100.0),
        "sigma_sq": InverseGammaPrior(3.0, 10.0),
    })
    series = model.simulate(model.default_true_parameters(), 60, seed=21)
    ds = run_full_posterior(model, prior, series,
                            SamplerConfig(n_iterations=600, seed=3))
    assert np.all(ds.draws[:, -1] > 0.0)  # sigma_sq column
    for row in ds.draws[::97]:
        assert space.contains(row)


def test_conjugate_posterior_moments():
    """iid N(alpha, 1) with a N(0, s0) prior has a closed-form posterior."""
    model = iid_normal_model()
    prior = normal_prior_for(model, var=25.0)
    truth = np.array([1.2])
    series = model.simulate(truth, 100, seed=31)
    x_bar = float(series.obs.mean())
    post_var = 1.0 / (100.0 + 1.0 / 25.0)
    post_mean = post_var * 100.0 * x_bar

    cfg = SamplerConfig(n_iterations=20000, seed=17)
    ds = run_full_posterior(model, prior, series, cfg)
    draws = ds.draws[:, 0]
    ess = effective_sample_size(draws)
    se = math.sqrt(post_var / ess)
    assert abs(draws.mean() - post_mean) < 4.0 * se
    assert draws.var(ddof=1) == pytest.approx(post_var, rel=0.15)
    assert 0.05 < ds.acceptance_rate < 0.7


def test_initial_point_jitters_out_of_flat_region():
    class HalfLine:
        def log_likelihood(self, theta, series):
            return 0.0 if theta[0] > 0.2 else -math.inf

    space = ParameterSpace((Block("a", 1, REAL),))
    prior = PriorSpec.for_space(space, {"a": NormalPrior(0.0, 100.0)})
    series = TimeSeries(obs=np.zeros(2))
    target = PosteriorTarget(model=HalfLine(), prior=prior, series=series)
    # prior location 0.0 is flat; the jitter must find theta > 0.2
    cfg = SamplerConfig(n_iterations=50, seed=2, initial_step_scale=0.3)
    ds = adaptive_rwm_sample(target, space, cfg, label="halfline")
    assert np.all(ds.draws[:, 0] > 0.2)
    assert ds.target_label == "halfline"


def test_initialization_gives_up_eventually():
    class NoWhere:
        def log_likelihood(self, theta, series):
            return -math.inf

    space = ParameterSpace((Block("a", 1, REAL),))
    prior = PriorSpec.for_space(space, {"a": NormalPrior(0.0, 1.0)})
    series = TimeSeries(obs=np.zeros(2))
    target = PosteriorTarget(model=NoWhere(), prior=prior, series=series)
    with pytest.raises(InitializationError):
        adaptive_rwm_sample(target, space, SamplerConfig(n_iterations=10, seed=0))


def test_explicit_init_is_validated():
    model = iid_normal_model()
    prior = normal_prior_for(model)
    series = model.simulate(np.array([0.0]), 10, seed=0)
    cfg = SamplerConfig(n_iterations=10, init=np.zeros(3))
    with pytest.raises(DimensionError):
        run_full_posterior(model, prior, series, cfg)


# --- orchestration -----------------------------------------------------------


@pytest.fixture(scope="module")
def small_problem():
    model = ArErrorRegression(p_cov=1)
    space = model.parameter_space()
    prior = PriorSpec.for_space(space, {
        "alpha": NormalPrior(0.0, 100.0),
        "beta": NormalPrior(0.0, 100.0),
        "phi": NormalPrior(0.0, 100.0),
        "sigma_sq": InverseGammaPrior(3.0, 10.0),
    })
    rng = np.random.default_rng(1)
    cov = rng.standard_normal((120, 1))
    series = model.simulate(model.default_true_parameters(), 120,
                            covariates=cov, seed=14)
    return model, prior, series


def test_run_dcbats_chain_identity(small_problem):
    model, prior, series = small_problem
    cfg = SamplerConfig(n_iterations=300, seed=77)
    sets = run_dcbats(model, prior, series, 4, cfg)
    assert len(sets) == 4
    for k, ds in enumerate(sets, start=1):
        assert ds.target_label == f"subseq {k}/4"
        assert ds.seed == chain_seed(77, k)
        assert ds.S == 300 - cfg.burn_in
    # distinct seeds produce distinct chains
    assert not np.array_equal(sets[0].draws, sets[1].draws)


def test_run_dcbats_worker_count_invariance(small_problem):
    model, prior, series = small_problem
    cfg = SamplerConfig(n_iterations=300, seed=42)
    serial = run_dcbats(model, prior, series, 4, cfg, n_workers=1)
    threaded = run_dcbats(model, prior, series, 4, cfg, n_workers=4)
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a.draws, b.draws)
        assert a.acceptance_rate == b.acceptance_rate
        assert a.target_label == b.target_label


def test_run_dcbats_k1_equals_full(small_problem):
    model, prior, series = small_problem
    cfg = SamplerConfig(n_iterations=300, seed=8)
    [solo] = run_dcbats(model, prior, series, 1, cfg)
    full = run_full_posterior(model, prior, series, cfg)
    np.testing.assert_array_equal(solo.draws, full.draws)
    assert solo.target_label == full.target_label == "full"
    assert solo.seed == full.seed


def test_run_dcbats_validates_partition(small_problem):
    model, prior, series = small_problem
    cfg = SamplerConfig(n_iterations=10, seed=0)
    from dcbats.errors import DivisibilityError
    with pytest.raises(DivisibilityError):
        run_dcbats(model, prior, series, 7, cfg)  # 7 does not divide 120


def test_run_rejects_foreign_prior(small_problem):
    model, _, series = small_problem
    other = iid_normal_model()
    foreign = normal_prior_for(other)
    cfg = SamplerConfig(n_iterations=10, seed=0)
    with pytest.raises(SpaceMismatchError):
        run_full_posterior(model, foreign, series, cfg)
    with pytest.raises(SpaceMismatchError):
        run_dcbats(model, foreign, series, 2, cfg)


def test_subsequence_errors_name_the_segment(small_problem):
    model, prior, series = small_problem
    bad = SamplerConfig(n_iterations=300, seed=0, init=np.zeros(9))  # d is 5
    with pytest.raises(DimensionError, match=r"subsequence \d/3"):
        run_dcbats(model, prior, series, 3, bad)


# --- effective sample size ----------------------------------------------------


def test_ess_iid_draws():
    x = np.random.default_rng(3).standard_normal(4000)
    ess = effective_sample_size(x)
    assert 2000 < ess <= 4000


def test_ess_correlated_chain():
    rng = np.random.default_rng(4)
    x = np.empty(4000)
    x[0] = 0.0
    for t in range(1, 4000):
        x[t] = 0.99 * x[t - 1] + rng.standard_normal()
    ess = effective_sample_size(x)
    assert ess < 400  # an AR(0.99) chain carries ~1/199 the information
    assert ess >= 1.0


def test_ess_degenerate_inputs():
    assert effective_sample_size(np.array([1.0])) == 1.0
    assert effective_sample_size(np.array([])) == 0.0
    assert effective_sample_size(np.full(50, 3.14)) == 50.0
