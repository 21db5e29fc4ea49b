"""Posterior targets, adaptive random-walk Metropolis, chain orchestration.

The sampler walks the unconstrained scale with Gaussian proposals whose
covariance adapts to the chain history (scaled empirical covariance plus
a regularizing ridge). One gradient-free sampler serves every model.

Subsequence chains are embarrassingly parallel; ``run_dcbats`` fans them
out over a thread pool (model kernels release the GIL) and returns them
ordered by segment index regardless of completion order. All randomness
descends from the config seed, so results are independent of the worker
count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import DrawSet, ParameterSpace, TimeSeries, extract_segment, make_partition
from .errors import (
    DcbatsError,
    DimensionError,
    DomainError,
    InitializationError,
    NonFiniteError,
    NonPositiveVarianceError,
    SpaceMismatchError,
)
from .priors import (
    PriorSpec,
    constrain_matrix,
    from_unconstrained,
    prior_location,
    prior_log_density,
    to_unconstrained,
)


@dataclass(frozen=True, eq=False)
class PosteriorTarget:
    """Unnormalized posterior: likelihood^power x prior.

    power = 1 on the whole series is the full posterior; power = K on a
    segment is the powered subsequence posterior that rescales segment
    information to full-data size.
    """

    model: object
    prior: PriorSpec
    series: TimeSeries
    power: float = 1.0

    def __post_init__(self):
        if not self.power >= 1.0:
            raise DomainError(f"power must be >= 1, got {self.power}")
        if self.series.T < 1:
            raise DomainError("series is empty")


@dataclass(frozen=True, eq=False)
class SamplerConfig:
    """Chain length, adaptation, and seeding knobs.

    burn_in defaults to half of n_iterations. adapt_start defaults to
    max(100, 10 d), resolved when sampling starts (d is not known here);
    an explicit value must be at least 2 d.
    """

    n_iterations: int
    burn_in: int | None = None
    initial_step_scale: float = 0.1
    adapt_start: int | None = None
    adapt_regularizer: float = 1e-6
    seed: int = 0
    init: np.ndarray | None = None

    def __post_init__(self):
        if self.n_iterations < 2:
            raise DomainError(f"n_iterations must be >= 2, got {self.n_iterations}")
        burn = self.n_iterations // 2 if self.burn_in is None else self.burn_in
        if not 1 <= burn < self.n_iterations:
            raise DomainError(
                f"burn_in must be in 1..{self.n_iterations - 1}, got {burn}"
            )
        object.__setattr__(self, "burn_in", int(burn))
        if not self.initial_step_scale > 0.0:
            raise DomainError("initial_step_scale must be > 0")
        if not self.adapt_regularizer > 0.0:
            raise DomainError("adapt_regularizer must be > 0")
        if self.adapt_start is not None and self.adapt_start < 1:
            raise DomainError("adapt_start must be >= 1")
        if self.seed < 0:
            raise DomainError("seed must be a nonnegative 64-bit integer")
        if self.init is not None:
            init = np.ascontiguousarray(self.init, dtype=float)
            if init.ndim != 1:
                raise DimensionError("init must be a flat vector")
            init.setflags(write=False)
            object.__setattr__(self, "init", init)


def derive_seed(master_seed: int, *path: int) -> int:
    """Stable 64-bit child seed from a master seed and an integer path."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])


def chain_seed(master_seed: int, k: int) -> int:
    """Per-chain seed for subsequence k (1-based)."""
    return derive_seed(master_seed, k)


def target_log_density(target: PosteriorTarget, eta: np.ndarray,
                       space: ParameterSpace) -> float:
    """Log density of the powered posterior on the unconstrained scale.

    power * log_likelihood + log prior + log |Jacobian|. Points whose
    constrained image leaves the support (transform under/overflow) and
    points where the likelihood loses variance positivity return -inf so
    the sampler simply rejects; NaN is passed through for the sampler to
    flag as a bug.
    """
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (space.d,):
        raise DimensionError(f"expected shape ({space.d},), got {eta.shape}")
    theta, log_jac = from_unconstrained(space, eta)
    if not space.contains(theta):
        # exp/logistic saturation pushed theta onto or past a boundary
        return -math.inf
    lp = prior_log_density(target.prior, theta)
    if lp == -math.inf:
        return -math.inf
    try:
        ll = target.model.log_likelihood(theta, target.series)
    except NonPositiveVarianceError:
        return -math.inf
    return target.power * ll + lp + log_jac


def _resolve_adapt_start(config: SamplerConfig, d: int) -> int:
    if config.adapt_start is None:
        return max(100, 10 * d)
    if config.adapt_start < 2 * d:
        raise DomainError(
            f"adapt_start must be >= 2*d = {2 * d}, got {config.adapt_start}"
        )
    return config.adapt_start


def _rwm_chain(log_density, d: int, config: SamplerConfig, init_eta: np.ndarray,
               rng: np.random.Generator, keep_proposals: bool = False):
    """Metropolis core. Returns (states, acceptance_rate[, proposals, accepts]).

    Proposal covariance is initial_step_scale^2 I until adapt_start, then
    (2.38^2/d) (running covariance + regularizer I), with the running
    moments updated from every chain state via the Welford recursion.
    """
    n = config.n_iterations
    adapt_start = _resolve_adapt_start(config, d)
    sd_scale = 2.38 ** 2 / d
    eps = config.adapt_regularizer

    current = init_eta.copy()
    current_lp = log_density(current)
    states = np.empty((n, d))
    proposals = np.empty((n, d)) if keep_proposals else None
    accepts = np.empty(n, dtype=bool) if keep_proposals else None

    mean = current.copy()
    m2 = np.zeros((d, d))
    n_seen = 1
    acc_post = 0
    n_post = 0
    acc_all = 0
    ridge = eps * np.eye(d)

    for i in range(n):
        z = rng.standard_normal(d)
        u = rng.random()
        if i >= adapt_start:
            cov = sd_scale * (m2 / (n_seen - 1) + ridge)
            chol = np.linalg.cholesky(cov)
            prop = current + chol @ z
        else:
            prop = current + config.initial_step_scale * z
        lp = log_density(prop)
        if math.isnan(lp):
            raise NonFiniteError("target returned NaN at a proposal")
        accepted = math.log(u) < lp - current_lp if u > 0.0 else True
        if accepted:
            current = prop
            current_lp = lp
        acc_all += accepted
        if i >= adapt_start:
            n_post += 1
            acc_post += accepted
        if keep_proposals:
            proposals[i] = prop
            accepts[i] = accepted
        states[i] = current
        n_seen += 1
        delta = current - mean
        mean = mean + delta / n_seen
        m2 = m2 + np.outer(delta, current - mean)

    rate = acc_post / n_post if n_post > 0 else acc_all / n
    if keep_proposals:
        return states, rate, proposals, accepts
    return states, rate, None, None


def _initial_point(target: PosteriorTarget, space: ParameterSpace,
                   config: SamplerConfig, rng: np.random.Generator,
                   log_density) -> np.ndarray:
    if config.init is not None:
        eta0 = np.asarray(config.init, dtype=float)
        if eta0.shape != (space.d,):
            raise DimensionError(
                f"init must have shape ({space.d},), got {eta0.shape}"
            )
    else:
        eta0 = to_unconstrained(space, prior_location(target.prior))
    lp = log_density(eta0)
    if math.isnan(lp):
        raise NonFiniteError("target returned NaN at the initial point")
    if lp > -math.inf:
        return eta0
    # widen the jitter every 10 failures so a bad default cannot strand us
    for attempt in range(100):
        scale = config.initial_step_scale * 2.0 ** (attempt // 10)
        candidate = eta0 + scale * rng.standard_normal(space.d)
        lp = log_density(candidate)
        if math.isnan(lp):
            raise NonFiniteError("target returned NaN at the initial point")
        if lp > -math.inf:
            return candidate
    raise InitializationError(
        "no finite-density start found after 100 jittered attempts"
    )


def adaptive_rwm_sample(target: PosteriorTarget, space: ParameterSpace,
                        config: SamplerConfig, label: str = "target") -> DrawSet:
    """Sample the target and return post-burn-in constrained draws.

    Deterministic given config.seed; acceptance_rate covers the
    post-adaptation window (the whole run if adaptation never starts).
    """
    def log_density(eta):
        return target_log_density(target, eta, space)

    rng = np.random.default_rng(config.seed)
    init_eta = _initial_point(target, space, config, rng, log_density)
    states, rate, _, _ = _rwm_chain(log_density, space.d, config, init_eta, rng)
    kept = states[config.burn_in:]
    draws = constrain_matrix(space, kept)
    return DrawSet(draws=draws, burn_in=config.burn_in, acceptance_rate=rate,
                   seed=config.seed, target_label=label)


def _check_prior_space(model, prior: PriorSpec):
    if prior.space != model.parameter_space():
        raise SpaceMismatchError(
            "prior is declared on a different parameter space than the model"
        )


def run_full_posterior(model, prior: PriorSpec, series: TimeSeries,
                       config: SamplerConfig) -> DrawSet:
    """Sample the full posterior (power 1 on the whole series).

    The chain seed is derived from config.seed exactly as run_dcbats
    derives it for segment 1, so a K=1 divide-and-conquer run and a full
    run with the same config produce identical DrawSets.
    """
    _check_prior_space(model, prior)
    target = PosteriorTarget(model=model, prior=prior, series=series, power=1.0)
    cfg = replace(config, seed=chain_seed(config.seed, 1))
    return adaptive_rwm_sample(target, model.parameter_space(), cfg, label="full")


def run_dcbats(model, prior: PriorSpec, series: TimeSeries, K: int,
               config: SamplerConfig, n_workers: int | None = None) -> list[DrawSet]:
    """Sample all K powered subsequence posteriors, ordered by segment.

    Each segment k gets power K and an independent chain seeded with
    chain_seed(config.seed, k). Chains run on a thread pool of n_workers
    (defaults to CPU count, capped at K); output order and content do not
    depend on the worker count. With K=1 the single target coincides with
    the full posterior and is labeled "full".
    """
    _check_prior_space(model, prior)
    partition = make_partition(series.T, K)
    space = model.parameter_space()

    def one_chain(k: int) -> DrawSet:
        segment = extract_segment(series, partition, k)
        target = PosteriorTarget(model=model, prior=prior, series=segment,
                                 power=float(K))
        cfg = replace(config, seed=chain_seed(config.seed, k))
        label = "full" if K == 1 else f"subseq {k}/{K}"
        try:
            return adaptive_rwm_sample(target, space, cfg, label=label)
        except DcbatsError as exc:
            raise type(exc)(f"subsequence {k}/{K}: {exc}") from exc

    if n_workers is None:
        n_workers = min(K, os.cpu_count() or 1)
    if n_workers <= 1 or K == 1:
        return [one_chain(k) for k in range(1, K + 1)]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        futures = [pool.submit(one_chain, k) for k in range(1, K + 1)]
        return [f.result() for f in futures]


def effective_sample_size(x) -> float:
    """ESS of a scalar chain via the initial monotone positive sequence.

    Autocovariances come from one FFT pass; consecutive-lag pair sums are
    accumulated while positive and monotonically decreasing. Result is
    clipped to [1, len(x)].
    """
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n < 2:
        return float(n)
    xc = x - x.mean()
    var0 = float(xc @ xc) / n
    # constant to machine precision: mean subtraction leaves O(eps|x|)
    # residue, so the guard must be relative, not an exact zero test
    scale = max(1.0, float(np.max(np.abs(x))))
    if var0 <= (1e-12 * scale) ** 2:
        return float(n)
    nfft = 1 << int(2 * n - 1).bit_length()
    f = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n] / n
    rho = acov / acov[0]
    tau = -1.0
    prev = math.inf
    m = 0
    while 2 * m + 1 < n:
        gamma = rho[2 * m] + rho[2 * m + 1]
        if gamma <= 0.0:
            break
        gamma = min(gamma, prev)
        tau += 2.0 * gamma
        prev = gamma
        m += 1
    tau = max(tau, 1.0 / n)
    return float(min(max(n / tau, 1.0), n))
