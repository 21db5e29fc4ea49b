"""Divide-and-conquer Bayesian inference for long time series.

Split a series into K contiguous segments, sample each segment's powered
posterior independently, and merge the per-parameter marginals by
quantile averaging (the closed-form 1-D Wasserstein-2 barycenter).
"""
from .combine import (
    BarycenterResult,
    barycenter_1d,
    combine_marginals,
    coverage_rate,
    credible_interval,
    empirical_quantile,
    functional_draws,
    w2_distance_1d,
)
from .core import (
    Block,
    DrawSet,
    Interval,
    LinearFunctional,
    ParameterSpace,
    Partition,
    Positive,
    Real,
    TimeSeries,
    extract_segment,
    make_partition,
)
from .errors import DcbatsError
from .harness import (
    ComparisonReport,
    ExperimentSpec,
    generate_covariates,
    ingest_csv,
    moment_alignment,
    run_experiment,
)
from .inference import (
    PosteriorTarget,
    SamplerConfig,
    adaptive_rwm_sample,
    chain_seed,
    derive_seed,
    effective_sample_size,
    run_dcbats,
    run_full_posterior,
    target_log_density,
)
from .models import (
    ArErrorRegression,
    BinaryAr,
    CccBivariateGarch,
    FixedParams,
    GarchX,
    LinearGaussianHmm,
    build_model,
)
from .priors import (
    GammaPrior,
    HalfNormalPrior,
    InverseGammaPrior,
    LogNormalPrior,
    NormalPrior,
    PriorSpec,
    UniformPrior,
    from_unconstrained,
    to_unconstrained,
)

__version__ = "0.1.0"
