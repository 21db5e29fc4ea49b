"""Synthetic-data experiments: divide-and-conquer vs full-posterior.

One experiment = n_replicates independent worlds. Each world simulates a
series at the true parameter, samples the full posterior once, samples
the K subsequence posteriors for every requested K, combines them, and
scores intervals/moments/W2 against the full chain and the truth.

Seeding is a fixed tree under the sampler seed: data uses (0, r),
covariates (1, r), and the chains of cell (r, K) use (2, r, K) as their
master, with replicate index r counted from 1. The full posterior is the
K=1 cell, so a report with 1 in K_list matches its full column exactly,
draw for draw.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .combine import combine_marginals, credible_interval, w2_distance_1d
from .core import DrawSet, make_partition
from .errors import (
    ConfigError,
    DomainError,
    EmptyInputError,
    SpaceMismatchError,
    ZeroVarianceError,
)
from .inference import SamplerConfig, derive_seed, run_dcbats, run_full_posterior
from .priors import PriorSpec
from .serialize import (  # ingest_csv re-exported: ingestion lives with the IO code
    ingest_csv,
    write_barycenter,
    write_draws,
)

__all__ = [
    "COVARIATE_GENERATORS", "ExperimentSpec", "ParamRecord",
    "ComparisonReport", "generate_covariates", "run_experiment",
    "moment_alignment", "ingest_csv",
]

COVARIATE_GENERATORS = ("iid-normal", "nonstationary-drift", "none")


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    """Everything needed to reproduce one experiment, seeds included."""

    model: object
    prior: PriorSpec
    T: int
    K_list: tuple
    n_replicates: int
    sampler: SamplerConfig
    true_theta: np.ndarray | None = None
    level: float = 0.95
    covariate_generator: str = "none"

    def __post_init__(self):
        space = self.model.parameter_space()
        if self.prior.space != space:
            raise SpaceMismatchError(
                "prior is declared on a different parameter space than the model"
            )
        ks = tuple(int(k) for k in self.K_list)
        if len(ks) == 0:
            raise ConfigError("K_list is empty")
        if len(set(ks)) != len(ks):
            raise ConfigError(f"K_list has duplicates: {ks}")
        for k in ks:
            make_partition(self.T, k)
        object.__setattr__(self, "K_list", ks)
        if self.n_replicates < 1:
            raise DomainError(
                f"n_replicates must be >= 1, got {self.n_replicates}"
            )
        if not 0.0 < self.level < 1.0:
            raise DomainError(f"level must be in (0, 1), got {self.level}")
        if self.true_theta is None:
            theta = self.model.default_true_parameters()
        else:
            theta = np.ascontiguousarray(self.true_theta, dtype=float)
        if theta.shape != (space.d,):
            raise DomainError(
                f"true_theta must have shape ({space.d},), got {theta.shape}"
            )
        if not space.contains(theta):
            raise DomainError("true_theta lies outside the parameter space")
        theta.setflags(write=False)
        object.__setattr__(self, "true_theta", theta)
        if self.covariate_generator not in COVARIATE_GENERATORS:
            raise ConfigError(
                f"unknown covariate_generator '{self.covariate_generator}'; "
                f"choose from {COVARIATE_GENERATORS}"
            )
        if self.model.cov_dim > 0 and self.covariate_generator == "none":
            raise ConfigError(
                f"model needs {self.model.cov_dim} covariate columns; pick a "
                "covariate_generator"
            )
        if self.model.cov_dim == 0 and self.covariate_generator != "none":
            raise ConfigError(
                "model takes no covariates; covariate_generator must be 'none'"
            )


@dataclass(frozen=True)
class ParamRecord:
    """Scores for one (replicate, K, parameter) cell, both methods."""

    replicate: int
    K: int
    param: str
    dcbats_lo: float
    dcbats_hi: float
    dcbats_mean: float
    dcbats_var: float
    dcbats_covered: bool
    full_lo: float
    full_hi: float
    full_mean: float
    full_var: float
    full_covered: bool
    w2: float


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    model_type: str
    param_names: tuple
    true_theta: tuple
    T: int
    K_list: tuple
    n_replicates: int
    level: float
    records: tuple
    coverage: dict
    failures: tuple
    wall_times: dict


def generate_covariates(generator: str, T: int, q: int,
                        seed: int) -> np.ndarray | None:
    """Synthetic covariate matrix, or None when q = 0 or generator is none.

    nonstationary-drift adds a linear trend sweeping -1 to +1 over the
    series, with slope amplitude growing in the column index, on top of
    unit noise. It exists to exercise segment-dependent covariates.
    """
    if generator not in COVARIATE_GENERATORS:
        raise ConfigError(f"unknown covariate_generator '{generator}'")
    if generator == "none" or q == 0:
        return None
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((T, q))
    if generator == "iid-normal":
        return noise
    trend = 2.0 * np.arange(1, T + 1) / T - 1.0
    amplitude = 1.0 + 0.5 * np.arange(q)
    return noise + trend[:, None] * amplitude[None, :]


def moment_alignment(dcbats_pseudo_draws, full_draws) -> dict:
    """Mean gap and variance ratio between combined and full draws."""
    pseudo = np.asarray(dcbats_pseudo_draws, dtype=float).ravel()
    full = np.asarray(full_draws, dtype=float).ravel()
    if pseudo.size == 0 or full.size == 0:
        raise EmptyInputError("empty draw vector")
    if pseudo.size < 2 or full.size < 2:
        raise DomainError("need at least two draws per vector")
    var_full = float(np.var(full, ddof=1))
    if var_full == 0.0:
        raise ZeroVarianceError("full draws are degenerate")
    return {
        "mean_gap": abs(float(np.mean(pseudo)) - float(np.mean(full))),
        "var_ratio": float(np.var(pseudo, ddof=1)) / var_full,
    }


def _full_column_stats(col_sorted: np.ndarray, level: float, truth: float):
    # same interval rule as the combined side, or the K=1 cell would
    # disagree with its own full column by one order statistic
    lo, hi = credible_interval(col_sorted, level)
    mean = float(np.mean(col_sorted))
    var = float(np.var(col_sorted, ddof=1))
    return lo, hi, mean, var, bool(lo <= truth <= hi)


def _file_name(param: str) -> str:
    return param.replace("[", "_").replace("]", "")


def _write_cell_artifacts(cell_dir: Path, sub_sets, results, names,
                          cell_seed: int, burn_in: int) -> None:
    cell_dir.mkdir(parents=True, exist_ok=True)
    for k, ds in enumerate(sub_sets, start=1):
        write_draws(cell_dir / f"subseq_{k:02d}.csv", ds, names)
    pseudo_cols = [res.pseudo_draws for res in results]
    for name, res in zip(names, results):
        write_barycenter(cell_dir / f"barycenter_{_file_name(name)}.csv", res)
    if all(col is not None for col in pseudo_cols):
        bar = DrawSet(
            draws=np.column_stack(pseudo_cols),
            burn_in=burn_in,
            acceptance_rate=float(np.mean([ds.acceptance_rate
                                           for ds in sub_sets])),
            seed=cell_seed,
            target_label="barycenter",
        )
        write_draws(cell_dir / "barycenter_draws.csv", bar, names)


def run_experiment(spec: ExperimentSpec, n_workers: int | None = None,
                   artifact_dir=None) -> ComparisonReport:
    """Run the full comparison study described by the spec.

    Replicates run sequentially; the chains inside each (replicate, K)
    cell run on a thread pool of n_workers. Results are deterministic in
    the spec alone, so the worker count never changes report content.
    A replicate that raises is recorded under failures and skipped.

    With artifact_dir set, every chain's draws and every barycenter are
    written under artifact_dir/replicate_RR/KNN/ as they are produced.
    """
    model, prior = spec.model, spec.prior
    space = model.parameter_space()
    names = space.flat_names()
    truth = spec.true_theta
    master = spec.sampler.seed
    ks_sorted = tuple(sorted(spec.K_list))

    records = []
    failures = []
    walls = {"simulate": 0.0, "sample_full": 0.0, "sample_dcbats": 0.0,
             "combine": 0.0}
    # coverage tallies: (K, method, param) -> [hits, trials]
    tally = {(K, m, p): [0, 0] for K in ks_sorted
             for m in ("dcbats", "full") for p in names}

    for r in range(1, spec.n_replicates + 1):
        stage = "simulate"
        try:
            t0 = time.perf_counter()
            cov = generate_covariates(spec.covariate_generator, spec.T,
                                      model.cov_dim, derive_seed(master, 1, r))
            series = model.simulate(truth, spec.T, covariates=cov,
                                    seed=derive_seed(master, 0, r))
            walls["simulate"] += time.perf_counter() - t0

            stage = "sample_full"
            t0 = time.perf_counter()
            full_cfg = replace(spec.sampler, seed=derive_seed(master, 2, r, 1))
            full_ds = run_full_posterior(model, prior, series, full_cfg)
            walls["sample_full"] += time.perf_counter() - t0
            full_sorted = [np.sort(full_ds.draws[:, j])
                           for j in range(space.d)]
            if artifact_dir is not None:
                rep_dir = Path(artifact_dir) / f"replicate_{r:02d}"
                rep_dir.mkdir(parents=True, exist_ok=True)
                write_draws(rep_dir / "full.csv", full_ds, names)

            for K in ks_sorted:
                stage = f"sample_dcbats K={K}"
                t0 = time.perf_counter()
                if K == 1:
                    # the K=1 cell is the full posterior by construction
                    sub_sets = [full_ds]
                else:
                    cfg = replace(spec.sampler,
                                  seed=derive_seed(master, 2, r, K))
                    sub_sets = run_dcbats(model, prior, series, K, cfg,
                                          n_workers=n_workers)
                walls["sample_dcbats"] += time.perf_counter() - t0

                stage = f"combine K={K}"
                t0 = time.perf_counter()
                results, intervals = combine_marginals(sub_sets, spec.level)
                if artifact_dir is not None:
                    _write_cell_artifacts(
                        Path(artifact_dir) / f"replicate_{r:02d}" / f"K{K:02d}",
                        sub_sets, results, names,
                        derive_seed(master, 2, r, K), spec.sampler.burn_in)
                for j, name in enumerate(names):
                    pseudo = results[j].pseudo_draws
                    d_lo, d_hi = intervals[j]
                    f_lo, f_hi, f_mean, f_var, f_cov = _full_column_stats(
                        full_sorted[j], spec.level, truth[j])
                    rec = ParamRecord(
                        replicate=r, K=K, param=name,
                        dcbats_lo=d_lo, dcbats_hi=d_hi,
                        dcbats_mean=float(np.mean(pseudo)),
                        dcbats_var=float(np.var(pseudo, ddof=1)),
                        dcbats_covered=bool(d_lo <= truth[j] <= d_hi),
                        full_lo=f_lo, full_hi=f_hi, full_mean=f_mean,
                        full_var=f_var, full_covered=f_cov,
                        w2=w2_distance_1d(pseudo, full_sorted[j]),
                    )
                    records.append(rec)
                    tally[(K, "dcbats", name)][0] += rec.dcbats_covered
                    tally[(K, "dcbats", name)][1] += 1
                    tally[(K, "full", name)][0] += rec.full_covered
                    tally[(K, "full", name)][1] += 1
                walls["combine"] += time.perf_counter() - t0
        except Exception as exc:  # record and move on, never drop silently
            failures.append({
                "replicate": r,
                "stage": stage,
                "error": f"{type(exc).__name__}: {exc}",
            })

    coverage = {}
    for K in ks_sorted:
        coverage[str(K)] = {}
        for method in ("dcbats", "full"):
            per_param = {}
            pooled_hits = 0
            pooled_trials = 0
            for name in names:
                hits, trials = tally[(K, method, name)]
                per_param[name] = hits / trials if trials else None
                pooled_hits += hits
                pooled_trials += trials
            coverage[str(K)][method] = {
                "per_param": per_param,
                "pooled": pooled_hits / pooled_trials if pooled_trials else None,
            }

    return ComparisonReport(
        model_type=type(model).__name__,
        param_names=names,
        true_theta=tuple(float(v) for v in truth),
        T=spec.T,
        K_list=spec.K_list,
        n_replicates=spec.n_replicates,
        level=spec.level,
        records=tuple(records),
        coverage=coverage,
        failures=tuple(failures),
        wall_times=walls,
    )
