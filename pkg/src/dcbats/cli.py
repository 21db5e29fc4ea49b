"""Command line front end.

Three subcommands: ``simulate`` writes a synthetic dataset, ``run``
executes a full comparison experiment from a JSON config, ``combine``
merges already-sampled draw CSVs. Experiments are configured by JSON
files, not flags; flags only choose paths, thread count, and overwrite
behavior, so a config file plus its seed reproduces a run exactly.

Exit codes: 0 success, 1 runtime or replicate failure, 2 config/usage
error (including refusal to overwrite existing output).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .combine import combine_marginals
from .core import DrawSet
from .errors import ConfigError, DcbatsError, SpaceMismatchError
from .harness import (
    COVARIATE_GENERATORS,
    ExperimentSpec,
    generate_covariates,
    run_experiment,
)
from .inference import SamplerConfig, derive_seed
from .models import build_model
from .priors import (
    GammaPrior,
    HalfNormalPrior,
    InverseGammaPrior,
    LogNormalPrior,
    NormalPrior,
    PriorSpec,
    UniformPrior,
)
from .serialize import (
    meta_path,
    read_draws,
    write_barycenter,
    write_draws,
    write_intervals,
    write_json,
    write_report_csv,
    write_report_json,
    write_series,
)


class _Usage(Exception):
    """Config or usage problem; maps to exit code 2."""


# ---------------------------------------------------------------- config

_PRIOR_FAMILIES = {
    "normal": (NormalPrior, ("mean", "var")),
    "half_normal": (HalfNormalPrior, ("var",)),
    "inverse_gamma": (InverseGammaPrior, ("shape", "scale")),
    "gamma": (GammaPrior, ("shape", "rate")),
    "log_normal": (LogNormalPrior, ("mu", "var")),
    "uniform": (UniformPrior, ("lo", "hi")),
}

_SAMPLER_KEYS = {"n_iterations", "burn_in", "initial_step_scale",
                 "adapt_start", "adapt_regularizer", "seed", "init"}


def _check_keys(cfg: dict, required: set, optional: set, where: str) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError(f"{where} must be a JSON object")
    keys = set(cfg)
    missing = required - keys
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _num(cfg: dict, key: str, where: str) -> float:
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


def _int(cfg: dict, key: str, where: str) -> int:
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}.{key} must be an integer, got {v!r}")
    return v


def _theta_array(value, where: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{where} must be an array of numbers") from None
    if arr.ndim != 1:
        raise ConfigError(f"{where} must be a flat array")
    return arr


def _load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise _Usage(f"config file not found: {path}")
    try:
        with path.open("r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise _Usage(f"{path}: invalid JSON: {exc}") from None


def _build_prior(space, cfg: dict) -> PriorSpec:
    if not isinstance(cfg, dict):
        raise ConfigError("prior must be a JSON object keyed by block name")
    families = {}
    for block_name, fam_cfg in cfg.items():
        where = f"prior.{block_name}"
        if not isinstance(fam_cfg, dict) or "family" not in fam_cfg:
            raise ConfigError(f"{where} must be an object with a 'family' key")
        fam_name = fam_cfg["family"]
        if fam_name not in _PRIOR_FAMILIES:
            raise ConfigError(
                f"{where}: unknown family '{fam_name}'; choose from "
                f"{sorted(_PRIOR_FAMILIES)}"
            )
        cls, fields = _PRIOR_FAMILIES[fam_name]
        _check_keys(fam_cfg, {"family", *fields}, set(), where)
        families[block_name] = cls(**{f: _num(fam_cfg, f, where)
                                      for f in fields})
    return PriorSpec.for_space(space, families)


def _build_sampler(cfg: dict) -> SamplerConfig:
    _check_keys(cfg, {"n_iterations"}, _SAMPLER_KEYS - {"n_iterations"},
                "sampler")
    kwargs = {"n_iterations": _int(cfg, "n_iterations", "sampler")}
    for key in ("burn_in", "adapt_start", "seed"):
        if key in cfg:
            kwargs[key] = _int(cfg, key, "sampler")
    for key in ("initial_step_scale", "adapt_regularizer"):
        if key in cfg:
            kwargs[key] = _num(cfg, key, "sampler")
    if "init" in cfg:
        if not isinstance(cfg["init"], list):
            raise ConfigError("sampler.init must be an array of numbers")
        kwargs["init"] = _theta_array(cfg["init"], "sampler.init")
    return SamplerConfig(**kwargs)


def _build_experiment(cfg: dict) -> ExperimentSpec:
    _check_keys(cfg, {"model", "prior", "T", "K_list", "n_replicates",
                      "sampler"},
                {"true_theta", "level", "covariate_generator"}, "config")
    model = build_model(cfg["model"])
    prior = _build_prior(model.parameter_space(), cfg["prior"])
    sampler = _build_sampler(cfg["sampler"])
    k_list = cfg["K_list"]
    if not isinstance(k_list, list) or not k_list:
        raise ConfigError("config.K_list must be a nonempty array of integers")
    ks = tuple(_int({"K": k}, "K", "config.K_list") for k in k_list)
    kwargs = {}
    if "true_theta" in cfg:
        kwargs["true_theta"] = _theta_array(cfg["true_theta"],
                                            "config.true_theta")
    if "level" in cfg:
        kwargs["level"] = _num(cfg, "level", "config")
    if "covariate_generator" in cfg:
        kwargs["covariate_generator"] = cfg["covariate_generator"]
    return ExperimentSpec(model=model, prior=prior, T=_int(cfg, "T", "config"),
                          K_list=ks,
                          n_replicates=_int(cfg, "n_replicates", "config"),
                          sampler=sampler, **kwargs)


# ---------------------------------------------------------------- output

def _prepare_dir(path, force: bool) -> Path:
    out = Path(path)
    if out.exists() and any(out.iterdir()):
        if not force:
            raise _Usage(
                f"output directory {out} exists and is not empty; pass "
                "--force to overwrite"
            )
    out.mkdir(parents=True, exist_ok=True)
    return out


def _prepare_file(path, force: bool) -> Path:
    out = Path(path)
    if out.exists() and not force:
        raise _Usage(f"output file {out} exists; pass --force to overwrite")
    out.parent.mkdir(parents=True, exist_ok=True)
    return out


def _as_usage(exc: DcbatsError) -> _Usage:
    return _Usage(f"{type(exc).__name__}: {exc}")


# ------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    try:
        _check_keys(cfg, {"model", "T", "seed"},
                    {"true_theta", "covariate_generator"}, "config")
        model = build_model(cfg["model"])
        T = _int(cfg, "T", "config")
        seed = _int(cfg, "seed", "config")
        generator = cfg.get("covariate_generator", "none")
        if generator not in COVARIATE_GENERATORS:
            raise ConfigError(f"unknown covariate_generator '{generator}'")
        if "true_theta" in cfg:
            theta = _theta_array(cfg["true_theta"], "config.true_theta")
        else:
            theta = model.default_true_parameters()
        out = _prepare_file(args.out, args.force)
        # seeds match replicate 1 of a run with the same master seed
        cov = generate_covariates(generator, T, model.cov_dim,
                                  derive_seed(seed, 1, 1))
        series = model.simulate(theta, T, covariates=cov,
                                seed=derive_seed(seed, 0, 1))
    except DcbatsError as exc:
        raise _as_usage(exc) from None
    write_series(out, series)
    write_json(meta_path(out), {
        "model": cfg["model"],
        "theta0": [float(v) for v in theta],
        "seed": seed,
    })
    print(f"wrote {series.T} x {series.obs_dim} series to {out}")
    return 0


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    try:
        spec = _build_experiment(cfg)
    except DcbatsError as exc:
        raise _as_usage(exc) from None
    out = _prepare_dir(args.out, args.force)
    write_json(out / "config.json", cfg)
    report = run_experiment(spec, n_workers=args.threads, artifact_dir=out)
    write_report_json(out / "report.json", report)
    write_report_csv(out / "report.csv", report)
    write_json(out / "timings.json", report.wall_times)
    for k_str, methods in report.coverage.items():
        dc = methods["dcbats"]["pooled"]
        fu = methods["full"]["pooled"]
        dc_s = "n/a" if dc is None else f"{dc:.3f}"
        fu_s = "n/a" if fu is None else f"{fu:.3f}"
        print(f"K={k_str}: pooled coverage dcbats={dc_s} full={fu_s}")
    if report.failures:
        for fail in report.failures:
            print(f"replicate {fail['replicate']} failed at {fail['stage']}: "
                  f"{fail['error']}", file=sys.stderr)
        print(f"{len(report.failures)} of {spec.n_replicates} replicates "
              "failed", file=sys.stderr)
        return 1
    print(f"report written to {out}")
    return 0


def cmd_combine(args) -> int:
    if not 0.0 < args.level < 1.0:
        raise _Usage(f"--level must be in (0, 1), got {args.level}")
    sets = []
    names = None
    try:
        for path in args.draws:
            p = Path(path)
            if not p.exists():
                raise _Usage(f"draw file not found: {p}")
            ds, header = read_draws(p)
            if names is None:
                names = header
            elif header != names:
                raise SpaceMismatchError(
                    f"{p}: parameter header {list(header)} does not match "
                    f"{list(names)}"
                )
            sets.append(ds)
        out = _prepare_dir(args.out, args.force)
        results, intervals = combine_marginals(sets, args.level)
    except DcbatsError as exc:
        raise _as_usage(exc) from None
    for name, res in zip(names, results):
        safe = name.replace("[", "_").replace("]", "")
        write_barycenter(out / f"barycenter_{safe}.csv", res)
    write_intervals(out / "intervals.csv", names, intervals)
    pseudo_cols = [res.pseudo_draws for res in results]
    if all(col is not None for col in pseudo_cols):
        bar = DrawSet(draws=np.column_stack(pseudo_cols), burn_in=0,
                      acceptance_rate=float(np.mean(
                          [ds.acceptance_rate for ds in sets])),
                      seed=0, target_label="barycenter")
        write_draws(out / "barycenter_draws.csv", bar, names)
    print(f"combined {len(sets)} draw sets over {len(names)} parameters "
          f"into {out}")
    return 0


# ----------------------------------------------------------------- main

def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcbats",
        description="Divide-and-conquer Bayesian inference for long time "
                    "series: simulate data, run experiments, combine draws.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate a dataset from a model")
    p_sim.add_argument("--config", required=True, help="JSON config path")
    p_sim.add_argument("--out", required=True, help="output CSV path")
    p_sim.add_argument("--force", action="store_true",
                       help="overwrite existing output")
    p_sim.set_defaults(func=cmd_simulate)

    p_run = sub.add_parser("run", help="run a comparison experiment")
    p_run.add_argument("--config", required=True, help="JSON config path")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads per cell (default: CPU count)")
    p_run.add_argument("--force", action="store_true",
                       help="overwrite existing output")
    p_run.set_defaults(func=cmd_run)

    p_comb = sub.add_parser("combine", help="combine draw CSVs")
    p_comb.add_argument("draws", nargs="+", help="DrawSet CSV paths")
    p_comb.add_argument("--out", required=True, help="output directory")
    p_comb.add_argument("--level", type=float, default=0.95,
                        help="credible level (default 0.95)")
    p_comb.add_argument("--force", action="store_true",
                        help="overwrite existing output")
    p_comb.set_defaults(func=cmd_combine)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (_Usage, ConfigError, SpaceMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DcbatsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
