"""Shared model interface: validation, likelihood assembly, simulation.

A model exposes log_likelihood / conditional_log_density / simulate /
default_true_parameters over a flat parameter vector laid out by its
ParameterSpace. Subclasses implement ``_terms`` (per-observation
log-density terms from validated inputs) and ``_simulate`` (observation
matrix from pre-validated covariates and an owned RNG).

Applying the likelihood to a segment extracted from a longer series
implements the pseudo-likelihood convention: the recursion history is
exactly the rows of the segment, as if it started at time one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ParameterSpace, TimeSeries
from ..errors import CovariateError, DimensionError, DomainError


class TimeSeriesModel:
    """Base class; use the concrete model dataclasses."""

    obs_dim: int = 1

    @property
    def cov_dim(self) -> int:
        return 0

    def parameter_space(self) -> ParameterSpace:
        return self._space

    def default_true_parameters(self) -> np.ndarray:
        raise NotImplementedError

    def _terms(self, theta: np.ndarray, series: TimeSeries) -> np.ndarray:
        raise NotImplementedError

    def _simulate(self, theta: np.ndarray, T: int,
                  covariates: np.ndarray | None,
                  rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def _conditional_terms(self, theta: np.ndarray,
                           series: TimeSeries) -> np.ndarray:
        # hook so a model can cache repeated per-t evaluations
        return self._terms(theta, series)

    # -- public surface ----------------------------------------------------

    def log_likelihood(self, theta, series: TimeSeries) -> float:
        """Sum over t of log p_theta(x_t | x_1..x_{t-1}) for this series."""
        theta = self._validate_theta(theta)
        self._validate_series(series)
        return float(np.sum(self._terms(theta, series)))

    def conditional_log_density(self, theta, series: TimeSeries, t: int) -> float:
        """log p_theta(x_t | x_1..x_{t-1}), t is 1-based."""
        theta = self._validate_theta(theta)
        self._validate_series(series)
        if not 1 <= t <= series.T:
            raise IndexError(f"t={t} outside 1..{series.T}")
        return float(self._conditional_terms(theta, series)[t - 1])

    def simulate(self, theta, T: int, covariates=None, seed: int = 0) -> TimeSeries:
        """Draw a length-T series; deterministic given the seed.

        Simulation uses the same initialization conventions as the
        likelihood, so the two describe one joint law.
        """
        theta = self._validate_theta(theta)
        if T < 1:
            raise DomainError(f"T must be >= 1, got {T}")
        cov = self._validate_covariates(covariates, T)
        rng = np.random.default_rng(seed)
        obs = self._simulate(theta, T, cov, rng)
        return TimeSeries(obs=obs, covariates=cov)

    # -- validation helpers ------------------------------------------------

    def _validate_theta(self, theta) -> np.ndarray:
        theta = np.ascontiguousarray(theta, dtype=float)
        space = self._space
        if theta.shape != (space.d,):
            raise DimensionError(
                f"theta must have shape ({space.d},), got {theta.shape}"
            )
        if not space.contains(theta):
            raise DomainError(f"theta outside declared supports: {theta}")
        return theta

    def _validate_series(self, series: TimeSeries):
        if series.obs_dim != self.obs_dim:
            raise DimensionError(
                f"model expects obs_dim={self.obs_dim}, series has {series.obs_dim}"
            )
        need = self.cov_dim
        if need > 0:
            if series.covariates is None:
                raise CovariateError(f"model requires {need} covariate columns")
            if series.cov_dim != need:
                raise CovariateError(
                    f"model requires {need} covariate columns, series has "
                    f"{series.cov_dim}"
                )
        elif series.covariates is not None:
            raise CovariateError("model takes no covariates but series has some")

    def _validate_covariates(self, covariates, T: int) -> np.ndarray | None:
        need = self.cov_dim
        if need == 0:
            if covariates is not None:
                raise CovariateError("model takes no covariates")
            return None
        if covariates is None:
            raise CovariateError(f"model requires {need} covariate columns")
        cov = np.ascontiguousarray(covariates, dtype=float)
        if cov.ndim == 1:
            cov = cov[:, None]
        if cov.shape != (T, need):
            raise CovariateError(
                f"covariates must have shape ({T}, {need}), got {cov.shape}"
            )
        return cov


@dataclass(frozen=True, eq=False)
class FixedParams(TimeSeriesModel):
    """Wrap a model with some blocks pinned to constants.

    The wrapped parameter space drops the pinned blocks; likelihoods,
    simulation, and defaults embed the reduced vector back into the base
    model's full vector. Useful for conditioning on known parameters,
    e.g. a known noise variance.

    Parameters
    ----------
    base : TimeSeriesModel
    fixed : dict
        Block name -> value(s), validated against the base space.
    """

    base: TimeSeriesModel
    fixed: dict

    def __post_init__(self):
        base_space = self.base.parameter_space()
        by_name = {b.name: b for b in base_space.blocks}
        pinned = {}
        for name, value in self.fixed.items():
            if name not in by_name:
                raise DomainError(f"unknown block {name!r}")
            v = np.atleast_1d(np.asarray(value, dtype=float))
            if v.shape != (by_name[name].dim,):
                raise DimensionError(
                    f"block {name!r} has dim {by_name[name].dim}, "
                    f"got value shape {v.shape}"
                )
            v.setflags(write=False)
            pinned[name] = v
        free = tuple(b for b in base_space.blocks if b.name not in pinned)
        if not free:
            raise DomainError("all blocks fixed; nothing left to infer")
        object.__setattr__(self, "fixed", pinned)
        object.__setattr__(self, "_space", ParameterSpace(blocks=free))
        # verify pinned values sit inside their supports by embedding defaults
        full = self._embed(self.default_true_parameters())
        if not base_space.contains(full):
            raise DomainError("fixed values violate the base model supports")

    @property
    def obs_dim(self) -> int:  # type: ignore[override]
        return self.base.obs_dim

    @property
    def cov_dim(self) -> int:
        return self.base.cov_dim

    def _embed(self, theta_free: np.ndarray) -> np.ndarray:
        base_space = self.base.parameter_space()
        full = np.empty(base_space.d)
        at_full = 0
        at_free = 0
        for b in base_space.blocks:
            if b.name in self.fixed:
                full[at_full:at_full + b.dim] = self.fixed[b.name]
            else:
                full[at_full:at_full + b.dim] = theta_free[at_free:at_free + b.dim]
                at_free += b.dim
            at_full += b.dim
        return full

    def default_true_parameters(self) -> np.ndarray:
        base_space = self.base.parameter_space()
        defaults = self.base.default_true_parameters()
        keep = []
        at = 0
        for b in base_space.blocks:
            if b.name not in self.fixed:
                keep.append(defaults[at:at + b.dim])
            at += b.dim
        return np.concatenate(keep)

    def _terms(self, theta, series):
        return self.base._terms(self._embed(theta), series)

    def _conditional_terms(self, theta, series):
        return self.base._conditional_terms(self._embed(theta), series)

    def _simulate(self, theta, T, covariates, rng):
        return self.base._simulate(self._embed(theta), T, covariates, rng)
