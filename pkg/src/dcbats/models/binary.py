"""Binary autoregression with exogenous covariates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Block, ParameterSpace, REAL
from ..errors import DomainError
from . import kernels
from .base import TimeSeriesModel


@dataclass(frozen=True)
class BinaryAr(TimeSeriesModel):
    """X_t in {0,1} with P(X_t = 1) = logistic(c + sum_i alpha_i x_{t-i} + z_t . b).

    Lagged values at s <= 0 count as zero. Series fed to the likelihood
    must be exactly 0/1 valued.

    Parameter layout: c, alpha[1..p_lag], b[1..q_cov].
    """

    p_lag: int
    q_cov: int = 0

    def __post_init__(self):
        if self.p_lag < 1 or self.q_cov < 0:
            raise DomainError(
                f"need p_lag >= 1 and q_cov >= 0, got ({self.p_lag}, {self.q_cov})"
            )
        blocks = [Block("c", 1, REAL), Block("alpha", self.p_lag, REAL)]
        if self.q_cov > 0:
            blocks.append(Block("b", self.q_cov, REAL))
        object.__setattr__(self, "_space", ParameterSpace(tuple(blocks)))

    @property
    def cov_dim(self) -> int:
        return self.q_cov

    def default_true_parameters(self) -> np.ndarray:
        alpha = 0.5 ** np.arange(1, self.p_lag + 1)
        b = 0.5 * (-1.0) ** np.arange(self.q_cov)
        return np.concatenate([[0.0], alpha, b])

    def _validate_series(self, series):
        super()._validate_series(series)
        x = series.obs[:, 0]
        if not np.all((x == 0.0) | (x == 1.0)):
            raise DomainError("binary series must contain only 0/1 values")

    def _unpack(self, theta):
        p = self.p_lag
        return theta[0], theta[1:1 + p], theta[1 + p:]

    def _covariate_part(self, b, covariates, T):
        if self.q_cov == 0:
            return np.zeros(T)
        return covariates @ b

    def _terms(self, theta, series):
        c, alpha, b = self._unpack(theta)
        zb = self._covariate_part(b, series.covariates, series.T)
        return kernels.binary_terms(series.obs[:, 0], zb, c, alpha)

    def _simulate(self, theta, T, covariates, rng):
        c, alpha, b = self._unpack(theta)
        zb = self._covariate_part(b, covariates, T)
        uniforms = rng.random(T)
        x = kernels.binary_sim(zb, c, alpha, uniforms)
        return x[:, None]
