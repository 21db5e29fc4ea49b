"""Linear regression with second-order autoregressive errors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Block, ParameterSpace, POSITIVE, REAL
from ..errors import DomainError
from . import kernels
from .base import TimeSeriesModel


@dataclass(frozen=True)
class ArErrorRegression(TimeSeriesModel):
    """x_t = alpha + beta . z_t + eps_t with AR(2) errors.

    eps_t = phi1 eps_{t-1} + phi2 eps_{t-2} + xi_t, xi_t ~ N(0, sigma_sq);
    the first two errors are fresh N(0, sigma_sq) innovations, so the
    conditional means at t = 1, 2 carry no AR terms.

    Parameter layout: alpha, beta[1..p_cov], phi[1], phi[2], sigma_sq.
    """

    p_cov: int = 0

    def __post_init__(self):
        if self.p_cov < 0:
            raise DomainError(f"p_cov must be >= 0, got {self.p_cov}")
        blocks = [Block("alpha", 1, REAL)]
        if self.p_cov > 0:
            blocks.append(Block("beta", self.p_cov, REAL))
        blocks.append(Block("phi", 2, REAL))
        blocks.append(Block("sigma_sq", 1, POSITIVE))
        object.__setattr__(self, "_space", ParameterSpace(tuple(blocks)))

    @property
    def cov_dim(self) -> int:
        return self.p_cov

    def default_true_parameters(self) -> np.ndarray:
        return np.concatenate([
            [0.5], np.ones(self.p_cov), [0.5, 0.2], [1.0],
        ])

    def _unpack(self, theta):
        p = self.p_cov
        return theta[0], theta[1:1 + p], theta[1 + p], theta[2 + p], theta[3 + p]

    def _regression_part(self, beta, covariates, T):
        if self.p_cov == 0:
            return np.zeros(T)
        return covariates @ beta

    def _terms(self, theta, series):
        alpha, beta, phi1, phi2, sigma_sq = self._unpack(theta)
        zb = self._regression_part(beta, series.covariates, series.T)
        return kernels.ar_error_terms(series.obs[:, 0], zb,
                                      alpha, phi1, phi2, sigma_sq)

    def _simulate(self, theta, T, covariates, rng):
        alpha, beta, phi1, phi2, sigma_sq = self._unpack(theta)
        zb = self._regression_part(beta, covariates, T)
        noise = rng.standard_normal(T)
        x = kernels.ar_error_sim(zb, alpha, phi1, phi2,
                                 np.sqrt(sigma_sq), noise)
        return x[:, None]
