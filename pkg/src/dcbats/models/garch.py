"""GARCH with covariates in the mean and the bivariate CCC-GARCH."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Block, Interval, ParameterSpace, POSITIVE, REAL
from ..errors import DomainError, NonPositiveVarianceError
from . import kernels
from .base import TimeSeriesModel


@dataclass(frozen=True)
class GarchX(TimeSeriesModel):
    """x_t = z_t . b + eps_t, eps_t ~ N(0, sigma_t^2) with a GARCH variance.

    sigma_t^2 = omega^2 + sum_{i=1..q_arch} alpha_i eps_{t-i}^2
                        + sum_{j=1..p_garch} beta_j sigma_{t-j}^2,
    with a unit-variance preamble sigma_s^2 = 1 for s <= r_init where
    r_init = max(p_garch, q_arch). Note the recursion squares omega while
    omega itself is the (positive) sampled parameter.

    Parameter layout: b[1..d_cov], omega, alpha[1..q_arch], beta[1..p_garch].
    """

    d_cov: int
    q_arch: int
    p_garch: int

    def __post_init__(self):
        if self.d_cov < 0 or self.q_arch < 1 or self.p_garch < 1:
            raise DomainError(
                f"need d_cov >= 0, q_arch >= 1, p_garch >= 1, got "
                f"({self.d_cov}, {self.q_arch}, {self.p_garch})"
            )
        blocks = []
        if self.d_cov > 0:
            blocks.append(Block("b", self.d_cov, REAL))
        blocks.append(Block("omega", 1, POSITIVE))
        blocks.append(Block("alpha", self.q_arch, POSITIVE))
        blocks.append(Block("beta", self.p_garch, POSITIVE))
        object.__setattr__(self, "_space", ParameterSpace(tuple(blocks)))

    @property
    def cov_dim(self) -> int:
        return self.d_cov

    @property
    def r_init(self) -> int:
        return max(self.p_garch, self.q_arch)

    def default_true_parameters(self) -> np.ndarray:
        # alternating-sign regression weights; arch/garch weights sum to
        # 0.8 < 1 so the variance process is stationary
        b = 0.5 * (-1.0) ** np.arange(self.d_cov)
        alpha = np.full(self.q_arch, 0.3 / self.q_arch)
        beta = np.full(self.p_garch, 0.5 / self.p_garch)
        return np.concatenate([b, [0.5], alpha, beta])

    def _unpack(self, theta):
        d, q = self.d_cov, self.q_arch
        return (theta[:d], theta[d], theta[d + 1:d + 1 + q],
                theta[d + 1 + q:])

    def _residuals(self, b, series):
        x = series.obs[:, 0]
        if self.d_cov == 0:
            return x.copy()
        return x - series.covariates @ b

    def _terms(self, theta, series):
        b, omega, alpha, beta = self._unpack(theta)
        eps = self._residuals(b, series)
        terms, status = kernels.garch_terms(eps, omega, alpha, beta,
                                            self.r_init)
        if status != 0:
            raise NonPositiveVarianceError(
                "conditional variance lost positivity"
            )
        return terms

    def _simulate(self, theta, T, covariates, rng):
        b, omega, alpha, beta = self._unpack(theta)
        zb = covariates @ b if self.d_cov > 0 else np.zeros(T)
        noise = rng.standard_normal(T)
        x = kernels.garch_sim(zb, omega, alpha, beta, self.r_init, noise)
        return x[:, None]


@dataclass(frozen=True)
class CccBivariateGarch(TimeSeriesModel):
    """Bivariate GARCH(1,1) with constant conditional correlation.

    Component variances follow H_{t,ii} = w_i + a_i v_{t-1,i}^2
    + b_i H_{t-1,ii} with v_t = x_t - mu, and the cross term is
    H_{t,12} = r sqrt(H_{t,11} H_{t,22}). H_1 starts at the stationary
    variance w_i / (1 - a_i - b_i) when a_i + b_i < 1, else at w_i.

    Parameter layout: mu[1..2], w[1..2], a[1..2], b[1..2], r.
    """

    obs_dim = 2

    def __post_init__(self):
        blocks = (
            Block("mu", 2, REAL),
            Block("w", 2, POSITIVE),
            Block("a", 2, POSITIVE),
            Block("b", 2, POSITIVE),
            Block("r", 1, Interval(0.0, 1.0)),
        )
        object.__setattr__(self, "_space", ParameterSpace(blocks))

    def default_true_parameters(self) -> np.ndarray:
        return np.array([3.0, 2.0, 0.12, 0.2, 0.55, 0.7, 0.1, 0.01, 0.26])

    def _terms(self, theta, series):
        mu = theta[0:2]
        v = series.obs - mu
        terms, status = kernels.ccc_terms(
            v, theta[2], theta[3], theta[4], theta[5],
            theta[6], theta[7], theta[8],
        )
        if status != 0:
            raise NonPositiveVarianceError(
                "conditional covariance lost positive-definiteness"
            )
        return terms

    def _simulate(self, theta, T, covariates, rng):
        noise = rng.standard_normal((T, 2))
        return kernels.ccc_sim(
            theta[0], theta[1], theta[2], theta[3], theta[4],
            theta[5], theta[6], theta[7], theta[8], noise,
        )
