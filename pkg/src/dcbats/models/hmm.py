"""Linear-Gaussian hidden Markov model with Kalman-filter likelihood."""
from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from ..core import Block, ParameterSpace, POSITIVE, REAL
from ..errors import DimensionError, DomainError, NonPositiveVarianceError
from . import kernels
from .base import TimeSeriesModel

# filter passes memoized per (model, theta, obs) for repeated per-t calls;
# values are identical to the uncached path since both share one kernel
_CACHE_MAX = 8
_terms_cache: OrderedDict = OrderedDict()
_cache_lock = threading.Lock()


@dataclass(frozen=True, eq=False)
class LinearGaussianHmm(TimeSeriesModel):
    """z_t = A z_{t-1} + c_z + N(0, sigma_z_sq I), x_t = A_x z_t + c_x + noise.

    The latent chain starts from z_0 ~ N(mu0, cov0) and observations carry
    isotropic N(0, sigma_x_sq I) noise. Inference targets the transition
    matrix and the two variances; the emission matrix and offsets are fixed
    quantities of the model instance.

    Parameter layout: A[1..z_dim^2] (row-major), sigma_z_sq, sigma_x_sq.
    """

    z_dim: int
    x_dim: int
    emission: np.ndarray | None = None
    mu0: np.ndarray | None = None
    cov0: np.ndarray | None = None
    offset_z: np.ndarray | None = None
    offset_x: np.ndarray | None = None

    def __post_init__(self):
        n, px = self.z_dim, self.x_dim
        if n < 1 or px < 1:
            raise DomainError(f"need z_dim, x_dim >= 1, got ({n}, {px})")

        def fix(value, default, shape, name):
            arr = default if value is None else np.array(value, dtype=float)
            arr = np.ascontiguousarray(arr, dtype=float)
            if arr.shape != shape:
                raise DimensionError(f"{name} must have shape {shape}, got {arr.shape}")
            arr.setflags(write=False)
            return arr

        emission = fix(self.emission, np.eye(px, n), (px, n), "emission")
        mu0 = fix(self.mu0, np.zeros(n), (n,), "mu0")
        cov0 = fix(self.cov0, np.eye(n), (n, n), "cov0")
        offset_z = fix(self.offset_z, np.zeros(n), (n,), "offset_z")
        offset_x = fix(self.offset_x, np.zeros(px), (px,), "offset_x")
        object.__setattr__(self, "emission", emission)
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "cov0", cov0)
        object.__setattr__(self, "offset_z", offset_z)
        object.__setattr__(self, "offset_x", offset_x)
        object.__setattr__(self, "obs_dim", px)
        space = ParameterSpace((
            Block("A", n * n, REAL),
            Block("sigma_z_sq", 1, POSITIVE),
            Block("sigma_x_sq", 1, POSITIVE),
        ))
        object.__setattr__(self, "_space", space)
        fingerprint = b"".join(a.tobytes() for a in
                               (emission, mu0, cov0, offset_z, offset_x))
        object.__setattr__(self, "_key", (n, px, fingerprint))

    def default_true_parameters(self) -> np.ndarray:
        if self.z_dim == 2:
            A = np.array([0.9, -0.3, 0.2, 1.0])
        else:
            A = (0.9 * np.eye(self.z_dim)).ravel()
        return np.concatenate([A, [0.5, 0.5]])

    def _unpack(self, theta):
        n = self.z_dim
        A = np.ascontiguousarray(theta[:n * n].reshape(n, n))
        return A, theta[n * n], theta[n * n + 1]

    def _terms(self, theta, series):
        A, sig_z2, sig_x2 = self._unpack(theta)
        terms, status = kernels.kalman_terms(
            series.obs, A, sig_z2, sig_x2, self.emission,
            self.mu0, self.cov0, self.offset_z, self.offset_x,
        )
        if status != 0:
            raise NonPositiveVarianceError(
                "innovation covariance lost positive-definiteness"
            )
        return terms

    def _conditional_terms(self, theta, series):
        key = (self._key, theta.tobytes(), series.obs.tobytes())
        with _cache_lock:
            if key in _terms_cache:
                _terms_cache.move_to_end(key)
                return _terms_cache[key]
        terms = self._terms(theta, series)
        with _cache_lock:
            _terms_cache[key] = terms
            while len(_terms_cache) > _CACHE_MAX:
                _terms_cache.popitem(last=False)
        return terms

    def _simulate(self, theta, T, covariates, rng):
        A, sig_z2, sig_x2 = self._unpack(theta)
        chol0 = np.linalg.cholesky(self.cov0)
        z0_noise = rng.standard_normal(self.z_dim)
        z_noise = rng.standard_normal((T, self.z_dim))
        x_noise = rng.standard_normal((T, self.x_dim))
        return kernels.hmm_sim(
            A, np.sqrt(sig_z2), np.sqrt(sig_x2), self.emission,
            self.mu0, chol0, self.offset_z, self.offset_x,
            z0_noise, z_noise, x_noise,
        )
