"""Generative time-series models with per-observation log-densities."""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .base import FixedParams, TimeSeriesModel
from .binary import BinaryAr
from .garch import CccBivariateGarch, GarchX
from .hmm import LinearGaussianHmm
from .kernels import HAVE_NUMBA, NUMBA_IMPLS, NUMPY_IMPLS, USING_NUMBA, warm_up
from .regression import ArErrorRegression

__all__ = [
    "ArErrorRegression", "BinaryAr", "CccBivariateGarch", "FixedParams",
    "GarchX", "LinearGaussianHmm", "TimeSeriesModel",
    "HAVE_NUMBA", "USING_NUMBA", "NUMBA_IMPLS", "NUMPY_IMPLS",
    "warm_up", "build_model", "MODEL_TYPES",
]

MODEL_TYPES = {
    "ar_error_regression": ArErrorRegression,
    "garch_x": GarchX,
    "linear_gaussian_hmm": LinearGaussianHmm,
    "binary_ar": BinaryAr,
    "ccc_bivariate_garch": CccBivariateGarch,
}

_INT_FIELDS = {"p_cov", "d_cov", "q_arch", "p_garch", "z_dim", "x_dim",
               "p_lag", "q_cov"}
_ARRAY_FIELDS = {"emission", "mu0", "cov0", "offset_z", "offset_x"}

_ALLOWED_FIELDS = {
    "ar_error_regression": {"p_cov"},
    "garch_x": {"d_cov", "q_arch", "p_garch"},
    "linear_gaussian_hmm": {"z_dim", "x_dim", "emission", "mu0", "cov0",
                            "offset_z", "offset_x"},
    "binary_ar": {"p_lag", "q_cov"},
    "ccc_bivariate_garch": set(),
}


def build_model(config: dict) -> TimeSeriesModel:
    """Instantiate a model from a config mapping with a 'type' key."""
    if not isinstance(config, dict) or "type" not in config:
        raise ConfigError("model config must be an object with a 'type' key")
    name = config["type"]
    if name not in MODEL_TYPES:
        raise ConfigError(
            f"unknown model type {name!r}; choose from {sorted(MODEL_TYPES)}"
        )
    kwargs = {}
    allowed = _ALLOWED_FIELDS[name]
    for key, value in config.items():
        if key == "type":
            continue
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} for model {name!r}")
        if key in _INT_FIELDS:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"model key {key!r} must be an integer")
            kwargs[key] = value
        elif key in _ARRAY_FIELDS:
            kwargs[key] = np.asarray(value, dtype=float)
    try:
        return MODEL_TYPES[name](**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad arguments for model {name!r}: {exc}") from exc
