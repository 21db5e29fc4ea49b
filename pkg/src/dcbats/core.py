"""Core containers: time series, partitions, parameter spaces, draw sets.

Everything here is an immutable value type. Arrays are copied on
construction and marked read-only, so instances can be shared freely
across worker threads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DivisibilityError, DomainError


def _frozen_array(x, dtype=float) -> np.ndarray:
    a = np.array(x, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Observed series of T rows, optionally with exogenous covariates.

    Parameters
    ----------
    obs : array_like
        Observations, shape (T, obs_dim). A 1-d array is promoted to a
        single column.
    covariates : array_like, optional
        Exogenous covariates, shape (T, cov_dim); row t aligns with
        observation row t.
    labels : tuple of str, optional
        Per-column names for the observation columns.
    """

    obs: np.ndarray
    covariates: np.ndarray | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        obs = np.asarray(self.obs, dtype=float)
        if obs.ndim == 1:
            obs = obs[:, None]
        if obs.ndim != 2:
            raise DimensionError(f"obs must be 1-d or 2-d, got ndim={obs.ndim}")
        if obs.shape[0] < 1:
            raise DomainError("series must contain at least one row")
        if not np.all(np.isfinite(obs)):
            raise DomainError("obs contains non-finite values")
        object.__setattr__(self, "obs", _frozen_array(obs))
        if self.covariates is not None:
            cov = np.asarray(self.covariates, dtype=float)
            if cov.ndim == 1:
                cov = cov[:, None]
            if cov.ndim != 2 or cov.shape[0] != obs.shape[0]:
                raise DimensionError(
                    f"covariates must have one row per observation, "
                    f"got {cov.shape} against T={obs.shape[0]}"
                )
            if not np.all(np.isfinite(cov)):
                raise DomainError("covariates contain non-finite values")
            object.__setattr__(self, "covariates", _frozen_array(cov))
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != obs.shape[1]:
                raise DimensionError(
                    f"{len(labels)} labels for {obs.shape[1]} obs columns"
                )
            object.__setattr__(self, "labels", labels)

    @property
    def T(self) -> int:
        return self.obs.shape[0]

    @property
    def obs_dim(self) -> int:
        return self.obs.shape[1]

    @property
    def cov_dim(self) -> int:
        return 0 if self.covariates is None else self.covariates.shape[1]


@dataclass(frozen=True)
class Partition:
    """Contiguous equal-length split of 1..T into K segments of length m.

    Segment k (1-based) covers half-open row range ``ranges[k-1]`` in
    0-based indexing.
    """

    T: int
    K: int
    m: int
    ranges: tuple[tuple[int, int], ...]


def make_partition(T: int, K: int) -> Partition:
    """Split a length-T index range into K contiguous equal segments.

    Raises
    ------
    DomainError
        If K < 1 or K > T.
    DivisibilityError
        If K does not divide T.
    """
    if not (1 <= K <= T):
        raise DomainError(f"need 1 <= K <= T, got K={K}, T={T}")
    if T % K != 0:
        raise DivisibilityError(f"K={K} does not divide T={T}")
    m = T // K
    ranges = tuple((k * m, (k + 1) * m) for k in range(K))
    return Partition(T=T, K=K, m=m, ranges=ranges)


def extract_segment(series: TimeSeries, partition: Partition, k: int) -> TimeSeries:
    """Return segment k (1-based) of the series as a fresh TimeSeries.

    Covariate rows are sliced along with the observations. Raises
    IndexError if k is not in 1..K.
    """
    if partition.T != series.T:
        raise DimensionError(
            f"partition is for T={partition.T}, series has T={series.T}"
        )
    if not (1 <= k <= partition.K):
        raise IndexError(f"segment index {k} outside 1..{partition.K}")
    lo, hi = partition.ranges[k - 1]
    cov = None if series.covariates is None else series.covariates[lo:hi]
    return TimeSeries(obs=series.obs[lo:hi], covariates=cov, labels=series.labels)


# ---------------------------------------------------------------------------
# parameter spaces


@dataclass(frozen=True)
class Real:
    """Unbounded scalar support."""


@dataclass(frozen=True)
class Positive:
    """Strictly positive scalar support."""


@dataclass(frozen=True)
class Interval:
    """Open interval support (lo, hi)."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.lo < self.hi):
            raise DomainError(f"need finite lo < hi, got ({self.lo}, {self.hi})")


REAL = Real()
POSITIVE = Positive()

Support = Real | Positive | Interval


@dataclass(frozen=True)
class Block:
    """Named group of dim coordinates sharing one support."""

    name: str
    dim: int
    support: Support

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"block {self.name!r} has dim {self.dim}")


@dataclass(frozen=True)
class ParameterSpace:
    """Ordered blocks defining the flat parameter vector layout.

    The flat vector concatenates blocks in order; coordinate j of block
    ``b`` sits at offset(b) + j. Block names are unique.
    """

    blocks: tuple[Block, ...]

    def __post_init__(self):
        names = [b.name for b in self.blocks]
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate block names in {names}")
        if not self.blocks:
            raise DomainError("parameter space needs at least one block")

    @property
    def d(self) -> int:
        return sum(b.dim for b in self.blocks)

    def slices(self) -> dict[str, slice]:
        """Map block name to its slice of the flat vector."""
        out, at = {}, 0
        for b in self.blocks:
            out[b.name] = slice(at, at + b.dim)
            at += b.dim
        return out

    def flat_names(self) -> tuple[str, ...]:
        """One name per coordinate: 'alpha', 'beta[1]', 'beta[2]', ..."""
        names = []
        for b in self.blocks:
            if b.dim == 1:
                names.append(b.name)
            else:
                names.extend(f"{b.name}[{j}]" for j in range(1, b.dim + 1))
        return tuple(names)

    def contains(self, theta: np.ndarray) -> bool:
        """True if every coordinate is finite and strictly inside its support."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.d,):
            raise DimensionError(f"expected shape ({self.d},), got {theta.shape}")
        if not np.all(np.isfinite(theta)):
            return False
        at = 0
        for b in self.blocks:
            x = theta[at:at + b.dim]
            at += b.dim
            if isinstance(b.support, Positive):
                if not np.all(x > 0.0):
                    return False
            elif isinstance(b.support, Interval):
                if not (np.all(x > b.support.lo) and np.all(x < b.support.hi)):
                    return False
        return True


# ---------------------------------------------------------------------------
# sampler output and functionals


@dataclass(frozen=True, eq=False)
class DrawSet:
    """Post burn-in MCMC output on the constrained scale.

    Attributes
    ----------
    draws : ndarray
        Shape (S, d), one retained draw per row.
    burn_in : int
        Number of leading iterations discarded before these draws.
    acceptance_rate : float
        Fraction of accepted proposals over the post-adaptation window.
    seed : int
        Seed the chain ran with.
    target_label : str
        Human-readable label of the sampled target, e.g. "full" or
        "subsequence 3/10".
    """

    draws: np.ndarray
    burn_in: int
    acceptance_rate: float
    seed: int
    target_label: str

    def __post_init__(self):
        draws = np.asarray(self.draws, dtype=float)
        if draws.ndim != 2 or draws.shape[0] < 1:
            raise DimensionError(f"draws must be (S >= 1, d), got {draws.shape}")
        object.__setattr__(self, "draws", _frozen_array(draws))
        if self.burn_in < 0:
            raise DomainError(f"burn_in must be >= 0, got {self.burn_in}")
        if not (0.0 <= self.acceptance_rate <= 1.0):
            raise DomainError(f"acceptance_rate outside [0,1]: {self.acceptance_rate}")
        if self.seed < 0:
            raise DomainError(f"seed must be >= 0, got {self.seed}")

    @property
    def S(self) -> int:
        return self.draws.shape[0]

    @property
    def d(self) -> int:
        return self.draws.shape[1]


@dataclass(frozen=True, eq=False)
class LinearFunctional:
    """Scalar map theta -> a . theta + b with at least one nonzero weight."""

    a: np.ndarray
    b: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 1:
            raise DimensionError(f"weights must be 1-d, got shape {a.shape}")
        if not np.any(a != 0.0):
            raise DomainError("functional weights are all zero")
        object.__setattr__(self, "a", _frozen_array(a))
        object.__setattr__(self, "b", float(self.b))

    @classmethod
    def coordinate(cls, j: int, d: int) -> "LinearFunctional":
        """Projection onto coordinate j (0-based) of a d-vector."""
        a = np.zeros(d)
        a[j] = 1.0
        return cls(a=a)
