"""Prior families, per-block prior specifications, and reparameterizations.

Priors apply independently per coordinate within a block, and a family is
only accepted on a block whose support it matches (a Normal prior cannot
sit on a positive block). Sampling happens on an unconstrained scale;
``to_unconstrained`` / ``from_unconstrained`` implement the block-wise
bijections and the log-Jacobian needed to correct densities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .core import Interval, ParameterSpace, Positive, Real, Support
from .errors import DimensionError, DomainError, SupportError

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class NormalPrior:
    """N(mean, var) on the real line."""

    mean: float
    var: float

    support: ClassVar[Support] = Real()

    def __post_init__(self):
        if not self.var > 0.0:
            raise DomainError(f"var must be > 0, got {self.var}")

    def log_density(self, x: np.ndarray) -> float:
        z = (x - self.mean)
        return float(-0.5 * np.sum(z * z) / self.var
                     - 0.5 * x.size * (_LOG_2PI + math.log(self.var)))

    def location(self) -> float:
        return self.mean


@dataclass(frozen=True)
class HalfNormalPrior:
    """|N(0, var)| on the positive half-line; density 2 phi(x) for x >= 0."""

    var: float

    support: ClassVar[Support] = Positive()

    def __post_init__(self):
        if not self.var > 0.0:
            raise DomainError(f"var must be > 0, got {self.var}")

    def log_density(self, x: np.ndarray) -> float:
        if np.any(x <= 0.0):
            return -math.inf
        return float(-0.5 * np.sum(x * x) / self.var
                     + x.size * (math.log(2.0) - 0.5 * (_LOG_2PI + math.log(self.var))))

    def location(self) -> float:
        return math.sqrt(2.0 * self.var / math.pi)


@dataclass(frozen=True)
class InverseGammaPrior:
    """Inverse-gamma with shape a and scale b: x^-(a+1) exp(-b/x)."""

    shape: float
    scale: float

    support: ClassVar[Support] = Positive()

    def __post_init__(self):
        if not (self.shape > 0.0 and self.scale > 0.0):
            raise DomainError(
                f"shape and scale must be > 0, got ({self.shape}, {self.scale})"
            )

    def log_density(self, x: np.ndarray) -> float:
        if np.any(x <= 0.0):
            return -math.inf
        a, b = self.shape, self.scale
        lx = np.log(x)
        return float(x.size * (a * math.log(b) - math.lgamma(a))
                     - (a + 1.0) * np.sum(lx) - b * np.sum(1.0 / x))

    def location(self) -> float:
        # mean undefined for shape <= 1; fall back to the mode
        if self.shape > 1.0:
            return self.scale / (self.shape - 1.0)
        return self.scale / (self.shape + 1.0)


@dataclass(frozen=True)
class GammaPrior:
    """Gamma with shape a and rate r: x^(a-1) exp(-r x)."""

    shape: float
    rate: float

    support: ClassVar[Support] = Positive()

    def __post_init__(self):
        if not (self.shape > 0.0 and self.rate > 0.0):
            raise DomainError(
                f"shape and rate must be > 0, got ({self.shape}, {self.rate})"
            )

    def log_density(self, x: np.ndarray) -> float:
        if np.any(x <= 0.0):
            return -math.inf
        a, r = self.shape, self.rate
        return float(x.size * (a * math.log(r) - math.lgamma(a))
                     + (a - 1.0) * np.sum(np.log(x)) - r * np.sum(x))

    def location(self) -> float:
        return self.shape / self.rate


@dataclass(frozen=True)
class LogNormalPrior:
    """log x ~ N(mu, var) on the positive half-line."""

    mu: float
    var: float

    support: ClassVar[Support] = Positive()

    def __post_init__(self):
        if not self.var > 0.0:
            raise DomainError(f"var must be > 0, got {self.var}")

    def log_density(self, x: np.ndarray) -> float:
        if np.any(x <= 0.0):
            return -math.inf
        lx = np.log(x)
        z = lx - self.mu
        return float(-np.sum(lx) - 0.5 * np.sum(z * z) / self.var
                     - 0.5 * x.size * (_LOG_2PI + math.log(self.var)))

    def location(self) -> float:
        # diffuse scales overflow the mean; the median is always usable
        arg = self.mu + 0.5 * self.var
        if arg > 700.0:
            return math.exp(self.mu)
        return math.exp(arg)


@dataclass(frozen=True)
class UniformPrior:
    """Uniform on the open interval (lo, hi)."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.lo < self.hi):
            raise DomainError(f"need finite lo < hi, got ({self.lo}, {self.hi})")

    @property
    def support(self) -> Support:
        return Interval(self.lo, self.hi)

    def log_density(self, x: np.ndarray) -> float:
        if np.any(x <= self.lo) or np.any(x >= self.hi):
            return -math.inf
        return float(-x.size * math.log(self.hi - self.lo))

    def location(self) -> float:
        return 0.5 * (self.lo + self.hi)


PriorFamily = (NormalPrior | HalfNormalPrior | InverseGammaPrior
               | GammaPrior | LogNormalPrior | UniformPrior)


def _support_matches(family, support: Support) -> bool:
    fam_sup = family.support
    if isinstance(fam_sup, Interval):
        return (isinstance(support, Interval)
                and fam_sup.lo == support.lo and fam_sup.hi == support.hi)
    return type(fam_sup) is type(support)


@dataclass(frozen=True)
class PriorSpec:
    """Per-block prior families aligned with a parameter space.

    ``families[i]`` applies independently to every coordinate of
    ``space.blocks[i]``. Construct with :meth:`for_space` to validate the
    name/support pairing.
    """

    space: ParameterSpace
    families: tuple[PriorFamily, ...]

    def __post_init__(self):
        if len(self.families) != len(self.space.blocks):
            raise DimensionError(
                f"{len(self.families)} families for "
                f"{len(self.space.blocks)} blocks"
            )
        for block, fam in zip(self.space.blocks, self.families):
            if not _support_matches(fam, block.support):
                raise SupportError(
                    f"prior {fam} does not match support of block "
                    f"{block.name!r} ({block.support})"
                )

    @classmethod
    def for_space(cls, space: ParameterSpace, families: dict) -> "PriorSpec":
        """Build from a {block name: family} mapping covering every block."""
        missing = [b.name for b in space.blocks if b.name not in families]
        if missing:
            raise DomainError(f"no prior given for blocks {missing}")
        extra = [n for n in families if n not in {b.name for b in space.blocks}]
        if extra:
            raise DomainError(f"priors for unknown blocks {extra}")
        return cls(space=space, families=tuple(families[b.name] for b in space.blocks))


def prior_log_density(prior: PriorSpec, theta: np.ndarray) -> float:
    """Log prior density at theta; -inf outside the support."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (prior.space.d,):
        raise DimensionError(
            f"expected shape ({prior.space.d},), got {theta.shape}"
        )
    total = 0.0
    at = 0
    for block, fam in zip(prior.space.blocks, prior.families):
        lp = fam.log_density(theta[at:at + block.dim])
        if lp == -math.inf:
            return -math.inf
        total += lp
        at += block.dim
    return total


def prior_location(prior: PriorSpec) -> np.ndarray:
    """Central point of the prior, used as the default chain start."""
    out = np.empty(prior.space.d)
    at = 0
    for block, fam in zip(prior.space.blocks, prior.families):
        out[at:at + block.dim] = fam.location()
        at += block.dim
    return out


# ---------------------------------------------------------------------------
# constrained <-> unconstrained transforms


def _softplus(x):
    return np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)


def _sigmoid(x):
    out = np.empty_like(x, dtype=float)
    pos = x >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def to_unconstrained(space: ParameterSpace, theta: np.ndarray) -> np.ndarray:
    """Map a constrained vector to the unconstrained sampling scale.

    Positive blocks map through log, interval blocks through a scaled
    logit, real blocks pass through. Raises SupportError if any
    coordinate sits outside (or on the boundary of) its support.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (space.d,):
        raise DimensionError(f"expected shape ({space.d},), got {theta.shape}")
    eta = np.empty_like(theta)
    at = 0
    for block in space.blocks:
        x = theta[at:at + block.dim]
        sup = block.support
        if isinstance(sup, Positive):
            if np.any(x <= 0.0) or not np.all(np.isfinite(x)):
                raise SupportError(f"block {block.name!r} must be > 0, got {x}")
            eta[at:at + block.dim] = np.log(x)
        elif isinstance(sup, Interval):
            if (np.any(x <= sup.lo) or np.any(x >= sup.hi)
                    or not np.all(np.isfinite(x))):
                raise SupportError(
                    f"block {block.name!r} must lie in ({sup.lo}, {sup.hi}), got {x}"
                )
            eta[at:at + block.dim] = np.log(x - sup.lo) - np.log(sup.hi - x)
        else:
            if not np.all(np.isfinite(x)):
                raise SupportError(f"block {block.name!r} has non-finite entries")
            eta[at:at + block.dim] = x
        at += block.dim
    return eta


def from_unconstrained(space: ParameterSpace, eta: np.ndarray):
    """Inverse of :func:`to_unconstrained`.

    Returns
    -------
    theta : ndarray
        Constrained vector.
    log_jacobian : float
        log |d theta / d eta|, the density correction for sampling on
        the unconstrained scale.
    """
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (space.d,):
        raise DimensionError(f"expected shape ({space.d},), got {eta.shape}")
    if not np.all(np.isfinite(eta)):
        raise DomainError("eta contains non-finite entries")
    theta = np.empty_like(eta)
    log_jac = 0.0
    at = 0
    for block in space.blocks:
        e = eta[at:at + block.dim]
        sup = block.support
        if isinstance(sup, Positive):
            theta[at:at + block.dim] = np.exp(e)
            log_jac += float(np.sum(e))
        elif isinstance(sup, Interval):
            width = sup.hi - sup.lo
            theta[at:at + block.dim] = sup.lo + width * _sigmoid(e)
            log_jac += float(block.dim * math.log(width)
                             - np.sum(_softplus(e)) - np.sum(_softplus(-e)))
        else:
            theta[at:at + block.dim] = e
        at += block.dim
    return theta, log_jac


def constrain_matrix(space: ParameterSpace, etas: np.ndarray) -> np.ndarray:
    """Apply the constraining map row-wise to an (N, d) matrix.

    Column-wise elementwise transforms, so each row agrees bit-for-bit
    with a scalar :func:`from_unconstrained` call on it.
    """
    etas = np.asarray(etas, dtype=float)
    if etas.ndim != 2 or etas.shape[1] != space.d:
        raise DimensionError(f"expected (N, {space.d}), got {etas.shape}")
    out = np.empty_like(etas)
    at = 0
    for block in space.blocks:
        e = etas[:, at:at + block.dim]
        sup = block.support
        if isinstance(sup, Positive):
            out[:, at:at + block.dim] = np.exp(e)
        elif isinstance(sup, Interval):
            out[:, at:at + block.dim] = sup.lo + (sup.hi - sup.lo) * _sigmoid(e)
        else:
            out[:, at:at + block.dim] = e
        at += block.dim
    return out
