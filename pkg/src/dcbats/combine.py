"""Combining subsequence posteriors: quantile averaging in 1-D Wasserstein-2.

For one-dimensional marginals the W2 barycenter of empirical measures has
a closed form: average the quantile functions pointwise in u. With equal
sample counts that collapses to averaging order statistics row by row,
which is what everything here reduces to on the happy path.

Quantiles are the left-continuous generalized inverse of the empirical
CDF: the smallest order statistic whose index fraction reaches u. No
interpolation anywhere, so every quantile is an actual draw and the
pseudo-draws are exact averages of actual draws.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DrawSet, LinearFunctional
from .errors import (
    DimensionError,
    DomainError,
    EmptyInputError,
    LengthMismatchError,
    SpaceMismatchError,
)


@dataclass(frozen=True, eq=False)
class BarycenterResult:
    """Barycenter quantile function sampled on a grid.

    u_grid : shape (n,), strictly increasing points in (0, 1].
    q_bar : shape (n,), averaged subsequence quantiles at u_grid.
    pseudo_draws : shape (S,), equal-count case only; rowwise means of the
        sorted per-subsequence draws, themselves a sample from the
        barycenter and equal to q_bar on the grid u_i = i/S. None when
        the quantile functions were evaluated on an arbitrary grid.
    functional : the scalar projection that produced the draws, or None
        for raw sample vectors.
    """

    u_grid: np.ndarray
    q_bar: np.ndarray
    pseudo_draws: np.ndarray | None
    functional: LinearFunctional | None = None

    def __post_init__(self):
        for name in ("u_grid", "q_bar", "pseudo_draws"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.ascontiguousarray(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.u_grid.shape != self.q_bar.shape:
            raise LengthMismatchError("u_grid and q_bar differ in length")


def functional_draws(draws, functional: LinearFunctional) -> np.ndarray:
    """Scalar functional a'theta + b applied to each draw.

    Accepts a DrawSet or a plain (S, d) array.
    """
    if isinstance(draws, DrawSet):
        draws = draws.draws
    draws = np.asarray(draws, dtype=float)
    if draws.ndim != 2:
        raise DomainError(f"draws must be 2-d, got ndim={draws.ndim}")
    a = functional.a
    if a.shape != (draws.shape[1],):
        raise DimensionError(
            f"functional has dim {a.shape[0]}, draws have dim {draws.shape[1]}"
        )
    return draws @ a + functional.b


def empirical_quantile(samples: np.ndarray, u: float) -> float:
    """Left-continuous empirical quantile: smallest x_(j) with j/S >= u.

    u = 1 returns the maximum (the grid u_i = i/S reaches it), so the
    accepted domain is (0, 1]. The index is found by integer arithmetic
    and then corrected by direct comparison, so the j/S >= u test is
    decided by float comparison rather than the rounding of an
    intermediate ceil.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    s = samples.size
    if s == 0:
        raise EmptyInputError("no samples")
    if not 0.0 < u <= 1.0:
        raise DomainError(f"u must be in (0, 1], got {u}")
    j = math.ceil(u * s)
    while j > 1 and (j - 1) / s >= u:
        j -= 1
    while j / s < u:
        j += 1
    srt = np.sort(samples)
    return float(srt[j - 1])


def _sorted_columns(draw_sets, functional: LinearFunctional | None):
    if len(draw_sets) == 0:
        raise EmptyInputError("no draw sets to combine")
    cols = []
    for ds in draw_sets:
        draws = ds.draws if isinstance(ds, DrawSet) else np.asarray(ds, dtype=float)
        if draws.ndim == 1:
            draws = draws[:, None]
        if functional is None:
            if draws.shape[1] != 1:
                raise DomainError(
                    "a functional is required for multivariate draws"
                )
            vals = draws[:, 0]
        else:
            vals = functional_draws(draws, functional)
        if vals.size == 0:
            raise EmptyInputError("a draw set is empty")
        cols.append(np.sort(vals))
    return cols


def _grid_quantiles(cols, grid: np.ndarray) -> np.ndarray:
    q_bar = np.zeros(grid.size)
    for col in cols:
        s = col.size
        # vectorized form of the empirical_quantile index rule
        j = np.ceil(grid * s).astype(np.int64)
        j = np.where((j > 1) & ((j - 1) / s >= grid), j - 1, j)
        j = np.where(j / s < grid, j + 1, j)
        q_bar += col[j - 1]
    q_bar /= len(cols)
    return q_bar


def barycenter_1d(draw_sets, functional: LinearFunctional | None = None,
                  u_grid: np.ndarray | None = None,
                  strict: bool = True) -> BarycenterResult:
    """W2 barycenter of the scalar functional across subsequence draws.

    Equal sample counts (the native output of run_dcbats) and no explicit
    grid: quantile averaging is rowwise averaging of sorted columns, the
    grid is u_i = i/S, and the averages double as pseudo-draws. Unequal
    counts raise LengthMismatchError unless strict=False, which falls
    back to evaluating every quantile function on the common grid
    u_i = (i - 1/2)/S_max. An explicit u_grid always evaluates on that
    grid; neither fallback produces pseudo-draws.
    """
    cols = _sorted_columns(draw_sets, functional)
    sizes = sorted({c.size for c in cols})
    if u_grid is None and len(sizes) == 1:
        s = sizes[0]
        stacked = np.stack(cols, axis=0)
        pseudo = stacked.mean(axis=0)
        grid = np.arange(1, s + 1) / s
        return BarycenterResult(u_grid=grid, q_bar=pseudo.copy(),
                                pseudo_draws=pseudo, functional=functional)
    if u_grid is None:
        if strict:
            raise LengthMismatchError(
                f"draw sets differ in size {sizes}; pass strict=False or an "
                "explicit u_grid to combine on a common quantile grid"
            )
        s_max = sizes[-1]
        u_grid = (np.arange(1, s_max + 1) - 0.5) / s_max
    grid = np.ascontiguousarray(u_grid, dtype=float).ravel()
    if grid.size == 0:
        raise EmptyInputError("u_grid is empty")
    if np.any(grid <= 0.0) or np.any(grid > 1.0):
        raise DomainError("u_grid values must lie in (0, 1]")
    if np.any(np.diff(grid) <= 0.0):
        raise DomainError("u_grid must be strictly increasing")
    return BarycenterResult(u_grid=grid, q_bar=_grid_quantiles(cols, grid),
                            pseudo_draws=None, functional=functional)


def w2_distance_1d(a: np.ndarray, b: np.ndarray) -> float:
    """W2 distance between two equal-size scalar samples.

    Root mean squared gap between sorted samples; the optimal coupling in
    1-D is the monotone one.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0:
        raise EmptyInputError("empty sample")
    if a.size != b.size:
        raise LengthMismatchError(f"sample sizes differ: {a.size} vs {b.size}")
    diff = np.sort(a) - np.sort(b)
    return float(math.sqrt(float(diff @ diff) / a.size))


def credible_interval(samples: np.ndarray, level: float = 0.95) -> tuple[float, float]:
    """Central credible interval from empirical quantiles at (1 -+ level)/2.

    Tail masses are rounded to 15 decimals before the quantile lookup:
    (1 - 0.95)/2 lands a few ulp above 0.025 in doubles, which would
    otherwise shift the order statistic by one for decimal levels.
    """
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must be in (0, 1), got {level}")
    lo = empirical_quantile(samples, round((1.0 - level) / 2.0, 15))
    hi = empirical_quantile(samples, round((1.0 + level) / 2.0, 15))
    return lo, hi


def coverage_rate(intervals, truths) -> float:
    """Fraction of closed intervals [lo, hi] containing the matching truth."""
    intervals = list(intervals)
    truths = np.asarray(truths, dtype=float).ravel()
    if len(intervals) == 0:
        raise EmptyInputError("no intervals")
    if len(intervals) != truths.size:
        raise LengthMismatchError(
            f"{len(intervals)} intervals vs {truths.size} truths"
        )
    hits = 0
    for (lo, hi), truth in zip(intervals, truths):
        if not lo <= hi:
            raise DomainError(f"interval has lo > hi: ({lo}, {hi})")
        hits += lo <= truth <= hi
    return hits / len(intervals)


def combine_marginals(draw_sets, level: float = 0.95):
    """Barycenter and credible interval for every coordinate marginal.

    Returns (results, intervals): one BarycenterResult and one (lo, hi)
    per parameter coordinate. All draw sets must share one parameter
    dimension.
    """
    draw_sets = list(draw_sets)
    if len(draw_sets) == 0:
        raise EmptyInputError("no draw sets to combine")
    dims = {ds.d for ds in draw_sets}
    if len(dims) != 1:
        raise SpaceMismatchError(f"draw sets disagree on dimension: {sorted(dims)}")
    d = dims.pop()
    results = []
    intervals = []
    for j in range(d):
        functional = LinearFunctional.coordinate(j, d)
        res = barycenter_1d(draw_sets, functional=functional)
        results.append(res)
        pool = res.pseudo_draws if res.pseudo_draws is not None else res.q_bar
        intervals.append(credible_interval(pool, level))
    return results, intervals
