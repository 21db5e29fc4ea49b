"""Time the likelihood kernels: compiled path vs numpy fallback.

Runs each per-observation log-density kernel on a shape typical of the
bundled experiments and reports the median wall time per call for both
implementations, plus the speedup. Invoke from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --repeats 200 --t-scale 2
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from dcbats.models import kernels

# (kernel name, T for the default scale, argument builder)
# Shapes mirror the bundled configs: AR regression at T=5000, GARCH and
# the bivariate model at T=2000, the binary model at T=10000, and a
# 2-dimensional state space at T=1000.


def _ar_error_args(T, rng):
    return (rng.standard_normal(T), rng.standard_normal(T),
            0.3, 0.5, 0.2, 1.0)


def _garch_args(T, rng):
    return (rng.standard_normal(T), 0.3,
            np.full(3, 0.05), np.full(5, 0.1), 5)


def _binary_args(T, rng):
    x = (rng.random(T) < 0.5).astype(float)
    return (x, 0.1 * rng.standard_normal(T), 0.0,
            np.full(10, 0.05))


def _ccc_args(T, rng):
    return (rng.standard_normal((T, 2)), 0.1, 0.1,
            0.1, 0.1, 0.5, 0.5, 0.25)


def _kalman_args(T, rng):
    A = np.array([[0.9, -0.3], [0.2, 0.5]])
    return (rng.standard_normal((T, 2)), A, 0.5, 0.5,
            np.array([[-1.1, 0.5], [-0.3, 0.8]]),
            np.zeros(2), np.eye(2), np.zeros(2), np.zeros(2))


CASES = [
    ("ar_error_terms", 5000, _ar_error_args),
    ("garch_terms", 2000, _garch_args),
    ("binary_terms", 10000, _binary_args),
    ("ccc_terms", 2000, _ccc_args),
    ("kalman_terms", 1000, _kalman_args),
]


def _time_call(fn, args, repeats: int) -> float:
    fn(*args)  # warm-up: jit compile / cache touch
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=100,
                        help="timed calls per kernel (default 100)")
    parser.add_argument("--t-scale", type=float, default=1.0,
                        help="multiply every series length by this factor")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if kernels.NUMBA_IMPLS is None:
        print("numba unavailable; timing the numpy path only")

    rng = np.random.default_rng(args.seed)
    rows = []
    for name, base_t, build in CASES:
        T = max(8, int(base_t * args.t_scale))
        call_args = build(T, rng)
        np_time = _time_call(kernels.NUMPY_IMPLS[name], call_args,
                             args.repeats)
        if kernels.NUMBA_IMPLS is not None:
            nb_time = _time_call(kernels.NUMBA_IMPLS[name], call_args,
                                 args.repeats)
            rows.append((name, T, np_time, nb_time, np_time / nb_time))
        else:
            rows.append((name, T, np_time, None, None))

    header = f"{'kernel':<16} {'T':>6} {'numpy':>12} {'numba':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, T, np_time, nb_time, speedup in rows:
        np_s = f"{np_time * 1e6:10.1f}us"
        if nb_time is None:
            print(f"{name:<16} {T:>6} {np_s:>12} {'-':>12} {'-':>8}")
        else:
            nb_s = f"{nb_time * 1e6:10.1f}us"
            print(f"{name:<16} {T:>6} {np_s:>12} {nb_s:>12} {speedup:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
