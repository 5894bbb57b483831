"""Benchmark the jit backend against the pure-numpy fallback.

Runs the hot numeric kernels on representative problem sizes with both
implementations and prints wall times plus speedups.  Usage:

    python3 benchmarks/bench_accel.py [--quick]
"""

import argparse
import time

import numpy as np

from manikern import _hot_numpy
from manikern.kernels import _GL_W, _GL_X, TAIL_LOG

try:
    from manikern import _hot_numba
except ImportError:
    _hot_numba = None

DELTA = 8.0 / 3.0


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def build_cases(quick):
    rng = np.random.default_rng(0)
    n_pts = 400 if quick else 1500
    n_eval = 4000 if quick else 24300
    n_bessel = 20_000 if quick else 200_000
    pts = np.ascontiguousarray(rng.normal(size=(n_pts, 3)))
    coeffs = rng.normal(size=n_pts)
    evals = np.ascontiguousarray(rng.normal(size=(n_eval, 3)))
    r = np.geomspace(1e-3, 50.0, n_bessel)
    return [
        (
            f"riesz forces (N={n_pts}, s=2)",
            lambda impl: impl.riesz_energy_forces(pts, 2.0),
        ),
        (
            f"wendland gram (N={n_pts})",
            lambda impl: impl.wendland_gram(pts, DELTA),
        ),
        (
            f"wendland apply ({n_eval}x{n_pts})",
            lambda impl: impl.wendland_apply(evals, pts, DELTA, coeffs),
        ),
        (
            f"bessel K ({n_bessel} values, mu=1.25)",
            lambda impl: impl.bessel_k_many(1.25, r, _GL_X, _GL_W, TAIL_LOG),
        ),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller sizes")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    cases = build_cases(args.quick)
    if _hot_numba is None:
        print("numba backend unavailable; timing the numpy fallback only")
    else:
        for _, call in cases:  # compile outside the timed region
            call(_hot_numba)

    width = max(len(name) for name, _ in cases)
    header = f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, call in cases:
        t_np = best_of(lambda: call(_hot_numpy), args.repeats)
        if _hot_numba is None:
            print(f"{name:<{width}}  {t_np * 1e3:>8.2f}ms  {'-':>10}  {'-':>8}")
            continue
        t_nb = best_of(lambda: call(_hot_numba), args.repeats)
        print(
            f"{name:<{width}}  {t_np * 1e3:>8.2f}ms  {t_nb * 1e3:>8.2f}ms  "
            f"{t_np / t_nb:>7.1f}x"
        )


if __name__ == "__main__":
    main()
