#!/usr/bin/env python3
"""Timing comparison of the numba kernels against the pure-numpy fallbacks.

Runs the three hot kernels (simultaneous root iteration, argument-principle
quadrature, circle log-statistics) on representative workloads with both
implementations and prints a table.  The numpy path is always available;
when numba is missing (or RANDFUN_NUMBA=0) only that column appears.

Usage: python benchmarks/bench_kernels.py [--degree 48] [--polys 200]
"""

import argparse
import math
import time

import numpy as np

from randfun import _kernels
from randfun._philox import gaussian_matrix


def make_polys(n_polys, degree, r=2.0, seed=123):
    mags = np.exp(
        np.array([-0.5 * math.lgamma(n + 1) + n * math.log(r)
                  for n in range(degree + 1)])
    )
    xi = gaussian_matrix(seed, n_polys, degree + 1)
    return xi * mags[None, :]


def timeit(fn, *args, repeat=3):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(n_polys, degree):
    polys = make_polys(n_polys, degree)
    rows = []

    def aberth_all(impl):
        def run():
            acc = 0.0
            for c in polys:
                roots = impl(c, 1e-13, 400)[0]
                acc += float(np.abs(roots).min())
            return acc
        return run

    def argp_all(impl):
        def run():
            total = 0.0
            for c in polys:
                total += impl(c, 0.5, 512).real
            return total
        return run

    def logabs_all(impl):
        def run():
            total = 0.0
            for c in polys:
                total += impl(c, 0.5, 1024)[0]
            return total
        return run

    numpy_impls = {
        "aberth": aberth_all(_kernels._aberth_numpy),
        "argp_mean": argp_all(_kernels._argp_mean_numpy),
        "log_abs_stats": logabs_all(_kernels._log_abs_stats_numpy),
    }
    numba_impls = {}
    if _kernels.HAVE_NUMBA:
        numba_impls = {
            "aberth": aberth_all(_kernels._aberth_numba),
            "argp_mean": argp_all(_kernels._argp_mean_numba),
            "log_abs_stats": logabs_all(_kernels._log_abs_stats_numba),
        }
        for fn in numba_impls.values():
            fn()  # compile outside the timed region

    for name in numpy_impls:
        t_np, v_np = timeit(numpy_impls[name])
        row = {"kernel": name, "numpy_s": t_np, "check": v_np}
        if numba_impls:
            t_nb, v_nb = timeit(numba_impls[name])
            row["numba_s"] = t_nb
            row["speedup"] = t_np / t_nb
            rel = abs(v_np - v_nb) / max(1.0, abs(v_np))
            row["agree"] = rel < 1e-9
        rows.append(row)
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--degree", type=int, default=48)
    ap.add_argument("--polys", type=int, default=200)
    args = ap.parse_args()
    print(f"backend available: numba={_kernels.HAVE_NUMBA} "
          f"(active: {_kernels.BACKEND})")
    print(f"workload: {args.polys} random series truncations, "
          f"degree {args.degree}")
    rows = bench(args.polys, args.degree)
    header = f"{'kernel':<15}{'numpy [s]':>12}"
    if _kernels.HAVE_NUMBA:
        header += f"{'numba [s]':>12}{'speedup':>10}{'agree':>8}"
    print(header)
    for row in rows:
        line = f"{row['kernel']:<15}{row['numpy_s']:>12.4f}"
        if "numba_s" in row:
            line += (f"{row['numba_s']:>12.4f}{row['speedup']:>10.1f}"
                     f"{str(row['agree']):>8}")
        print(line)


if __name__ == "__main__":
    main()
