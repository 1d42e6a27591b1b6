#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the hot kernels (gradient assembly dominates every flow run, four
calls per RK4 step) and a short end-to-end integration under both
backends.  Run after installing the package:

    python benchmarks/bench_backends.py [--n 64] [--reps 300]
"""

import argparse
import time

import numpy as np

from ymhs import FlowConfig, TorusGrid, integrate
from ymhs.kernels import numba_backend, numpy_backend


def timeit(fn, reps):
    fn()  # warmup (and jit compilation for the numba lane)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def bench_kernels(n, reps):
    grid = TorusGrid(n)
    rng = np.random.default_rng(0)
    raw = rng.standard_normal((3, n, n))
    phi = raw / np.sqrt(np.sum(raw * raw, axis=0))
    conn = rng.standard_normal((2, n, n))
    scal = rng.standard_normal((n, n))
    cases = [
        ("central_diff", lambda be: be.central_diff(scal, 0, grid.h)),
        ("cov_deriv_raw", lambda be: be.cov_deriv_raw(phi, conn, grid.h)),
        ("codiff_oneform", lambda be: be.codiff_oneform(conn, grid.h)),
        ("grad_scalar", lambda be: be.grad_scalar(scal, grid.h)),
        ("ymh_gradient", lambda be: be.ymh_gradient(phi, conn, grid.h)),
    ]
    print(f"\nkernels at N={n} ({reps} reps, times in us):")
    print(f"{'kernel':<16}{'numpy':>10}{'numba':>10}{'speedup':>9}")
    for name, call in cases:
        t_np = timeit(lambda: call(numpy_backend), reps) * 1e6
        t_nb = timeit(lambda: call(numba_backend), reps) * 1e6
        print(f"{name:<16}{t_np:>10.1f}{t_nb:>10.1f}{t_np / t_nb:>8.1f}x")


def bench_integration(n):
    import os
    import subprocess
    import sys
    # end-to-end runs go through the dispatch layer, so each backend
    # needs its own process
    code = (
        "import time\n"
        "from ymhs import FlowConfig, TorusGrid, integrate\n"
        "from ymhs.kernels import BACKEND\n"
        f"g = TorusGrid({n})\n"
        "cfg = FlowConfig(system='viscous', epsilon=0.1, dt=1e-3, t_final=0.002,\n"
        "                 report_interval=10**9, k_max=0)\n"
        "integrate(g, cfg)\n"
        "cfg = FlowConfig(system='viscous', epsilon=0.1, dt=1e-3, t_final=0.2,\n"
        "                 report_interval=10**9, k_max=0)\n"
        "t0 = time.perf_counter()\n"
        "integrate(g, cfg)\n"
        "print(f'{BACKEND} {time.perf_counter() - t0:.3f}')\n")
    print(f"\nviscous run, N={n}, 200 steps (seconds):")
    times = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, YMHS_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        name, t = out.stdout.split()
        times[name] = float(t)
        print(f"  {name:<8}{float(t):>8.3f}")
    print(f"  speedup {times['numpy'] / times['numba']:>6.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=64, help="grid points per axis")
    ap.add_argument("--reps", type=int, default=300, help="kernel repetitions")
    args = ap.parse_args()
    bench_kernels(args.n, args.reps)
    bench_integration(args.n)


if __name__ == "__main__":
    main()
