#!/usr/bin/env python3
"""Benchmark the numba and numpy kernel paths on identical workloads.

Runs each hot kernel (counter-based normals, binned moments) and one
end-to-end Monte Carlo simulate in a subprocess per backend, selected via
PHASEKIN_BACKEND, so each process JIT-compiles (or not) from a clean state.
Numba compile time is excluded by a warmup call before timing.

Usage: python benchmarks/bench_backends.py [--samples N] [--repeats K]
"""

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json
import sys
import time

import numpy as np

from phasekin import kernels
from phasekin.analytic import InitialGaussian
from phasekin.backend import backend_name
from phasekin.kinetics import simulate
from phasekin.forces import Free
from phasekin.regime import Frictionless

n = int(sys.argv[1])
repeats = int(sys.argv[2])


def best_of(fn):
    fn()  # warmup: triggers JIT compilation on the numba path
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


rng = np.random.default_rng(0)
x = rng.normal(size=n)
u = rng.normal(size=n)

results = {
    "backend": backend_name(),
    "normals": best_of(lambda: kernels.normals(1, 1, 0, n, 2)),
    "binned_moments": best_of(
        lambda: kernels.binned_moments(x, u, -8.0, 16.0 / 512, 512)
    ),
    "simulate": best_of(
        lambda: simulate(
            InitialGaussian(), Free(), Frictionless(1.0), [0.5, 1.0, 2.0], n, 7
        )
    ),
}
print(json.dumps(results))
"""


def run_backend(backend, n, repeats):
    env = dict(os.environ, PHASEKIN_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, str(n), str(repeats)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(out.stdout.splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=500000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rows = [run_backend(b, args.samples, args.repeats) for b in ("numpy", "numba")]
    keys = ["normals", "binned_moments", "simulate"]

    print(f"\nN = {args.samples}, best of {args.repeats} (seconds)")
    print(f"{'kernel':<16} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for key in keys:
        t_np, t_nb = rows[0][key], rows[1][key]
        print(f"{key:<16} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
