#!/usr/bin/env python3
"""Time the hot kernels on the compiled and pure-numpy backends.

The backend is chosen at import time from SWARM_MIMO_NO_NUMBA, so this
script re-executes itself once with the flag set and prints a side-by-side
table. Run: ``python benchmarks/bench_kernels.py``.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def bench_once():
    from swarm_mimo_sim._accel import USE_NUMBA
    from swarm_mimo_sim._kernels import response_batch, si_ci_arrays
    from swarm_mimo_sim.geometry import rotation_matrices

    rng = np.random.default_rng(0)
    results = {}

    n, m = 100_000, 50
    pos = rng.normal(size=(n, 3)) * 200 + np.array([300.0, 0, 0])
    elem = np.column_stack([np.arange(m) * 0.0625, np.zeros(m), np.zeros(m)])
    gs = rotation_matrices(rng.uniform(-1, 1, m), rng.uniform(-1, 1, m), rng.uniform(0, 6, m))
    uav = rotation_matrices(rng.uniform(-1, 1, n), rng.uniform(-1, 1, n), rng.uniform(0, 6, n))
    w = np.array([1 / np.sqrt(2), 1j / np.sqrt(2)])
    response_batch(pos[:64], elem, gs, uav[:64], w, w)  # warm-up / compile
    reps = 3
    t0 = time.perf_counter()
    for _ in range(reps):
        h, d, a, b = response_batch(pos, elem, gs, uav, w, w)
    results["response_batch_100k_x50_s"] = (time.perf_counter() - t0) / reps
    results["response_checksum"] = float(np.nansum(np.abs(h)))

    x = rng.uniform(1e-3, 300.0, 1_000_000)
    si_ci_arrays(x[:16])
    t0 = time.perf_counter()
    si, ci = si_ci_arrays(x)
    results["si_ci_1e6_s"] = time.perf_counter() - t0
    results["si_ci_checksum"] = float(si.sum() + ci.sum())
    results["backend"] = "numba" if USE_NUMBA else "numpy"
    return results


def main():
    if os.environ.get("_BENCH_CHILD"):
        print(json.dumps(bench_once()))
        return
    here = bench_once()
    env = dict(os.environ, SWARM_MIMO_NO_NUMBA="1", _BENCH_CHILD="1")
    out = subprocess.run([sys.executable, __file__], env=env, capture_output=True, text=True)
    other = json.loads(out.stdout.strip().splitlines()[-1])
    rows = [
        ("cross-dipole response, 100k samples x 50 elements", "response_batch_100k_x50_s"),
        ("sine/cosine integrals, 1e6 points", "si_ci_1e6_s"),
    ]
    print(f"{'kernel':<52} {here['backend']:>10} {other['backend']:>10} {'speedup':>8}")
    for label, key in rows:
        a, b = here[key], other[key]
        print(f"{label:<52} {a:>9.3f}s {b:>9.3f}s {b / a:>7.1f}x")
    for key in ("response_checksum", "si_ci_checksum"):
        drift = abs(here[key] - other[key]) / max(abs(here[key]), 1.0)
        print(f"{key}: relative backend drift {drift:.2e}")


if __name__ == "__main__":
    main()
