"""Timing comparison of the compiled and pure-Python key-rate kernels.

Runs the k-grid key-rate scan — the hot loop of the detection-scheme
optimizer and the distance sweeps — through both backends and reports the
per-call time and speedup. Both backends are loaded directly so the result
does not depend on which one the package selected at import.

Usage: python3 benchmarks/bench_kernels.py [n_points] [repeats]
"""

from __future__ import annotations

import sys
import time

import numpy as np

from cvmdi import _kernels_py

try:
    from cvmdi import _kernels
except ImportError:
    _kernels = None

N_POINTS = int(sys.argv[1]) if len(sys.argv) > 1 else 4000
REPEATS = int(sys.argv[2]) if len(sys.argv) > 2 else 30

# a representative mid-distance operating point
V_A = V_B = 40.0
ETA_A = 10.0 ** (-0.2 * 20.0 / 10.0)
ETA_B = 1.0
EPS_A = EPS_B = 0.002
CHI_DET = 0.0
BETA = 0.95


def bench(module, ks):
    best = np.inf
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        rates = module.scan_k_rates(ks, V_A, V_B, ETA_A, ETA_B,
                                    EPS_A, EPS_B, CHI_DET, BETA)
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(rates)


def main() -> int:
    k0 = np.sqrt(2.0 / ETA_B) * (V_B - 1.0) / np.sqrt(V_B * V_B - 1.0)
    ks = k0 * np.logspace(-1, 1, N_POINTS)

    t_py, r_py = bench(_kernels_py, ks)
    print(f"python backend:  {t_py * 1e3:8.3f} ms / scan ({N_POINTS} points)")
    if _kernels is None:
        print("cython backend:  not built (pure-Python install)")
        return 0
    t_cy, r_cy = bench(_kernels, ks)
    print(f"cython backend:  {t_cy * 1e3:8.3f} ms / scan ({N_POINTS} points)")
    print(f"speedup:         {t_py / t_cy:8.2f}x")
    print(f"max |difference|: {np.max(np.abs(r_py - r_cy)):.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
