"""Compare the compiled and numpy scan backends on the large-array scenario.

    python benchmarks/bench_backends.py [--repeats 3] [--snr 15]

Prints the best wall time per backend and method, the speedup, and the
largest relative disagreement between the two spectra.
"""
import argparse
import time

import numpy as np

from alrd_doa.alrd import AlrdConfig, alrd_scan
from alrd_doa.malrd import malrd_scan
from alrd_doa.signal_model import UlaGeometry, generate_snapshots, make_rng, large_array_scenario


def best_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--snr", type=float, default=15.0)
    args = ap.parse_args()

    geometry = UlaGeometry(60)
    batch = generate_snapshots(geometry, large_array_scenario(args.snr), make_rng(0))
    cfg = AlrdConfig()

    print(f"{'method':<6} {'numba s':>9} {'numpy s':>9} {'speedup':>8} {'max rel diff':>13}")
    for name, scan in (("alrd", alrd_scan), ("malrd", malrd_scan)):
        scan(cfg, batch, geometry, backend="numba")  # compile outside the timing
        t_jit, s_jit = best_time(lambda: scan(cfg, batch, geometry, backend="numba"), args.repeats)
        t_np, s_np = best_time(lambda: scan(cfg, batch, geometry, backend="numpy"), args.repeats)
        diff = np.max(np.abs(s_jit.power - s_np.power) / np.abs(s_np.power))
        print(f"{name:<6} {t_jit:9.3f} {t_np:9.3f} {t_np / t_jit:8.1f} {diff:13.1e}")


if __name__ == "__main__":
    main()
