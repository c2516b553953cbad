"""Benchmark the numba kernels against their pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--frames N] [--size HxW]

Times the hot per-pixel kernels on synthetic frames at a generation-like
resolution. The same dispatch can be forced package-wide with CTRACK_NUMBA=0;
here both implementations are called directly so one process covers both.
"""

import argparse
import time

import numpy as np

from ctrack import kernels


def timeit(fn, *args, repeat=5):
    fn(*args)  # warm-up (numba compilation)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--frames", type=int, default=8)
    parser.add_argument("--size", default="480x832")
    args = parser.parse_args()
    h, w = (int(x) for x in args.size.split("x"))

    rng = np.random.default_rng(0)
    frame = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    frame[:40, :40] = (255, 30, 30)
    hsv = kernels._hsv_from_rgb_np(frame)

    if not kernels.NUMBA_ACTIVE:
        print("numba path unavailable (CTRACK_NUMBA=0 or import failure); "
              "benchmarking numpy only")

    cases = [
        ("hsv_from_rgb", (frame,)),
        ("rgb_from_hsv", (hsv,)),
        ("rebalance_frame", (frame, -30.0, 10.0, 80.0, 30.0, 80.0)),
        ("detect_in_disk", (frame, w / 2, h / 2, 90.0, -10.0, 5.0,
                            150.0, 255.0, 150.0, 255.0)),
        ("paint_disk", None),  # special-cased below (color arg types differ)
    ]

    print(f"frame {h}x{w}, best of 5 (seconds)")
    print(f"{'kernel':18s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, call_args in cases:
        if name == "paint_disk":
            t_np = timeit(kernels._paint_disk_np, frame, w / 2, h / 2, 40.0,
                          np.asarray((255, 0, 0), np.uint8))
            t_nb = (timeit(kernels._paint_disk_nb, frame, w / 2, h / 2, 40.0,
                           np.uint8(255), np.uint8(0), np.uint8(0))
                    if kernels.NUMBA_ACTIVE else None)
        else:
            t_np = timeit(getattr(kernels, f"_{name}_np"), *call_args)
            t_nb = (timeit(getattr(kernels, f"_{name}_nb"), *call_args)
                    if kernels.NUMBA_ACTIVE else None)
        if t_nb is None:
            print(f"{name:18s} {t_np:10.5f} {'-':>10s} {'-':>8s}")
        else:
            print(f"{name:18s} {t_np:10.5f} {t_nb:10.5f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
