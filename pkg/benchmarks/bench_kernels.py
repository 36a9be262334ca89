#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy reference backend.

Run after installing the package:

    python benchmarks/bench_kernels.py

Both backends are exercised on the same inputs; outputs are checked for
bit-identity before timing.
"""

import time

import numpy as np

from soundfield.audio import blackman
from soundfield.kernels import EDGE_CLAMP, _reference

try:
    from soundfield.kernels import _compiled
except ImportError:
    _compiled = None


def timeit(fn, *args, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_shift_l2(n_seconds=1.0, seg_len=128):
    sr = 48000
    n = int(n_seconds * sr)
    rng = np.random.default_rng(0)
    est = rng.standard_normal(n)
    ref = est + 0.1 * rng.standard_normal(n)
    n_seg = n // seg_len
    denom = rng.uniform(0.5, 1.5, n_seg)
    wplus1 = 100.0 * (1.0 - blackman(2 * seg_len + 1)) + 1.0
    rows = []
    t_ref, out_ref = timeit(
        _reference.shift_l2_min_per_segment, est, ref, seg_len, denom, wplus1
    )
    rows.append(("reference", t_ref))
    if _compiled is not None:
        t_c, out_c = timeit(
            _compiled.shift_l2_min_per_segment, est, ref, seg_len, denom, wplus1
        )
        assert (out_ref == out_c).all(), "backends disagree"
        rows.append(("compiled", t_c))
    return f"shift-l2 sweep, {n_seconds:.1f} s audio, L={seg_len}", rows


def bench_fractional_read(n=480000):
    rng = np.random.default_rng(1)
    x = rng.standard_normal(n)
    rho = np.sort(rng.uniform(-10, n + 10, n))
    rows = []
    t_ref, out_ref = timeit(_reference.fractional_read, x, rho, EDGE_CLAMP)
    rows.append(("reference", t_ref))
    if _compiled is not None:
        t_c, out_c = timeit(_compiled.fractional_read, x, rho, EDGE_CLAMP)
        assert (out_ref == out_c).all(), "backends disagree"
        rows.append(("compiled", t_c))
    return f"fractional read, {n} samples", rows


def main():
    if _compiled is None:
        print("compiled extension not available; timing reference backend only\n")
    for title, rows in (bench_shift_l2(), bench_fractional_read()):
        print(title)
        base = rows[0][1]
        for name, t in rows:
            speedup = base / t
            print(f"  {name:>10}: {t * 1e3:8.2f} ms   ({speedup:5.2f}x)")
        print()


if __name__ == "__main__":
    main()
