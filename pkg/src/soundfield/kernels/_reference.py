"""Pure-numpy reference implementations of the hot kernels.

These are the semantics of record: the compiled backend must produce
bit-identical float64 results.  To keep that guarantee, reductions are
accumulated in the same order as the C loops (sequentially over the
sample index), never with numpy's pairwise summation.
"""

from __future__ import annotations

import numpy as np

EDGE_CLAMP = 0
EDGE_ZERO = 1


def fractional_read(x: np.ndarray, rho: np.ndarray, edge: int = EDGE_CLAMP) -> np.ndarray:
    """Read ``x`` at fractional indices ``rho`` with linear interpolation.

    out[t] = (1 - f) * x[i] + f * x[i + 1]   with  i = floor(rho[t]), f = rho[t] - i

    edge=EDGE_CLAMP: reads outside [0, T-1] stick to the first/last sample.
    edge=EDGE_ZERO:  x is treated as 0 outside [0, T-1].
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    rho = np.ascontiguousarray(rho, dtype=np.float64)
    n = x.shape[0]
    if edge == EDGE_CLAMP:
        rc = np.minimum(np.maximum(rho, 0.0), float(n - 1))
        i = np.floor(rc).astype(np.int64)
        np.minimum(i, n - 2, out=i)
        np.maximum(i, 0, out=i)  # n == 1 guard
        f = rc - i
        a = x[i]
        b = x[np.minimum(i + 1, n - 1)]
    elif edge == EDGE_ZERO:
        i = np.floor(rho).astype(np.int64)
        f = rho - i
        lo = np.clip(i, 0, n - 1)
        hi = np.clip(i + 1, 0, n - 1)
        a = np.where((i >= 0) & (i < n), x[lo], 0.0)
        b = np.where((i + 1 >= 0) & (i + 1 < n), x[hi], 0.0)
    else:
        raise ValueError(f"unknown edge mode {edge}")
    return (1.0 - f) * a + f * b


def shift_l2_min_per_segment(
    est: np.ndarray,
    ref: np.ndarray,
    seg_len: int,
    denom: np.ndarray,
    penalty_plus1: np.ndarray,
) -> np.ndarray:
    """Penalized minimum over shift offsets of segment-wise normalized l2.

    For each segment n of length L = seg_len and each offset tau in
    [-L, L] (reads of ``ref`` beyond its bounds are zero):

        l2(n, tau) = (1/L) * sum_t ((est[nL+t] - ref[nL+t+tau]) / denom[n])**2
        out[n]     = min_tau ( (l2(n, tau) + 1) * penalty_plus1[tau+L] - 1 )

    ``penalty_plus1`` is the offset penalty vector plus one, length 2L+1.
    """
    est = np.ascontiguousarray(est, dtype=np.float64)
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    denom = np.ascontiguousarray(denom, dtype=np.float64)
    penalty_plus1 = np.ascontiguousarray(penalty_plus1, dtype=np.float64)
    L = int(seg_len)
    n_seg = denom.shape[0]
    n_off = 2 * L + 1
    if penalty_plus1.shape[0] != n_off:
        raise ValueError("penalty vector must have length 2*seg_len + 1")
    if n_seg * L > est.shape[0] or est.shape[0] != ref.shape[0]:
        raise ValueError("segment layout exceeds signal length")

    refp = np.concatenate((np.zeros(L), ref, np.zeros(L)))
    # windows[i] = refp[i : i + n_off]; ref[base+t+tau] = windows[base+t][tau+L]
    windows = np.lib.stride_tricks.sliding_window_view(refp, n_off)
    bases = np.arange(n_seg, dtype=np.int64) * L
    segs = est[: n_seg * L].reshape(n_seg, L)

    acc = np.zeros((n_seg, n_off))
    inv = denom[:, None]
    for t in range(L):  # sequential over t: same accumulation order as the C loop
        d = (segs[:, t : t + 1] - windows[bases + t]) / inv
        acc += d * d
    vals = (acc / L + 1.0) * penalty_plus1[None, :] - 1.0
    return vals.min(axis=1)
