# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of kernels._reference.

Must stay bit-identical to the reference backend: same per-element
expressions, same sequential accumulation order over the sample index.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

EDGE_CLAMP = 0
EDGE_ZERO = 1


def fractional_read(x, rho, int edge=0):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rv = np.ascontiguousarray(rho, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t m = rv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef Py_ssize_t t, i
    cdef double r, f, a, b
    if edge == 0:
        for t in range(m):
            r = rv[t]
            if r < 0.0:
                r = 0.0
            if r > n - 1.0:
                r = n - 1.0
            i = <Py_ssize_t>r  # r >= 0, truncation == floor
            if i > n - 2:
                i = n - 2
            if i < 0:
                i = 0
            f = r - i
            a = xv[i]
            b = xv[i + 1] if i + 1 <= n - 1 else xv[n - 1]
            out[t] = (1.0 - f) * a + f * b
    elif edge == 1:
        for t in range(m):
            r = rv[t]
            i = <Py_ssize_t>r
            if r < 0.0 and r != i:  # truncation rounds toward zero; floor for negatives
                i -= 1
            f = r - i
            a = xv[i] if 0 <= i < n else 0.0
            b = xv[i + 1] if 0 <= i + 1 < n else 0.0
            out[t] = (1.0 - f) * a + f * b
    else:
        raise ValueError(f"unknown edge mode {edge}")
    return out


def shift_l2_min_per_segment(est, ref, int seg_len, denom, penalty_plus1):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ev = np.ascontiguousarray(est, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rv = np.ascontiguousarray(ref, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dv = np.ascontiguousarray(denom, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wv = np.ascontiguousarray(penalty_plus1, dtype=np.float64)
    cdef Py_ssize_t L = seg_len
    cdef Py_ssize_t n_seg = dv.shape[0]
    cdef Py_ssize_t n_off = 2 * L + 1
    cdef Py_ssize_t T = rv.shape[0]
    if wv.shape[0] != n_off:
        raise ValueError("penalty vector must have length 2*seg_len + 1")
    if n_seg * L > ev.shape[0] or ev.shape[0] != T:
        raise ValueError("segment layout exceeds signal length")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n_seg, dtype=np.float64)
    cdef Py_ssize_t n, j, t, base, ridx
    cdef double acc, d, rval, val, best, dn
    for n in range(n_seg):
        base = n * L
        dn = dv[n]
        best = np.inf
        for j in range(n_off):
            acc = 0.0
            for t in range(L):
                ridx = base + t + j - L
                rval = rv[ridx] if 0 <= ridx < T else 0.0
                d = (ev[base + t] - rval) / dn
                acc += d * d
            val = (acc / L + 1.0) * wv[j] - 1.0
            if val < best:
                best = val
        out[n] = best
    return out
