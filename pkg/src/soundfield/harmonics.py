"""Spherical harmonics and spherical Bessel/Hankel radial functions.

Complex orthonormal spherical harmonics with the Condon-Shortley phase,
indexed flat as ``n**2 + n + m``.  Associated Legendre values are built
by stable recurrences with the normalization folded in at every step,
so no intermediate overflows occur even at high order.  Radial
functions: ``j_n`` by downward (Miller) recurrence where the upward
direction is unstable, and the outgoing spherical Hankel function
``h_n = j_n + i*y_n`` by upward recurrence from its closed forms at
orders 0 and 1 (upward is stable because the ``y_n`` part dominates).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, InvalidArgument

# Y_00 = 1 / (2 sqrt(pi))
_Y00 = 0.28209479177387814


def flat_index(n: int, m: int) -> int:
    """Flat coefficient index of order ``n``, degree ``m``: n^2 + n + m."""
    if abs(m) > n:
        raise InvalidArgument(f"|m| <= n required, got n={n}, m={m}")
    return n * n + n + m


def n_coeffs(order: int) -> int:
    return (order + 1) ** 2


def orders_for_flat(order: int) -> np.ndarray:
    """Order n of every flat index in [0, (order+1)^2)."""
    return np.repeat(np.arange(order + 1), 2 * np.arange(order + 1) + 1)


def sh_matrix(order: int, azimuth, polar) -> np.ndarray:
    """Spherical harmonics up to ``order`` at the given angles.

    Parameters
    ----------
    order : int
        Maximum harmonic order (>= 0).
    azimuth, polar : array_like, shape (Q,)
        Azimuth in [0, 2pi) and colatitude in [0, pi].

    Returns
    -------
    (Q, (order+1)**2) complex ndarray
        Columns in flat index order n^2 + n + m.
    """
    if order < 0:
        raise InvalidArgument("order must be >= 0")
    az = np.atleast_1d(np.asarray(azimuth, dtype=np.float64))
    po = np.atleast_1d(np.asarray(polar, dtype=np.float64))
    if az.shape != po.shape or az.ndim != 1:
        raise InvalidArgument("azimuth and polar must be 1-D arrays of equal length")
    if (po < 0).any() or (po > np.pi).any():
        raise InvalidArgument("polar angle must lie in [0, pi]")
    q = az.shape[0]
    ct, st = np.cos(po), np.sin(po)

    # p[n][m] = fully-normalized associated Legendre at cos(polar), m >= 0
    p = [[None] * (order + 1) for _ in range(order + 1)]
    p[0][0] = np.full(q, _Y00)
    for m in range(1, order + 1):
        p[m][m] = -math.sqrt((2 * m + 1) / (2.0 * m)) * st * p[m - 1][m - 1]
    for m in range(order):
        p[m + 1][m] = math.sqrt(2 * m + 3) * ct * p[m][m]
    for m in range(order + 1):
        for n in range(m + 2, order + 1):
            a = math.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
            b = math.sqrt(((n - 1.0) ** 2 - m * m) / (4.0 * (n - 1.0) ** 2 - 1.0))
            p[n][m] = a * (ct * p[n - 1][m] - b * p[n - 2][m])

    phase = np.exp(1j * az[:, None] * np.arange(order + 1)[None, :])
    out = np.empty((q, n_coeffs(order)), dtype=np.complex128)
    for n in range(order + 1):
        for m in range(n + 1):
            col = p[n][m] * phase[:, m]
            out[:, n * n + n + m] = col
            if m:
                out[:, n * n + n - m] = (-1.0) ** m * np.conj(col)
    return out


def sph_harmonic(n: int, m: int, azimuth, polar):
    """Single complex orthonormal spherical harmonic Y_nm.

    Scalar angles give a complex scalar; arrays give a matching array.
    Satisfies Y_{n,-m} = (-1)^m * conj(Y_{n,m}).
    """
    idx = flat_index(n, m)
    scalar = np.isscalar(azimuth) and np.isscalar(polar)
    az = np.atleast_1d(np.asarray(azimuth, dtype=np.float64)).ravel()
    po = np.atleast_1d(np.asarray(polar, dtype=np.float64)).ravel()
    az, po = np.broadcast_arrays(az, po)
    vals = sh_matrix(n, az, po)[:, idx]
    return complex(vals[0]) if scalar else vals


def _bessel_j_scalar(n: int, x: float) -> float:
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    j0 = math.sin(x) / x
    if n == 0:
        return j0
    j1 = math.sin(x) / (x * x) - math.cos(x) / x
    if n == 1:
        return j1
    if x >= n:
        # upward recurrence is stable when the argument exceeds the order
        jm, jc = j0, j1
        for k in range(1, n):
            jm, jc = jc, (2 * k + 1) / x * jc - jm
        return jc
    # Miller's downward recurrence with normalization against j_0
    start = n + int(math.sqrt(40.0 * n)) + 12
    jp = 0.0
    jc = 1e-30
    target = 0.0
    for k in range(start, 0, -1):
        jm = (2 * k + 1) / x * jc - jp
        jp, jc = jc, jm
        if k - 1 == n:
            target = jm
        if abs(jc) > 1e250:
            jc *= 1e-250
            jp *= 1e-250
            target *= 1e-250
    return target * (j0 / jc)


def sph_bessel_j(n: int, x):
    """Spherical Bessel function of the first kind j_n(x), x >= 0."""
    if n < 0:
        raise InvalidArgument("order must be >= 0")
    if np.isscalar(x):
        if x < 0:
            raise InvalidArgument("argument must be >= 0")
        return _bessel_j_scalar(n, float(x))
    xs = np.asarray(x, dtype=np.float64)
    if (xs < 0).any():
        raise InvalidArgument("argument must be >= 0")
    return np.array([_bessel_j_scalar(n, float(v)) for v in xs.ravel()]).reshape(xs.shape)


def hankel_all(order: int, x) -> np.ndarray:
    """Outgoing spherical Hankel h_n(x) for all n in [0, order].

    Parameters
    ----------
    order : int
    x : positive scalar or array

    Returns
    -------
    (order+1,) + x.shape complex ndarray
    """
    if order < 0:
        raise InvalidArgument("order must be >= 0")
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if (xs <= 0).any():
        raise DomainError("spherical Hankel function is singular at x <= 0")
    out = np.empty((order + 1,) + xs.shape, dtype=np.complex128)
    h0 = (np.sin(xs) - 1j * np.cos(xs)) / xs  # -i e^{ix} / x
    out[0] = h0
    if order >= 1:
        out[1] = h0 * (1.0 - 1j * xs) / xs
    for n in range(1, order):
        out[n + 1] = (2 * n + 1) / xs * out[n] - out[n - 1]
    return out


def sph_hankel(n: int, x):
    """Outgoing spherical Hankel function h_n(x) = j_n(x) + i*y_n(x), x > 0."""
    if n < 0:
        raise InvalidArgument("order must be >= 0")
    if np.isscalar(x):
        if x <= 0:
            raise DomainError("spherical Hankel function is singular at x <= 0")
        return complex(hankel_all(n, np.array([float(x)]))[n, 0])
    vals = hankel_all(n, x)[n]
    return vals.reshape(np.asarray(x).shape)
