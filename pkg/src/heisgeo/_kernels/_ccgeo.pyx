# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar geodesy kernels.

Semantics match `_ccgeo_py` function for function; see that module for the
numerical notes (series thresholds, asymptotic cutoff). The win here is the
per-element adaptive bisection in solve_tau and branchy series switches,
which vectorized numpy has to emulate with full-array passes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, M_PI, fabs, sin, sqrt

cnp.import_array()

cdef double TWO_PI = 2.0 * M_PI
cdef double SERIES_CUT = 0.1
cdef double RATIO_ASYMPTOTIC = 1.0e7
cdef double BISECT_LO = 1.0e-8


cdef inline double _omc(double t) noexcept nogil:
    cdef double s = sin(0.5 * t)
    return 2.0 * s * s


cdef inline double _w_sin(double t) noexcept nogil:
    cdef double t2
    if fabs(t) < SERIES_CUT:
        t2 = t * t
        return (t * t2 / 6.0) * (
            1.0 - t2 / 20.0 + t2 * t2 / 840.0
            - t2 * t2 * t2 / 60480.0 + t2 * t2 * t2 * t2 / 6652800.0
        )
    return t - sin(t)


cdef inline double _d_bracket(double t2) noexcept nogil:
    return (
        1.0 - t2 / 15.0 + t2 * t2 / 560.0
        - t2 * t2 * t2 / 37800.0 + t2 * t2 * t2 * t2 / 3991680.0
    )


cdef inline double _d_jac(double t) noexcept nogil:
    cdef double t2
    if fabs(t) < SERIES_CUT:
        t2 = t * t
        return (-t2 * t2 / 12.0) * _d_bracket(t2)
    return t * sin(t) - 2.0 * _omc(t)


cdef inline double _f_tau(double t) noexcept nogil:
    if t == 0.0:
        return INFINITY
    return _omc(t) / _w_sin(t)


cdef inline double _solve_tau(double r) noexcept nogil:
    cdef double a, b, mid
    cdef int i
    if r == INFINITY:
        return 0.0
    if r <= 0.0:
        return TWO_PI
    if r >= RATIO_ASYMPTOTIC:
        return 3.0 / r
    a = BISECT_LO
    b = TWO_PI
    for i in range(120):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if _f_tau(mid) > r:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


cdef inline double _cc_norm(double z2, double t) noexcept nogil:
    cdef double at = fabs(t)
    cdef double tau
    if at == 0.0:
        return sqrt(z2)
    tau = _solve_tau(z2 / at)
    return tau * sqrt(at / (2.0 * _w_sin(tau)))


def omc(cnp.ndarray[cnp.float64_t, ndim=1] tau not None):
    cdef Py_ssize_t n = tau.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] tv = tau, ov = out
    with nogil:
        for i in range(n):
            ov[i] = _omc(tv[i])
    return out


def w_sin(cnp.ndarray[cnp.float64_t, ndim=1] tau not None):
    cdef Py_ssize_t n = tau.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] tv = tau, ov = out
    with nogil:
        for i in range(n):
            ov[i] = _w_sin(tv[i])
    return out


def d_jac(cnp.ndarray[cnp.float64_t, ndim=1] tau not None):
    cdef Py_ssize_t n = tau.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] tv = tau, ov = out
    with nogil:
        for i in range(n):
            ov[i] = _d_jac(tv[i])
    return out


def f_tau(cnp.ndarray[cnp.float64_t, ndim=1] tau not None):
    cdef Py_ssize_t n = tau.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] tv = tau, ov = out
    with nogil:
        for i in range(n):
            ov[i] = _f_tau(tv[i])
    return out


def solve_tau(cnp.ndarray[cnp.float64_t, ndim=1] ratio not None):
    cdef Py_ssize_t n = ratio.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] rv = ratio, ov = out
    with nogil:
        for i in range(n):
            ov[i] = _solve_tau(rv[i])
    return out


def cc_norm(cnp.ndarray[cnp.float64_t, ndim=1] z2 not None,
            cnp.ndarray[cnp.float64_t, ndim=1] t not None):
    cdef Py_ssize_t n = z2.shape[0], i
    if t.shape[0] != n:
        raise ValueError("z2 and t must have equal length")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] zv = z2, tv = t, ov = out
    with nogil:
        for i in range(n):
            ov[i] = _cc_norm(zv[i], tv[i])
    return out


def contract_jacobian(cnp.ndarray[cnp.float64_t, ndim=1] tau not None, double sbar):
    cdef Py_ssize_t n = tau.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] tv = tau, ov = out
    cdef double a, t2, s5 = sbar ** 5
    with nogil:
        for i in range(n):
            a = fabs(tv[i])
            if a < SERIES_CUT:
                t2 = a * a
                ov[i] = s5 * _d_bracket(sbar * sbar * t2) / _d_bracket(t2)
            else:
                ov[i] = sbar * _d_jac(sbar * a) / _d_jac(a)
    return out


def chart_jacobian(cnp.ndarray[cnp.float64_t, ndim=1] phi not None,
                   cnp.ndarray[cnp.float64_t, ndim=1] rho not None):
    cdef Py_ssize_t n = phi.shape[0], i
    if rho.shape[0] != n:
        raise ValueError("phi and rho must have equal length")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] pv = phi, rv = rho, ov = out
    cdef double tau, r4
    with nogil:
        for i in range(n):
            tau = pv[i] * rv[i]
            if fabs(tau) < SERIES_CUT:
                r4 = rv[i] ** 4
                ov[i] = (r4 / 3.0) * _d_bracket(tau * tau)
            else:
                ov[i] = -4.0 * _d_jac(tau) / pv[i] ** 4
    return out
