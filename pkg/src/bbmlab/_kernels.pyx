# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Heisenberg distance kernels.

Scalar-loop twin of ``_kernels_py``; see that module for the numerical
layout (theta / w charts, series switch, bracketed Newton).  Signatures
and semantics are identical so the two backends are interchangeable.
"""

from libc.math cimport M_PI, cos, fabs, sin, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double TWO_PI = 2.0 * M_PI
cdef double H_SWITCH = M_PI / 2.0
cdef double T_HUGE = 1e30
# largest double strictly below 1; keeps h_inverse inside the open interval
cdef double S_MAX = 0.9999999999999999
cdef double THETA_SERIES = 0.5
cdef int MAXIT = 80

cdef double HC0 = 1.0 / 3.0
cdef double HC1 = 1.0 / 90.0
cdef double HC2 = 1.0 / 2520.0
cdef double HC3 = 1.0 / 75600.0
cdef double HC4 = 1.0 / 2395008.0
cdef double HC5 = 691.0 / 54486432000.0
cdef double HC6 = 1.0 / 2668723200.0

cdef double HP0 = 1.0 / 3.0
cdef double HP1 = 1.0 / 30.0
cdef double HP2 = 1.0 / 504.0
cdef double HP3 = 1.0 / 10800.0
cdef double HP4 = 1.0 / 266112.0
cdef double HP5 = 691.0 / 4953312000.0


cdef inline double _h_theta(double th) nogil:
    cdef double t2, half
    if th < THETA_SERIES:
        t2 = th * th
        return th * (HC0 + t2 * (HC1 + t2 * (HC2 + t2 * (HC3 + t2 * (HC4 + t2 * (HC5 + t2 * HC6))))))
    half = sin(0.5 * th)
    return (th - sin(th)) / (2.0 * half * half)


cdef inline double _hp_theta(double th) nogil:
    cdef double t2, s, omc
    if th < THETA_SERIES:
        t2 = th * th
        return HP0 + t2 * (HP1 + t2 * (HP2 + t2 * (HP3 + t2 * (HP4 + t2 * HP5))))
    s = sin(th)
    omc = 2.0 * sin(0.5 * th) ** 2
    return (omc * omc - (th - s) * s) / (omc * omc)


cdef inline double _hw(double w) nogil:
    cdef double sw = sin(M_PI * w)
    return (TWO_PI * (1.0 - w) + sin(TWO_PI * w)) / (2.0 * sw * sw)


cdef inline double _hw_deriv(double w) nogil:
    cdef double sw = sin(M_PI * w)
    return TWO_PI * (M_PI * (w - 1.0) * cos(M_PI * w) - sw) / (sw * sw * sw)


cdef inline double _solve_theta(double t) nogil:
    """Solve _h_theta(theta) = t on [0, pi] for 0 <= t <= pi/2."""
    cdef double lo = 0.0, hi = M_PI
    cdef double th, f, nxt
    cdef int i
    if t <= 0.0:
        return 0.0
    th = 3.0 * t
    if th > 3.0:
        th = 3.0
    for i in range(MAXIT):
        f = _h_theta(th) - t
        if f < 0.0:
            lo = th
        else:
            hi = th
        nxt = th - f / _hp_theta(th)
        if not (nxt > lo and nxt < hi):
            nxt = 0.5 * (lo + hi)
        if fabs(nxt - th) <= 2e-16 * nxt + 1e-300:
            return nxt
        th = nxt
    return th


cdef inline double _solve_w(double t) nogil:
    """Solve _hw(w) = t on (0, 1/2] for t >= pi/2 (decreasing)."""
    cdef double lo = 0.0, hi = 0.5
    cdef double w, f, nxt
    cdef int i
    w = 1.0 / sqrt(M_PI * (t - M_PI / 3.0) + 1e-300)
    if w > 0.5:
        w = 0.5
    for i in range(MAXIT):
        f = _hw(w) - t
        if f > 0.0:
            lo = w
        else:
            hi = w
        nxt = w - f / _hw_deriv(w)
        if not (nxt > lo and nxt < hi):
            nxt = 0.5 * (lo + hi)
        if fabs(nxt - w) <= 2e-16 * nxt + 1e-300:
            return nxt
        w = nxt
    return w


cdef inline double _d0_one(double x1, double x2, double x3) nogil:
    cdef double rho2 = x1 * x1 + x2 * x2
    cdef double a3 = fabs(x3)
    cdef double u, rho, half, pw
    if rho2 == 0.0:
        return sqrt(M_PI * a3)
    u = a3 / rho2
    rho = sqrt(rho2)
    if u < H_SWITCH:
        half = 0.5 * _solve_theta(u)
        return (a3 / rho) * sin(half) + rho * cos(half)
    if u < T_HUGE:
        pw = M_PI * _solve_w(u)
        return (a3 / rho) * sin(pw) - rho * cos(pw)
    return sqrt(M_PI * a3)


def h_profile(const double[::1] s):
    cdef Py_ssize_t n = s.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double sa, v
    for i in range(n):
        sa = fabs(s[i])
        if sa > 0.5:
            v = _hw(1.0 - sa)
        else:
            v = _h_theta(TWO_PI * sa)
        out[i] = v if s[i] >= 0.0 else -v
    return out_arr


def h_inverse(const double[::1] t):
    cdef Py_ssize_t n = t.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double ta, v
    for i in range(n):
        ta = fabs(t[i])
        if ta < H_SWITCH:
            v = _solve_theta(ta) / TWO_PI
        elif ta < T_HUGE:
            v = 1.0 - _solve_w(ta)
        else:
            v = 1.0 - 1.0 / sqrt(M_PI * ta)
            if v > S_MAX:
                v = S_MAX
        out[i] = v if t[i] >= 0.0 else -v
    return out_arr


def d0(const double[::1] x1, const double[::1] x2, const double[::1] x3):
    cdef Py_ssize_t n = x1.shape[0]
    if x2.shape[0] != n or x3.shape[0] != n:
        raise ValueError("coordinate arrays must have equal length")
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = _d0_one(x1[i], x2[i], x3[i])
    return out_arr
