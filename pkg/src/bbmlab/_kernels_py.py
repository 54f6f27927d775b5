"""NumPy implementation of the Heisenberg distance kernels.

These three functions (`h_profile`, `h_inverse`, `d0`) sit inside every
rejection-sampling and Monte-Carlo loop on the Heisenberg side, so they
are written for batch throughput: all take contiguous float64 arrays and
the Newton solves only touch unconverged lanes.  A compiled twin with the
same signatures lives in ``_kernels.pyx``; ``bbmlab._backend`` picks one
at import time.

Numerical layout
----------------
The profile H(s) = (theta - sin theta) / (1 - cos theta) with
theta = 2*pi*s is evaluated in two charts:

* ``|s| <= 1/2``: directly in theta, with a Taylor series below
  |theta| = 1/2 because the numerator loses all precision to
  cancellation as theta -> 0.
* ``|s| > 1/2``: in the complement variable w = 1 - |s|, where
  H(1-w) = (2*pi*(1-w) + sin(2*pi*w)) / (2*sin(pi*w)^2).  This chart is
  cancellation-free all the way to the pole at s = 1; evaluating
  2*pi*s near s = 1 directly would hit catastrophic cancellation in
  1 - cos(2*pi*s).

``h_inverse`` solves in whichever chart the answer lives in (the switch
value is H(1/2) = pi/2 exactly) with a bracketed Newton iteration, and
uses the asymptote H(1-w) ~ 1/(pi*w^2) both to seed the iteration and to
short-circuit arguments beyond 1e30 where w falls below double spacing.

``d0`` needs sin(pi*s) and cos(pi*s) of the solved s.  Both charts hand
back the angle in a cancellation-free form (theta/2, or pi*w with
sin(pi*s) = sin(pi*w), cos(pi*s) = -cos(pi*w)), which keeps d0 at full
double precision even for points within 1e-14 of the center axis.
"""

import numpy as np

TWO_PI = 2.0 * np.pi
# H(1/2) = (pi - 0)/(1 - (-1)) * 2 = pi/2: exact chart boundary.
H_SWITCH = np.pi / 2.0
# Beyond this the w-chart root is below double resolution; use the asymptote.
T_HUGE = 1e30

# largest double strictly below 1: h_inverse output is pinned inside the
# open interval (-1, 1) even when 1 - 1/sqrt(pi t) would round to 1.0
S_MAX = float(np.nextafter(1.0, 0.0))
THETA_SERIES = 0.5
_MAXIT = 80

# Taylor coefficients of (theta - sin theta)/(1 - cos theta) and its
# theta-derivative about 0.  With the series cut at |theta| < 1/2 the
# truncation error of the last retained term is below 1e-15 relative.
_H_SER = (
    1.0 / 3.0,
    1.0 / 90.0,
    1.0 / 2520.0,
    1.0 / 75600.0,
    1.0 / 2395008.0,
    691.0 / 54486432000.0,
    1.0 / 2668723200.0,
)
_HP_SER = (
    1.0 / 3.0,
    1.0 / 30.0,
    1.0 / 504.0,
    1.0 / 10800.0,
    1.0 / 266112.0,
    691.0 / 4953312000.0,
)


def _h_theta(theta):
    """(theta - sin theta)/(1 - cos theta) for theta in [0, pi]."""
    out = np.empty_like(theta)
    small = theta < THETA_SERIES
    ts = theta[small]
    t2 = ts * ts
    c = _H_SER
    out[small] = ts * (
        c[0] + t2 * (c[1] + t2 * (c[2] + t2 * (c[3] + t2 * (c[4] + t2 * (c[5] + t2 * c[6])))))
    )
    tb = theta[~small]
    half = np.sin(0.5 * tb)
    out[~small] = (tb - np.sin(tb)) / (2.0 * half * half)
    return out


def _hp_theta(theta):
    """theta-derivative of `_h_theta` (positive on [0, pi])."""
    out = np.empty_like(theta)
    small = theta < THETA_SERIES
    ts = theta[small]
    t2 = ts * ts
    c = _HP_SER
    out[small] = c[0] + t2 * (c[1] + t2 * (c[2] + t2 * (c[3] + t2 * (c[4] + t2 * c[5]))))
    tb = theta[~small]
    s = np.sin(tb)
    omc = 2.0 * np.sin(0.5 * tb) ** 2  # 1 - cos(theta), stable form
    out[~small] = (omc * omc - (tb - s) * s) / (omc * omc)
    return out


def _hw(w):
    """H(1 - w) for w in (0, 1/2]; decreasing, no cancellation."""
    sw = np.sin(np.pi * w)
    return (TWO_PI * (1.0 - w) + np.sin(TWO_PI * w)) / (2.0 * sw * sw)


def _hw_deriv(w):
    """w-derivative of `_hw` (negative on (0, 1/2])."""
    sw = np.sin(np.pi * w)
    return TWO_PI * (np.pi * (w - 1.0) * np.cos(np.pi * w) - sw) / (sw * sw * sw)


def _solve_theta(t):
    """Solve (theta - sin theta)/(1 - cos theta) = t on [0, pi], 0 <= t <= pi/2.

    Bracketed Newton; any step leaving the live bracket becomes a
    bisection step, so convergence is guaranteed.  Only unconverged
    lanes are touched after each pass.
    """
    th = np.minimum(3.0 * t, 3.0)
    lo = np.zeros_like(t)
    hi = np.full_like(t, np.pi)
    act = np.flatnonzero(t > 0.0)
    th[t <= 0.0] = 0.0
    for _ in range(_MAXIT):
        if act.size == 0:
            break
        tha = th[act]
        f = _h_theta(tha) - t[act]
        lo_a = lo[act]
        hi_a = hi[act]
        neg = f < 0.0
        lo_a = np.where(neg, tha, lo_a)
        hi_a = np.where(neg, hi_a, tha)
        nxt = tha - f / _hp_theta(tha)
        bad = ~((nxt > lo_a) & (nxt < hi_a))
        if bad.any():
            nxt[bad] = 0.5 * (lo_a[bad] + hi_a[bad])
        done = np.abs(nxt - tha) <= 2e-16 * nxt + 1e-300
        th[act] = nxt
        lo[act] = lo_a
        hi[act] = hi_a
        act = act[~done]
    return th


def _solve_w(t):
    """Solve H(1 - w) = t on (0, 1/2] for t >= pi/2 (decreasing chart)."""
    w = np.minimum(1.0 / np.sqrt(np.pi * (t - np.pi / 3.0) + 1e-300), 0.5)
    lo = np.zeros_like(t)
    hi = np.full_like(t, 0.5)
    act = np.arange(t.size)
    for _ in range(_MAXIT):
        if act.size == 0:
            break
        wa = w[act]
        f = _hw(wa) - t[act]
        lo_a = lo[act]
        hi_a = hi[act]
        pos = f > 0.0  # value too large => w too small
        lo_a = np.where(pos, wa, lo_a)
        hi_a = np.where(pos, hi_a, wa)
        nxt = wa - f / _hw_deriv(wa)
        bad = ~((nxt > lo_a) & (nxt < hi_a))
        if bad.any():
            nxt[bad] = 0.5 * (lo_a[bad] + hi_a[bad])
        done = np.abs(nxt - wa) <= 2e-16 * nxt + 1e-300
        w[act] = nxt
        lo[act] = lo_a
        hi[act] = hi_a
        act = act[~done]
    return w


def h_profile(s):
    """Profile H(s) elementwise; `s` is a float64 array with |s| < 1."""
    sa = np.abs(s)
    out = np.empty_like(sa)
    big = sa > 0.5
    out[big] = _hw(1.0 - sa[big])
    out[~big] = _h_theta(TWO_PI * sa[~big])
    return np.copysign(out, s)


def h_inverse(t):
    """Inverse profile: s in (-1, 1) with H(s) = t, elementwise.

    For |t| >= 1e30 the asymptote s = 1 - 1/sqrt(pi*|t|) takes over;
    once 1/sqrt(pi*|t|) drops below double spacing the result is pinned
    one ulp inside the open interval so |s| < 1 always holds (`d0`
    never round-trips through s in that regime).
    """
    ta = np.abs(t)
    out = np.empty_like(ta)
    lo_m = ta < H_SWITCH
    hi_m = (~lo_m) & (ta < T_HUGE)
    hu_m = ta >= T_HUGE
    if lo_m.any():
        out[lo_m] = _solve_theta(ta[lo_m]) / TWO_PI
    if hi_m.any():
        out[hi_m] = 1.0 - _solve_w(ta[hi_m])
    if hu_m.any():
        out[hu_m] = np.minimum(1.0 - 1.0 / np.sqrt(np.pi * ta[hu_m]), S_MAX)
    return np.copysign(out, t)


def d0(x1, x2, x3):
    """Carnot-Caratheodory gauge d0 elementwise over coordinate arrays.

    With rho^2 = x1^2 + x2^2 and u = x3/rho^2:

        d0 = (|x3|/rho) * sin(pi s) + rho * cos(pi s),   s = H^{-1}(|u|),

    using that d0 is invariant under horizontal rotation and under
    x3 -> -x3.  On the center axis (rho = 0) the limit sqrt(pi*|x3|) is
    returned; the same value is used for u >= 1e30 where the axis
    correction -rho is below double resolution relative to the result.
    """
    rho2 = x1 * x1 + x2 * x2
    a3 = np.abs(x3)
    out = np.sqrt(np.pi * a3)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = a3 / rho2  # rho2 = 0 -> inf or nan; both routed to the axis value
    lo_m = u < H_SWITCH  # nan-safe: comparisons with nan are False
    hi_m = (u >= H_SWITCH) & (u < T_HUGE)
    if lo_m.any():
        half = 0.5 * _solve_theta(u[lo_m])  # pi*s = theta/2
        rho = np.sqrt(rho2[lo_m])
        out[lo_m] = (a3[lo_m] / rho) * np.sin(half) + rho * np.cos(half)
    if hi_m.any():
        pw = np.pi * _solve_w(u[hi_m])  # sin(pi s) = sin(pi w), cos(pi s) = -cos(pi w)
        rho = np.sqrt(rho2[hi_m])
        out[hi_m] = (a3[hi_m] / rho) * np.sin(pw) - rho * np.cos(pw)
    return out
