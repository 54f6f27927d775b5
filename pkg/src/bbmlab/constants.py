"""Tangent-space constants for the nonlocal-to-local energy limit.

The Euclidean constant is the p-th absolute moment of one coordinate on
the unit ball,

    C(p, N) = mean over B(0,1) of |z . e|^p
            = Gamma((p+1)/2) Gamma(N/2 + 1) / (Gamma(1/2) Gamma((N+p)/2 + 1)),

computed exactly in rational arithmetic when p is an integer (every
Gamma argument is then a half-integer, so the sqrt(pi) factors cancel)
and via the Gamma formula otherwise.  C(4, 4) = 1/16 exactly.

The Heisenberg constant has no closed form; it is the Monte Carlo mean
of |a z1 + b z2|^p over the unit Koranyi--Carnot ball and is reported
with a standard error.
"""

import math
from fractions import Fraction

import numpy as np
from scipy.special import gamma as _gamma

from . import heisenberg as h1
from .mc import EnergyEstimate, RandomStream, mc_estimate


def _gamma_half(m: int):
    """Gamma(m/2) for integer m >= 1 as (rational, power of sqrt(pi))."""
    if m % 2 == 0:
        return Fraction(math.factorial(m // 2 - 1)), 0
    # Gamma(m/2) = (m-2)!! / 2^((m-1)/2) * sqrt(pi)
    dd = 1
    for k in range(m - 2, 1, -2):
        dd *= k
    return Fraction(dd, 2 ** ((m - 1) // 2)), 1


def c_euclidean_closed(p: float, n: int) -> float:
    """C(p, N); exact (to the float rounding of a rational) for integer p."""
    if p <= 1:
        raise ValueError("exponent p must exceed 1")
    if n < 1 or int(n) != n:
        raise ValueError("dimension must be a positive integer")
    n = int(n)
    if abs(p - round(p)) < 1e-12:
        ip = int(round(p))
        num1, e1 = _gamma_half(ip + 1)
        num2, e2 = _gamma_half(n + 2)
        den1, e3 = _gamma_half(1)
        den2, e4 = _gamma_half(n + ip + 2)
        # the sqrt(pi) powers cancel except for odd p with even N, where
        # a single 1/pi survives (e.g. C(3, 2) = 8 / (15 pi))
        e = e1 + e2 - e3 - e4
        assert e in (0, -2), "unexpected sqrt(pi) bookkeeping"
        frac = float(num1 * num2 / (den1 * den2))
        return frac if e == 0 else frac / math.pi
    return float(
        _gamma((p + 1.0) / 2.0) * _gamma(n / 2.0 + 1.0)
        / (_gamma(0.5) * _gamma((n + p) / 2.0 + 1.0))
    )


def c_euclidean_exact(p: int, n: int) -> Fraction:
    """The same constant as an exact Fraction.  Defined only where the
    value is rational (integer p, not both p odd and N even)."""
    if int(p) != p or p < 2:
        raise ValueError("exact form needs integer p >= 2")
    num1, e1 = _gamma_half(int(p) + 1)
    num2, e2 = _gamma_half(int(n) + 2)
    den1, e3 = _gamma_half(1)
    den2, e4 = _gamma_half(int(n) + int(p) + 2)
    if e1 + e2 - e3 - e4 != 0:
        raise ValueError(f"C({p}, {n}) is not rational (it carries a 1/pi factor)")
    return num1 * num2 / (den1 * den2)


def radial_moment(p: float, n: int) -> float:
    """Mean of |z|^p over the unit ball in R^N: N / (N + p)."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return n / (n + p)


def k_bbm(p: float, n: int) -> float:
    """Sphere-average constant: mean over S^{N-1} of |sigma . e|^p,
    equal to C(p, N) / radial_moment(p, N)."""
    return c_euclidean_closed(p, n) / radial_moment(p, n)


def _ball_direction_kernel(n: int, p: float, v):
    v = np.asarray(v, dtype=np.float64)

    def kernel(gen, m):
        g = gen.standard_normal((m, n))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        radii = gen.random((m, 1)) ** (1.0 / n)
        z = g * (radii / norms)
        return np.abs(z @ v) ** p

    return kernel


def c_euclidean_mc(p: float, n: int, samples: int, rng: RandomStream,
                   v=None, workers: int = 1) -> EnergyEstimate:
    """Monte Carlo estimate of C(p, N); the optional direction v (unit)
    exercises rotation invariance."""
    if p <= 1:
        raise ValueError("exponent p must exceed 1")
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    if v is None:
        v = np.zeros(n)
        v[0] = 1.0
    else:
        v = np.asarray(v, dtype=np.float64)
        if abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise ValueError("direction must be a unit vector")
    return mc_estimate(_ball_direction_kernel(n, p, v), samples, rng, workers=workers)


def sphere_k_mc(p: float, n: int, samples: int, rng: RandomStream,
                workers: int = 1) -> EnergyEstimate:
    """Monte Carlo oracle for k_bbm: mean of |sigma . e1|^p over S^{N-1}."""
    if samples < 1000:
        raise ValueError("need at least 1000 samples")

    def kernel(gen, m):
        g = gen.standard_normal((m, n))
        norms = np.linalg.norm(g, axis=1)
        norms[norms == 0] = 1.0
        return np.abs(g[:, 0] / norms) ** p

    return mc_estimate(kernel, samples, rng, workers=workers)


def c_heisenberg_mc(p: float, samples: int, rng: RandomStream,
                    v=(1.0, 0.0), workers: int = 1) -> EnergyEstimate:
    """Monte Carlo estimate of the H^1 tangent constant: the mean of
    |v1 z1 + v2 z2|^p over the unit cc ball (independent of the
    horizontal unit direction v by the rotational symmetry of the ball)."""
    if p <= 1:
        raise ValueError("exponent p must exceed 1")
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    a, b = float(v[0]), float(v[1])
    if abs(math.hypot(a, b) - 1.0) > 1e-9:
        raise ValueError("direction must be a horizontal unit vector")

    def kernel(gen, m):
        z = h1.sample_unit_ball_batch(gen, m)
        return np.abs(a * z[:, 0] + b * z[:, 1]) ** p

    return mc_estimate(kernel, samples, rng, workers=workers)
