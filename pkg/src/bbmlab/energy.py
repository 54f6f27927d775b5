"""Nonlocal difference-quotient estimators and analytic Cheeger energies.

The central object is

    Q_r(f) = r^{-p} Int_X  mean_{y in B(x,r)} |f(x) - f(y)|^p  dnu(x),

estimated by nested Monte Carlo: outer points x from an explicit finite
region that provably contains every x contributing to the integral
(f has compact support, so any x farther than r from supp f averages a
constant), inner points y nu-uniform in B(x, r).  The region is part of
the estimator's contract -- its measure multiplies the sample mean -- so
each construction below documents why it contains the fattened support.

The Cheeger energies Int slope^p dnu are computed by quadrature per
function preset, never by differencing, so the sweep's reference value
carries no statistical error.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma as _gamma

from . import glued as glued_mod
from . import heisenberg as h1
from .functions import TestFunction
from .geometry import (
    EUCLID_SIDE,
    H1_SIDE,
    ModelSpace,
    SpacePoint,
    UnsupportedRegimeError,
    sample_ball_batch,
    total_measure,
    unit_ball_volume,
)
from .mc import EnergyEstimate, RandomStream, mc_estimate

Z3_CAP = 2.0 / math.pi  # max |z3| over the unit cc ball (attained off-axis)


@dataclass(frozen=True)
class OuterRegion:
    """Sampling region for the outer integral: `sampler` draws uniform
    w.r.t. Lebesgue/Haar in the listed coordinates, `measure` is that
    region's Lebesgue measure, and `weight` (if set) is the nu-density
    to multiply into the integrand."""

    measure: float
    sampler: Callable  # (gen, m) -> (m, d) coords
    weight: Optional[Callable] = None
    side: Optional[str] = None


def _euclid_fattened_ball(center, radius):
    c = np.asarray(center, dtype=np.float64)
    n = c.size

    def sampler(gen, m):
        g = gen.standard_normal((m, n))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        radii = radius * gen.random((m, 1)) ** (1.0 / n)
        return c[None, :] + g * (radii / norms)

    return unit_ball_volume(n) * radius ** n, sampler


def _h1_fattened_box(center, radius, r):
    """Box in left-translated coordinates w = c^{-1} x containing every x
    within cc-distance r of the Euclidean-norm ball {|w| <= R}: the
    horizontal projection of a cc ball of radius r is a disc of radius r,
    the vertical coordinate of the increment is at most Z3_CAP * r^2, and
    the group law adds the cross term 2(w1 h2 - w2 h1) <= 2 R r."""
    c = np.asarray(center, dtype=np.float64)
    half1 = radius + r
    half3 = radius + Z3_CAP * r * r + 2.0 * radius * r
    vol = (2.0 * half1) ** 2 * (2.0 * half3)

    def sampler(gen, m):
        w = gen.uniform(-1.0, 1.0, (m, 3))
        w[:, :2] *= half1
        w[:, 2] *= half3
        return h1.mul_coords(np.broadcast_to(c, (m, 3)), w)

    return vol, sampler, half1, half3


def _h1_box_cc_radius(half1: float, half3: float) -> float:
    """Upper bound for the cc distance from the box center to any box
    point: horizontal leg plus a vertical leg of cc length sqrt(pi |w3|)."""
    return math.sqrt(2.0) * half1 + math.sqrt(math.pi * half3)


def outer_region(space: ModelSpace, f: TestFunction, r: float) -> OuterRegion:
    """Region containing {x : B(x, r) meets supp f}, with exact measure."""
    if r <= 0:
        raise ValueError("radius must be positive")
    sup = f.support

    if sup.kind == "all":
        tot = total_measure(space)
        if tot is None:
            raise ValueError("full-support functions need a compact space")
        if space.kind == "torus":
            if r >= space.period / 2.0:
                raise UnsupportedRegimeError("radius must stay below half the torus period")
            period = space.period
            dim = space.dim

            def sampler(gen, m):
                return gen.uniform(0.0, period, (m, dim))

            return OuterRegion(measure=tot, sampler=sampler)
        if space.kind == "sphere2":

            def sampler(gen, m):
                g = gen.standard_normal((m, 3))
                return g / np.linalg.norm(g, axis=1, keepdims=True)

            return OuterRegion(measure=tot, sampler=sampler)
        raise ValueError(f"no full-support region for {space.kind!r}")

    if sup.kind != "ball":
        raise ValueError("global quotient needs compact support (or a compact space)")

    R = sup.radius
    if space.kind == "euclidean":
        measure, sampler = _euclid_fattened_ball(sup.center, R + r)
        return OuterRegion(measure=measure, sampler=sampler)

    if space.kind == "weighted":
        if np.any(np.abs(np.asarray(sup.center)) + R + 2.0 * r > space.window + 1e-12):
            raise UnsupportedRegimeError(
                "fattened support leaves the weighted space's declared window"
            )
        measure, sampler = _euclid_fattened_ball(sup.center, R + r)
        return OuterRegion(measure=measure, sampler=sampler, weight=space.weight)

    if space.kind == "heisenberg1":
        vol, sampler, _, _ = _h1_fattened_box(sup.center, R, r)
        return OuterRegion(measure=vol, sampler=sampler)

    if space.kind == "glued":
        if sup.side == EUCLID_SIDE:
            seam = glued_mod.seam_distance(EUCLID_SIDE, np.asarray(sup.center, dtype=np.float64))
            if seam <= R + 2.0 * r:
                raise UnsupportedRegimeError(
                    f"support at seam distance {seam:.3g} needs > R + 2r = {R + 2 * r:.3g}; "
                    "inner balls would cross the seam"
                )
            measure, sampler = _euclid_fattened_ball(sup.center, R + r)
            return OuterRegion(measure=measure, sampler=sampler, side=EUCLID_SIDE)
        if sup.side == H1_SIDE:
            center = np.asarray(sup.center, dtype=np.float64)
            seam = glued_mod.h1_seam_distance(center)[0]
            vol, sampler, half1, half3 = _h1_fattened_box(center, R, r)
            reach = _h1_box_cc_radius(half1, half3) + r
            if seam <= reach:
                raise UnsupportedRegimeError(
                    f"support at seam distance {seam:.3g} needs > {reach:.3g} "
                    "(box reach plus one inner radius)"
                )
            return OuterRegion(measure=vol, sampler=sampler, side=H1_SIDE)
        raise ValueError("glued support needs a side")

    raise ValueError(f"no outer region for space kind {space.kind!r}")


# ---------------------------------------------------------------------------
# Quotient estimators
# ---------------------------------------------------------------------------


def pointwise_quotient(space: ModelSpace, f: TestFunction, x: SpacePoint,
                       p: float, r: float, samples: int, rng: RandomStream,
                       workers: int = 1) -> EnergyEstimate:
    """mean_{y in B(x,r)} |f(x) - f(y)|^p / r^p at a single base point."""
    if p <= 1:
        raise ValueError("exponent p must exceed 1")
    if r <= 0:
        raise ValueError("radius must be positive")
    if space.kind == "glued":
        margin = glued_mod.seam_distance(x.side, x.as_array())
        if margin <= r:
            raise UnsupportedRegimeError("base point too close to the seam for this radius")
        if f.support.side is not None and x.side != f.support.side:
            # f vanishes identically on this side, and the ball stays on it
            return EnergyEstimate(value=0.0, std_error=0.0, samples=samples, seed=rng.seed)
    fx = f.eval(x)
    center = x.as_array()
    side = x.side
    rp = r ** p

    def kernel(gen, m):
        centers = np.broadcast_to(center, (m, center.size))
        y = sample_ball_batch(space, centers, r, gen, side=side)
        return np.abs(fx - f.eval_batch(y)) ** p / rp

    return mc_estimate(kernel, samples, rng, workers=workers)


def global_quotient(space: ModelSpace, f: TestFunction, p: float, r: float,
                    outer_samples: int, inner_samples: int, rng: RandomStream,
                    workers: int = 1) -> EnergyEstimate:
    """Nested MC estimate of Q_r(f); `samples` on the result counts
    function-difference pairs (outer x inner), while the standard error
    comes from the outer sample of conditional means."""
    if p <= 1:
        raise ValueError("exponent p must exceed 1")
    if r <= 0:
        raise ValueError("radius must be positive")
    if outer_samples < 2 or inner_samples < 1:
        raise ValueError("need at least 2 outer and 1 inner samples")
    region = outer_region(space, f, r)
    k = int(inner_samples)
    rp = r ** p

    def kernel(gen, m):
        x = region.sampler(gen, m)
        fx = f.eval_batch(x)
        xr = np.repeat(x, k, axis=0)
        y = sample_ball_batch(space, xr, r, gen, side=region.side)
        fy = f.eval_batch(y).reshape(m, k)
        vals = np.mean(np.abs(fx[:, None] - fy) ** p, axis=1) / rp
        if region.weight is not None:
            vals = vals * np.asarray(region.weight(x), dtype=np.float64)
        return region.measure * vals

    est = mc_estimate(kernel, outer_samples, rng, workers=workers)
    return EnergyEstimate(value=est.value, std_error=est.std_error,
                          samples=outer_samples * k, seed=est.seed)


def quotient_upper_bound(space: ModelSpace, f: TestFunction, p: float, r: float) -> float:
    """Explicit r-uniform bound L^p * nu(region(r)) from |f(x) - f(y)| <=
    L d(x, y) <= L r inside the ball average (generous, not sharp)."""
    region = outer_region(space, f, r)
    measure = region.measure
    if space.kind == "weighted":
        measure *= space.weight_upper
    return f.lipschitz_bound ** p * measure


# ---------------------------------------------------------------------------
# Cheeger energies (quadrature)
# ---------------------------------------------------------------------------

_GL_NODES = 192


def _gauss01(n=_GL_NODES):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def abs_cos_moment(p: float) -> float:
    """Integral of |cos t|^p over one period [0, 2 pi]."""
    return float(2.0 * math.sqrt(math.pi) * _gamma((p + 1.0) / 2.0) / _gamma(p / 2.0 + 1.0))


def torus_sine_cheeger(p: float, n: int, period: float) -> float:
    k = period / (2.0 * math.pi)
    return period ** (n - 1) * k * abs_cos_moment(p)


def sphere_height_cheeger(p: float) -> float:
    return float(2.0 * math.pi * math.sqrt(math.pi) * _gamma(p / 2.0 + 1.0) / _gamma((p + 3.0) / 2.0))


def euclid_bump_cheeger(p: float, n: int, radius: float) -> float:
    """Int |grad psi(|x - c|)|^p dx = S_{n-1} R^{n-p} Int_0^1 (4u(1-u^2))^p u^{n-1} du."""
    u, w = _gauss01()
    integral = float(np.sum(w * (4.0 * u * (1.0 - u * u)) ** p * u ** (n - 1)))
    surface = float(2.0 * math.pi ** (n / 2.0) / _gamma(n / 2.0))
    return surface * radius ** (n - p) * integral


def h1_bump_cheeger(p: float, radius: float) -> float:
    """Horizontal energy of the H^1 bump in spherical w-coordinates:
    2 pi Int_0^R Int_{-1}^1 slope(t, mu)^p t^2 dmu dt with
    slope = 4(1 - t^2/R^2)/R^2 * t sqrt(1 - mu^2) sqrt(1 + 4 t^2 mu^2)."""
    R = radius
    u, wu = _gauss01()
    t = (R * u)[:, None]
    wt = (R * wu)[:, None]
    mu = (2.0 * u - 1.0)[None, :]
    wmu = (2.0 * wu)[None, :]
    slope = (4.0 * (1.0 - (t / R) ** 2) / (R * R)
             * t * np.sqrt(1.0 - mu ** 2) * np.sqrt(1.0 + 4.0 * (t * mu) ** 2))
    return float(2.0 * math.pi * np.sum(wt * wmu * slope ** p * t ** 2))


def _weighted_bump_cheeger(space: ModelSpace, center, radius: float, p: float) -> float:
    """Radial Gauss-Legendre x angular product quadrature of
    Int |psi'|^p w dnu; supported for dimensions 1-3."""
    n = space.dim
    c = np.asarray(center, dtype=np.float64)
    u, wu = _gauss01()
    t = radius * u
    wt = radius * wu
    phi_p = (4.0 * (t / radius) * (1.0 - (t / radius) ** 2) / radius) ** p
    if n == 1:
        sigma = np.array([[1.0], [-1.0]])
        wsig = np.array([1.0, 1.0])
    elif n == 2:
        m = 256
        ang = 2.0 * np.pi * np.arange(m) / m
        sigma = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        wsig = np.full(m, 2.0 * np.pi / m)
    elif n == 3:
        mu, wmu = np.polynomial.legendre.leggauss(64)
        m = 128
        ang = 2.0 * np.pi * np.arange(m) / m
        s = np.sqrt(1.0 - mu ** 2)
        sigma = np.stack([
            np.outer(s, np.cos(ang)).ravel(),
            np.outer(s, np.sin(ang)).ravel(),
            np.outer(mu, np.ones(m)).ravel(),
        ], axis=1)
        wsig = np.outer(wmu, np.full(m, 2.0 * np.pi / m)).ravel()
    else:
        raise ValueError("weighted Cheeger quadrature supports dimensions 1-3")
    pts = c[None, None, :] + t[:, None, None] * sigma[None, :, :]
    w = np.asarray(space.weight(pts.reshape(-1, n)), dtype=np.float64).reshape(t.size, -1)
    radial = wt * phi_p * t ** (n - 1)
    return float(np.sum(radial[:, None] * wsig[None, :] * w))


def cheeger_energy(space: ModelSpace, f: TestFunction, p: float) -> float:
    """Int_X slope(f)^p dnu by per-preset quadrature (exact or Gauss)."""
    if p <= 1:
        raise ValueError("exponent p must exceed 1")
    label = f.label
    if label == "sine":
        if space.kind != "torus":
            raise ValueError("sine has finite energy only on the torus preset")
        return torus_sine_cheeger(p, space.dim, space.period)
    if label == "sphere_height":
        if space.kind != "sphere2":
            raise ValueError("sphere_height lives on the unit sphere")
        return sphere_height_cheeger(p)
    if label == "bump":
        R = f.support.radius
        center = f.support.center
        if space.kind == "euclidean":
            return euclid_bump_cheeger(p, space.dim, R)
        if space.kind == "weighted":
            return _weighted_bump_cheeger(space, center, R, p)
        if space.kind == "heisenberg1":
            return h1_bump_cheeger(p, R)
        if space.kind == "glued":
            if f.support.side == EUCLID_SIDE:
                return euclid_bump_cheeger(p, 4, R)
            return h1_bump_cheeger(p, R)
        raise ValueError(f"no bump energy for space kind {space.kind!r}")
    if label in ("linear", "h1_horizontal_linear"):
        raise ValueError(f"{label} has infinite energy on a noncompact space")
    raise ValueError(f"no Cheeger quadrature for function {label!r}")
