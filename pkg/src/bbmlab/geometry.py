"""Metric-measure-space abstraction and the concrete model spaces.

Spaces are fixed presets, not a plugin system: Euclidean R^N, weighted
R^N (measure w dx with 0 < c <= w bounded on a declared window), the
flat torus (R/period)^N, the round unit 2-sphere with its geodesic
metric and area measure, the Heisenberg group H^1, and the glued space
R^4 union_A H^1.  Every preset ships a distance, a ball sampler exact in
distribution, and a ball measure, because the energy estimators need all
three with analytic control.

Randomness: samplers take either a `RandomStream` (public single-point
API) or a `numpy.random.Generator` (batch internals); nothing touches
global RNG state.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import glued as glued_mod
from . import heisenberg as h1
from .mc import EnergyEstimate, RandomStream, rejection_fill

EUCLID_SIDE = glued_mod.EUCLID_SIDE
H1_SIDE = glued_mod.H1_SIDE


class UnsupportedRegimeError(ValueError):
    """A geometrically valid request outside the supported regime
    (torus ball past half-period, glued ball touching the seam, ...)."""


@dataclass(frozen=True)
class SpacePoint:
    tag: str
    coords: tuple
    side: Optional[str] = None

    def as_array(self):
        return np.asarray(self.coords, dtype=np.float64)


@dataclass(frozen=True)
class ModelSpace:
    """Immutable space descriptor; all operations dispatch on `kind`."""

    kind: str  # euclidean | weighted | torus | sphere2 | heisenberg1 | glued
    dim: int  # coordinate arity
    tangent_label: tuple
    period: Optional[float] = None
    weight: Optional[Callable] = None
    weight_lower: Optional[float] = None
    weight_upper: Optional[float] = None
    window: Optional[float] = None  # half-width of the weighted validity box

    def point(self, *coords, side: Optional[str] = None) -> SpacePoint:
        return make_point(self, *coords, side=side)

    def describe(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim}
        if self.period is not None:
            out["period"] = self.period
        return out


def euclidean_space(n: int) -> ModelSpace:
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return ModelSpace(kind="euclidean", dim=n, tangent_label=("euclidean", n))


def weighted_space(n: int, weight, lower: float, upper: float, window: float) -> ModelSpace:
    """R^N with measure w dx; w is a vectorized callable on (m, N) arrays.

    The bounds must certify 0 < lower <= w <= upper on the window box
    [-window, window]^N; they are spot-checked here on a probe grid and
    rejected otherwise, since the rejection sampler and the measure
    estimates are only correct under them.
    """
    if lower <= 0:
        raise ValueError("weight lower bound must be positive")
    if upper < lower:
        raise ValueError("weight upper bound below lower bound")
    probe = np.linspace(-window, window, 17)
    grids = np.meshgrid(*([probe] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    w = np.asarray(weight(pts), dtype=np.float64)
    if np.any(w < lower - 1e-12) or np.any(w > upper + 1e-12):
        raise ValueError("weight violates its declared bounds on the window")
    return ModelSpace(
        kind="weighted",
        dim=n,
        tangent_label=("euclidean", n),
        weight=weight,
        weight_lower=lower,
        weight_upper=upper,
        window=window,
    )


def torus_space(n: int, period: float) -> ModelSpace:
    if period <= 0:
        raise ValueError("period must be positive")
    return ModelSpace(kind="torus", dim=n, tangent_label=("euclidean", n), period=period)


def sphere_space() -> ModelSpace:
    return ModelSpace(kind="sphere2", dim=3, tangent_label=("euclidean", 2))


def heisenberg_space() -> ModelSpace:
    return ModelSpace(kind="heisenberg1", dim=3, tangent_label=("heisenberg1",))


def glued_space() -> ModelSpace:
    return ModelSpace(kind="glued", dim=4, tangent_label=("mixed",))


def make_point(space: ModelSpace, *coords, side: Optional[str] = None) -> SpacePoint:
    c = tuple(float(v) for v in coords)
    if space.kind == "glued":
        if side not in (EUCLID_SIDE, H1_SIDE):
            raise ValueError("glued points need side 'euclidean4' or 'heisenberg1'")
        arity = 4 if side == EUCLID_SIDE else 3
        if len(c) != arity:
            raise ValueError(f"side {side} expects {arity} coordinates")
        return SpacePoint(tag="glued", coords=c, side=side)
    if len(c) != space.dim:
        raise ValueError(f"{space.kind} expects {space.dim} coordinates, got {len(c)}")
    if space.kind == "torus":
        c = tuple(float(v % space.period) for v in c)
    if space.kind == "sphere2":
        if abs(sum(v * v for v in c) - 1.0) > 1e-12:
            raise ValueError("sphere points must be unit vectors (|x| = 1 within 1e-12)")
    tag = {"euclidean": "euclidean", "weighted": "weighted", "torus": "torus",
           "sphere2": "sphere", "heisenberg1": "heisenberg"}[space.kind]
    return SpacePoint(tag=tag, coords=c, side=None)


def _check_member(space: ModelSpace, x: SpacePoint):
    expect = {"euclidean": "euclidean", "weighted": "weighted", "torus": "torus",
              "sphere2": "sphere", "heisenberg1": "heisenberg", "glued": "glued"}[space.kind]
    if x.tag != expect:
        raise ValueError(f"point of kind {x.tag!r} used with space {space.kind!r}")


# ---------------------------------------------------------------------------
# Distance
# ---------------------------------------------------------------------------


def torus_delta(a, b, period: float):
    """Coordinatewise shortest wrapped difference (array-valued)."""
    d = np.abs(a - b) % period
    return np.minimum(d, period - d)


def distance(space: ModelSpace, x: SpacePoint, y: SpacePoint) -> float:
    _check_member(space, x)
    _check_member(space, y)
    a = x.as_array()
    b = y.as_array()
    if space.kind in ("euclidean", "weighted"):
        return float(np.linalg.norm(a - b))
    if space.kind == "torus":
        return float(np.linalg.norm(torus_delta(a, b, space.period)))
    if space.kind == "sphere2":
        # chord form of the great-circle angle: exact at x == y and
        # well conditioned at small separations, unlike arccos(x . y)
        chord = np.linalg.norm(a - b)
        return float(2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0)))
    if space.kind == "heisenberg1":
        return h1.cc_distance(h1.HPoint(*x.coords), h1.HPoint(*y.coords))
    if space.kind == "glued":
        return glued_mod.glued_distance(x.side, a, y.side, b)
    raise ValueError(f"unknown space kind {space.kind!r}")


def distance_batch(space: ModelSpace, a, b):
    """Vectorized distance between (m, d) coordinate arrays (same kind,
    same side for glued)."""
    if space.kind in ("euclidean", "weighted"):
        return np.linalg.norm(a - b, axis=-1)
    if space.kind == "torus":
        return np.linalg.norm(torus_delta(a, b, space.period), axis=-1)
    if space.kind == "sphere2":
        chord = np.linalg.norm(a - b, axis=-1)
        return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))
    if space.kind == "heisenberg1":
        return h1.cc_distance_coords(a, b)
    raise ValueError(f"no batch distance for {space.kind!r}")


# ---------------------------------------------------------------------------
# Ball sampling
# ---------------------------------------------------------------------------


def _euclid_ball_offsets(gen, m: int, n: int, r: float):
    """Uniform draws from the radius-r ball in R^n: isotropic direction
    times radius r * U^(1/n)."""
    g = gen.standard_normal((m, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # a standard normal vector is never numerically zero at these counts,
    # but guard the division anyway
    norms[norms == 0] = 1.0
    radii = r * gen.random((m, 1)) ** (1.0 / n)
    return g * (radii / norms)


def _sphere_cap_batch(gen, centers, r: float):
    """Uniform draws from geodesic caps around unit vectors `centers`."""
    m = centers.shape[0]
    cap = min(r, np.pi)
    cos_t = 1.0 - gen.random(m) * (1.0 - np.cos(cap))
    sin_t = np.sqrt(np.maximum(1.0 - cos_t * cos_t, 0.0))
    phi = gen.uniform(0.0, 2.0 * np.pi, m)
    # deterministic orthonormal frame per center
    e = np.zeros_like(centers)
    use_e2 = np.abs(centers[:, 0]) > 0.9
    e[use_e2, 1] = 1.0
    e[~use_e2, 0] = 1.0
    u = np.cross(centers, e)
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    v = np.cross(centers, u)
    y = (
        cos_t[:, None] * centers
        + (sin_t * np.cos(phi))[:, None] * u
        + (sin_t * np.sin(phi))[:, None] * v
    )
    return y / np.linalg.norm(y, axis=1, keepdims=True)


def _weighted_ball_batch(space: ModelSpace, centers, r: float, gen):
    """Lane-preserving rejection against the weight upper bound."""
    if np.any(np.abs(centers) + r > space.window + 1e-12):
        raise UnsupportedRegimeError("ball leaves the weighted space's declared window")
    m, n = centers.shape
    out = np.empty_like(centers)
    pending = np.arange(m)
    for _ in range(200):
        if pending.size == 0:
            return out
        cand = centers[pending] + _euclid_ball_offsets(gen, pending.size, n, r)
        w = np.asarray(space.weight(cand), dtype=np.float64)
        ok = gen.random(pending.size) * space.weight_upper <= w
        out[pending[ok]] = cand[ok]
        pending = pending[~ok]
    raise RuntimeError(
        f"weighted rejection stalled: {pending.size}/{m} lanes open after 200 rounds "
        f"(weight bounds too loose?)"
    )


def sample_ball_batch(space: ModelSpace, centers, r: float, gen, side: Optional[str] = None):
    """One nu-uniform draw from B(center, r) per row of `centers`.

    `centers` is (m, d) in the space's coordinates; for glued spaces all
    centers must sit on one side (`side`) at seam distance > r, which the
    energy module guarantees and spot-checks.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    m = centers.shape[0]
    if space.kind == "euclidean":
        return centers + _euclid_ball_offsets(gen, m, space.dim, r)
    if space.kind == "weighted":
        return _weighted_ball_batch(space, centers, r, gen)
    if space.kind == "torus":
        if r >= space.period / 2.0:
            raise UnsupportedRegimeError("torus ball radius must stay below half the period")
        return (centers + _euclid_ball_offsets(gen, m, space.dim, r)) % space.period
    if space.kind == "sphere2":
        return _sphere_cap_batch(gen, centers, r)
    if space.kind == "heisenberg1":
        xi = h1.sample_unit_ball_batch(gen, m)
        xi[:, :2] *= r
        xi[:, 2] *= r * r
        return h1.mul_coords(centers, xi)
    if space.kind == "glued":
        if side == EUCLID_SIDE:
            return centers + _euclid_ball_offsets(gen, m, 4, r)
        if side == H1_SIDE:
            xi = h1.sample_unit_ball_batch(gen, m)
            xi[:, :2] *= r
            xi[:, 2] *= r * r
            return h1.mul_coords(centers, xi)
        raise ValueError("glued sampling needs a side")
    raise ValueError(f"unknown space kind {space.kind!r}")


def sample_ball(space: ModelSpace, x: SpacePoint, r: float, rng: RandomStream) -> SpacePoint:
    """A single point distributed as nu restricted to B(x, r), normalized."""
    _check_member(space, x)
    gen = rng.generator()
    if space.kind == "glued":
        margin = glued_mod.seam_distance(x.side, x.as_array())
        if margin <= r:
            raise UnsupportedRegimeError(
                f"glued ball B(x, {r}) reaches within {margin:.3g} of the seam; "
                "only one-sided balls are supported"
            )
        c = sample_ball_batch(space, x.as_array()[None, :], r, gen, side=x.side)[0]
        return SpacePoint(tag="glued", coords=tuple(float(v) for v in c), side=x.side)
    c = sample_ball_batch(space, x.as_array()[None, :], r, gen)[0]
    return SpacePoint(tag=x.tag, coords=tuple(float(v) for v in c))


# ---------------------------------------------------------------------------
# Ball measure
# ---------------------------------------------------------------------------


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


_WEIGHTED_MEASURE_STREAM = RandomStream(0x57424C4C, (17,))


def weighted_ball_measure(space: ModelSpace, x: SpacePoint, r: float,
                          samples: int = 1 << 16, rng: Optional[RandomStream] = None) -> EnergyEstimate:
    """MC estimate of integral of w over B(x, r), with standard error."""
    if rng is None:
        rng = _WEIGHTED_MEASURE_STREAM
    gen = rng.generator()
    center = x.as_array()
    pts = center[None, :] + _euclid_ball_offsets(gen, samples, space.dim, r)
    w = np.asarray(space.weight(pts), dtype=np.float64)
    vol = unit_ball_volume(space.dim) * r ** space.dim
    return EnergyEstimate(
        value=float(vol * np.mean(w)),
        std_error=float(vol * np.std(w) / np.sqrt(samples)),
        samples=samples,
        seed=rng.seed,
    )


def ball_measure(space: ModelSpace, x: SpacePoint, r: float) -> float:
    """nu(B(x, r)).  Closed form everywhere except the weighted preset,
    which reports a fixed-stream MC estimate (see `weighted_ball_measure`
    for the variant with a standard error)."""
    _check_member(space, x)
    if r <= 0:
        raise ValueError("radius must be positive")
    if space.kind == "euclidean":
        return unit_ball_volume(space.dim) * r ** space.dim
    if space.kind == "torus":
        if r >= space.period / 2.0:
            raise UnsupportedRegimeError("torus ball measure needs r below half the period")
        return unit_ball_volume(space.dim) * r ** space.dim
    if space.kind == "sphere2":
        return 2.0 * math.pi * (1.0 - math.cos(min(r, math.pi)))
    if space.kind == "heisenberg1":
        return r ** 4 * h1.ball_volume().value
    if space.kind == "weighted":
        return weighted_ball_measure(space, x, r).value
    if space.kind == "glued":
        margin = glued_mod.seam_distance(x.side, x.as_array())
        if margin <= r:
            raise UnsupportedRegimeError("glued ball measure supported only away from the seam")
        if x.side == EUCLID_SIDE:
            return unit_ball_volume(4) * r ** 4
        return r ** 4 * h1.ball_volume().value
    raise ValueError(f"unknown space kind {space.kind!r}")


def total_measure(space: ModelSpace) -> Optional[float]:
    """nu(X) for the compact presets, None otherwise."""
    if space.kind == "torus":
        return space.period ** space.dim
    if space.kind == "sphere2":
        return 4.0 * math.pi
    return None
