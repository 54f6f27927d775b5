"""Test functions with matched slopes and support descriptors.

Each preset bundles a pointwise evaluation, the metric slope (which for
these smooth profiles equals |grad f| Euclidean-side and the horizontal
gradient norm on H^1), a support region the energy module can fatten,
and a certified Lipschitz constant.  Batch variants operate on (m, d)
coordinate arrays because the Monte Carlo loops are vectorized.

The bump profile is psi(t) = (1 - t^2/R^2)^2 for t < R, zero outside:
C^1 across the support boundary, polynomial inside, with closed-form
energies.  On H^1 the bump is radial in the *Euclidean* norm of the
left-translated coordinates w = c^{-1} z; its horizontal gradient then
has the closed form

    |grad_H f|(z) = psi'(|w|) / |w| * sqrt((w1^2 + w2^2) (1 + 4 w3^2)),

| since X1 = d/dx1 - 2 x2 d/dx3 and X2 = d/dx2 + 2 x1 d/dx3 applied to
| any radial g(|w|) give g'(|w|)/|w| * (w1 + 2 w2 w3, w2 - 2 w1 w3),
| whose norm squared is (w1^2 + w2^2)(1 + 4 w3^2) / |w|^2 times g'^2.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import heisenberg as h1
from .geometry import EUCLID_SIDE, H1_SIDE, ModelSpace, SpacePoint

BUMP_PEAK_SLOPE = 8.0 / (3.0 * math.sqrt(3.0))  # max of 4u(1-u^2) on [0,1]


@dataclass(frozen=True)
class SupportRegion:
    kind: str  # "all" | "ball" | "unbounded"
    center: Optional[tuple] = None
    radius: Optional[float] = None
    side: Optional[str] = None


@dataclass(frozen=True)
class TestFunction:
    label: str
    params: dict
    support: SupportRegion
    lipschitz_bound: float
    eval_batch: Callable  # (m, d) coords -> (m,) values
    slope_batch: Callable  # (m, d) coords -> (m,) slopes
    partials_batch: Optional[Callable] = None  # (m, 3) -> (m, 3), H^1 only

    def eval(self, x: SpacePoint) -> float:
        if self.support.side is not None and x.side != self.support.side:
            return 0.0
        return float(self.eval_batch(x.as_array()[None, :])[0])

    def slope(self, x: SpacePoint) -> float:
        if self.support.side is not None and x.side != self.support.side:
            return 0.0
        return float(self.slope_batch(x.as_array()[None, :])[0])

    def describe(self) -> dict:
        return {"function": self.label, **self.params}


def linear(v) -> TestFunction:
    v = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if norm == 0:
        raise ValueError("linear form needs a nonzero direction")
    return TestFunction(
        label="linear",
        params={"v": [float(c) for c in v]},
        support=SupportRegion(kind="unbounded"),
        lipschitz_bound=norm,
        eval_batch=lambda x: x @ v,
        slope_batch=lambda x: np.full(x.shape[0], norm),
    )


def sine(axis: int = 0) -> TestFunction:
    """sin(x_axis); on a torus the period must be a multiple of 2*pi."""
    if axis < 0:
        raise ValueError("axis must be nonnegative")
    return TestFunction(
        label="sine",
        params={"axis": axis},
        support=SupportRegion(kind="all"),
        lipschitz_bound=1.0,
        eval_batch=lambda x: np.sin(x[:, axis]),
        slope_batch=lambda x: np.abs(np.cos(x[:, axis])),
    )


def sphere_height() -> TestFunction:
    """Third coordinate restricted to the unit sphere; |grad| = sqrt(1 - z^2)."""
    return TestFunction(
        label="sphere_height",
        params={},
        support=SupportRegion(kind="all"),
        lipschitz_bound=1.0,
        eval_batch=lambda x: x[:, 2].copy(),
        slope_batch=lambda x: np.sqrt(np.maximum(1.0 - x[:, 2] ** 2, 0.0)),
    )


def h1_horizontal_linear(a: float, b: float) -> TestFunction:
    """a z1 + b z2 on H^1: horizontal gradient is constant (a, b)."""
    norm = math.hypot(a, b)
    if norm == 0:
        raise ValueError("horizontal form needs (a, b) != 0")
    av = np.array([a, b, 0.0])

    def partials(z):
        return np.broadcast_to(av, (z.shape[0], 3)).copy()

    return TestFunction(
        label="h1_horizontal_linear",
        params={"a": float(a), "b": float(b)},
        support=SupportRegion(kind="unbounded"),
        lipschitz_bound=norm,
        eval_batch=lambda z: a * z[:, 0] + b * z[:, 1],
        slope_batch=lambda z: np.full(z.shape[0], norm),
        partials_batch=partials,
    )


def _euclid_bump_batches(center, radius):
    c = np.asarray(center, dtype=np.float64)
    R = float(radius)

    def eval_batch(x):
        u2 = np.sum((x - c) ** 2, axis=-1) / (R * R)
        inside = u2 < 1.0
        out = np.zeros(x.shape[0])
        out[inside] = (1.0 - u2[inside]) ** 2
        return out

    def slope_batch(x):
        u = np.sqrt(np.sum((x - c) ** 2, axis=-1)) / R
        inside = u < 1.0
        out = np.zeros(x.shape[0])
        ui = u[inside]
        out[inside] = 4.0 * ui * (1.0 - ui * ui) / R
        return out

    return eval_batch, slope_batch


def _h1_bump_batches(center, radius):
    c = np.asarray(center, dtype=np.float64)
    cinv = -c
    R = float(radius)

    def _w(z):
        return h1.mul_coords(np.broadcast_to(cinv, z.shape), z)

    def eval_batch(z):
        w = _w(z)
        u2 = np.sum(w * w, axis=-1) / (R * R)
        inside = u2 < 1.0
        out = np.zeros(z.shape[0])
        out[inside] = (1.0 - u2[inside]) ** 2
        return out

    def slope_batch(z):
        w = _w(z)
        u2 = np.sum(w * w, axis=-1) / (R * R)
        inside = u2 < 1.0
        out = np.zeros(z.shape[0])
        wi = w[inside]
        horiz2 = (wi[:, 0] ** 2 + wi[:, 1] ** 2) * (1.0 + 4.0 * wi[:, 2] ** 2)
        # psi'(t)/t = -4 (1 - t^2/R^2) / R^2, so the |w| factors cancel
        out[inside] = 4.0 * (1.0 - u2[inside]) / (R * R) * np.sqrt(horiz2)
        return out

    def partials_batch(z):
        w = _w(z)
        u2 = np.sum(w * w, axis=-1) / (R * R)
        inside = u2 < 1.0
        out = np.zeros((z.shape[0], 3))
        wi = w[inside]
        dpsi_dq = -2.0 * (1.0 - u2[inside]) / (R * R)  # d psi / d(t^2)
        # q = |w|^2 with w3 = z3 - c3 - 2(c1 z2 - c2 z1):
        # dq/dz1 = 2(w1 + 2 c2 w3), dq/dz2 = 2(w2 - 2 c1 w3), dq/dz3 = 2 w3
        out[inside, 0] = dpsi_dq * 2.0 * (wi[:, 0] + 2.0 * c[1] * wi[:, 2])
        out[inside, 1] = dpsi_dq * 2.0 * (wi[:, 1] - 2.0 * c[0] * wi[:, 2])
        out[inside, 2] = dpsi_dq * 2.0 * wi[:, 2]
        return out

    return eval_batch, slope_batch, partials_batch


def _h1_bump_lipschitz(radius: float) -> float:
    """Certified upper bound for the cc-Lipschitz constant of the H^1 bump:
    dense grid over (t, mu) = (|w|, cos angle) plus a 0.1% safety pad."""
    R = float(radius)
    t = np.linspace(0.0, R, 513)[:, None]
    mu = np.linspace(-1.0, 1.0, 513)[None, :]
    horiz = t * np.sqrt(1.0 - mu ** 2) * np.sqrt(1.0 + 4.0 * (t * mu) ** 2)
    s = 4.0 * (1.0 - (t / R) ** 2) / (R * R) * horiz
    return float(np.max(s)) * 1.001


def bump(space: ModelSpace, center, radius: float, side: Optional[str] = None) -> TestFunction:
    """Compactly supported radial bump adapted to the space's geometry."""
    if radius <= 0:
        raise ValueError("bump radius must be positive")
    params = {"center": [float(v) for v in center], "radius": float(radius)}

    if space.kind in ("euclidean", "weighted"):
        ev, sl = _euclid_bump_batches(center, radius)
        return TestFunction(
            label="bump",
            params=params,
            support=SupportRegion(kind="ball", center=tuple(float(v) for v in center),
                                  radius=float(radius)),
            lipschitz_bound=BUMP_PEAK_SLOPE / radius,
            eval_batch=ev,
            slope_batch=sl,
        )
    if space.kind == "heisenberg1":
        ev, sl, pb = _h1_bump_batches(center, radius)
        return TestFunction(
            label="bump",
            params=params,
            support=SupportRegion(kind="ball", center=tuple(float(v) for v in center),
                                  radius=float(radius)),
            lipschitz_bound=_h1_bump_lipschitz(radius),
            eval_batch=ev,
            slope_batch=sl,
            partials_batch=pb,
        )
    if space.kind == "glued":
        if side == EUCLID_SIDE:
            ev, sl = _euclid_bump_batches(center, radius)
            lip = BUMP_PEAK_SLOPE / radius
            pb = None
        elif side == H1_SIDE:
            ev, sl, pb = _h1_bump_batches(center, radius)
            lip = _h1_bump_lipschitz(radius)
        else:
            raise ValueError("glued bump needs a side")
        params["side"] = side
        return TestFunction(
            label="bump",
            params=params,
            support=SupportRegion(kind="ball", center=tuple(float(v) for v in center),
                                  radius=float(radius), side=side),
            lipschitz_bound=lip,
            eval_batch=ev,
            slope_batch=sl,
            partials_batch=pb,
        )
    raise ValueError(f"no bump preset for space kind {space.kind!r}")


def make_test_function(preset: str, space: ModelSpace, **params) -> TestFunction:
    """Named-preset constructor used by the sweep config and the CLI."""
    if preset == "linear":
        return linear(params.get("v", [1.0] + [0.0] * (space.dim - 1)))
    if preset == "sine":
        f = sine(int(params.get("axis", 0)))
        if space.kind == "torus":
            k = space.period / (2.0 * math.pi)
            if abs(k - round(k)) > 1e-9 or round(k) < 1:
                raise ValueError("sine on a torus needs the period to be a multiple of 2*pi")
        return f
    if preset == "sphere_height":
        if space.kind != "sphere2":
            raise ValueError("sphere_height lives on the unit sphere")
        return sphere_height()
    if preset == "h1_horizontal_linear":
        return h1_horizontal_linear(float(params.get("a", 1.0)), float(params.get("b", 0.0)))
    if preset == "bump":
        if "center" not in params or "radius" not in params:
            raise ValueError("bump needs center and radius")
        return bump(space, params["center"], float(params["radius"]), side=params.get("side"))
    raise ValueError(f"unknown function preset {preset!r}")
