"""The first Heisenberg group H^1.

R^3 with the group law

    x * y = (x1 + y1, x2 + y2, x3 + y3 + 2*(x1*y2 - x2*y1)),

Haar measure = Lebesgue measure, and the Carnot-Caratheodory metric in
closed form through the profile function H: with rho^2 = z1^2 + z2^2 and
u = z3/rho^2,

    d0(z) = (z3/rho) * sin(pi * H^{-1}(u)) + rho * cos(pi * H^{-1}(u)),

extended to the center axis by its limit sqrt(pi*|z3|), and
d(x, y) = d0(y^{-1} * x).  Anisotropic dilations
delta_r(z) = (r z1, r z2, r^2 z3) scale the metric by r and Lebesgue
measure by r^4.

The left-invariant horizontal frame is derived from the group law: the
differential of left translation L_x at the identity sends e1 to
(1, 0, -2*x2) and e2 to (0, 1, 2*x1) (differentiate x * (t*e_i) in t),
giving

    X1 = d/dx1 - 2*x2 * d/dx3,      X2 = d/dx2 + 2*x1 * d/dx3.

The derivation is validated in the test suite by comparing the frame
slope of z -> z1 against direct difference quotients of the metric.
"""

import threading
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .mc import EnergyEstimate, RandomStream, RejectionDiagnostics, mc_mean, rejection_fill


@dataclass(frozen=True)
class HPoint:
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        if not (np.isfinite(self.x1) and np.isfinite(self.x2) and np.isfinite(self.x3)):
            raise ValueError("HPoint coordinates must be finite")

    def as_array(self):
        return np.array([self.x1, self.x2, self.x3])


def group_mul(x: HPoint, y: HPoint) -> HPoint:
    return HPoint(
        x.x1 + y.x1,
        x.x2 + y.x2,
        x.x3 + y.x3 + 2.0 * (x.x1 * y.x2 - x.x2 * y.x1),
    )


def group_inv(x: HPoint) -> HPoint:
    return HPoint(-x.x1, -x.x2, -x.x3)


def dilate(r: float, z: HPoint) -> HPoint:
    if r <= 0:
        raise ValueError("dilation factor must be positive")
    return HPoint(r * z.x1, r * z.x2, r * r * z.x3)


def h_profile(s: float) -> float:
    """H(s) for |s| < 1; odd, strictly increasing, onto the reals."""
    if not abs(s) < 1.0:
        raise ValueError(f"h_profile needs |s| < 1, got {s}")
    return float(kernels.h_profile(np.array([s], dtype=np.float64))[0])


def h_inverse(t: float) -> float:
    """The s in (-1, 1) with H(s) = t."""
    return float(kernels.h_inverse(np.array([t], dtype=np.float64))[0])


def d0_coords(x1, x2, x3):
    """Batch gauge over coordinate arrays (any matching shapes)."""
    x1 = np.ascontiguousarray(x1, dtype=np.float64)
    x2 = np.ascontiguousarray(x2, dtype=np.float64)
    x3 = np.ascontiguousarray(x3, dtype=np.float64)
    shape = x1.shape
    out = kernels.d0(x1.ravel(), x2.ravel(), x3.ravel())
    return out.reshape(shape)


def d0(z: HPoint) -> float:
    return float(d0_coords(np.array([z.x1]), np.array([z.x2]), np.array([z.x3]))[0])


def cc_distance(x: HPoint, y: HPoint) -> float:
    return d0(group_mul(group_inv(y), x))


def cc_distance_coords(x, y):
    """Batch distance between (n,3) coordinate arrays."""
    d1 = x[..., 0] - y[..., 0]
    d2 = x[..., 1] - y[..., 1]
    # third coordinate of y^{-1} * x = mul(-y, x)
    d3 = x[..., 2] - y[..., 2] + 2.0 * (y[..., 1] * x[..., 0] - y[..., 0] * x[..., 1])
    return d0_coords(d1, d2, d3)


def mul_coords(x, y):
    """Batch group product of (n,3) coordinate arrays."""
    out = np.empty(np.broadcast(x, y).shape[:-1] + (3,))
    out[..., 0] = x[..., 0] + y[..., 0]
    out[..., 1] = x[..., 1] + y[..., 1]
    out[..., 2] = x[..., 2] + y[..., 2] + 2.0 * (x[..., 0] * y[..., 1] - x[..., 1] * y[..., 0])
    return out


# ---------------------------------------------------------------------------
# Unit ball: bounding box, rejection sampler, volume oracle.
#
# Candidates are drawn from the box [-1,1]^2 x [-h,h].  The horizontal
# half-width 1 is exact (d0 dominates the Euclidean norm of the
# horizontal projection).  The height is *not* the axis value
# sqrt(pi*|z3|) = 1 at z3 = 1/pi: the ball bulges past the axis --
# max |z3| on {d0 <= 1} sits near rho = 2/pi at |z3| = 2/pi -- so h is
# found by numerical maximization at first use and padded by 1.1.
# ---------------------------------------------------------------------------

_BALL_LOCK = threading.Lock()
_BALL_CACHE = {}
_VOLUME_SAMPLES = 1 << 22
_VOLUME_STREAM = RandomStream(0x48424C31, (9001,))  # fixed internal stream


def _z3_cap(rho: float) -> float:
    """Largest z3 with d0(rho, 0, z3) <= 1, by bisection (d0 is increasing
    in |z3| along vertical lines, checked in the tests)."""
    if d0_coords(np.array([rho]), np.array([0.0]), np.array([0.0]))[0] > 1.0:
        return 0.0
    lo, hi = 0.0, 4.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if d0_coords(np.array([rho]), np.array([0.0]), np.array([mid]))[0] <= 1.0:
            lo = mid
        else:
            hi = mid
    return lo


def _max_ball_height() -> float:
    """max |z3| over the closed unit ball, via a rho grid + golden polish."""
    rhos = np.linspace(0.0, 1.0, 257)
    caps = np.array([_z3_cap(r) for r in rhos])
    i = int(np.argmax(caps))
    a = rhos[max(i - 1, 0)]
    b = rhos[min(i + 1, len(rhos) - 1)]
    gr = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = _z3_cap(c), _z3_cap(d)
    for _ in range(60):
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = _z3_cap(d)
        else:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = _z3_cap(c)
    return max(fc, fd, caps[i])


def ball_box():
    """Bounding box ([-1,1]^2 x [-h,h]) of the unit ball; h cached."""
    with _BALL_LOCK:
        if "height" not in _BALL_CACHE:
            _BALL_CACHE["height"] = 1.1 * _max_ball_height()
    return 1.0, 1.0, _BALL_CACHE["height"]


def _propose_box(gen, k):
    _, _, h = ball_box()
    c = gen.uniform(-1.0, 1.0, size=(k, 3))
    c[:, 2] *= h
    return c


def _accept_ball(c):
    return d0_coords(c[:, 0], c[:, 1], c[:, 2]) < 1.0


def sample_unit_ball_batch(gen, m: int, diag: RejectionDiagnostics = None):
    """(m, 3) points uniform w.r.t. Lebesgue measure on {d0 < 1}."""
    return rejection_fill(_propose_box, _accept_ball, m, gen, diag=diag)


def sample_unit_ball(rng: RandomStream) -> HPoint:
    c = sample_unit_ball_batch(rng.generator(), 1)[0]
    return HPoint(float(c[0]), float(c[1]), float(c[2]))


def ball_volume() -> EnergyEstimate:
    """vol(B(0,1)) by the acceptance-rate Monte Carlo oracle, cached.

    Uses a fixed internal stream so every process computes the same
    value; the estimate (value, sigma, count, seed) rides along in any
    report that consumes it.
    """
    with _BALL_LOCK:
        if "volume" in _BALL_CACHE:
            return _BALL_CACHE["volume"]
    w1, w2, h = ball_box()
    box_vol = 8.0 * w1 * w2 * h

    def indicator(gen, k):
        c = _propose_box(gen, k)
        return _accept_ball(c).astype(np.float64)

    mean, se = mc_mean(indicator, _VOLUME_SAMPLES, _VOLUME_STREAM)
    est = EnergyEstimate(
        value=box_vol * mean,
        std_error=box_vol * se,
        samples=_VOLUME_SAMPLES,
        seed=_VOLUME_STREAM.seed,
    )
    with _BALL_LOCK:
        _BALL_CACHE["volume"] = est
    return est


def horizontal_slope(f, z: HPoint) -> float:
    """|horizontal gradient| sqrt((X1 f)^2 + (X2 f)^2) at z.

    Needs the function's coordinate partials (TestFunction presets on
    H^1 provide them); equals the metric slope Lip(f)(z) for smooth f.
    """
    partials = getattr(f, "partials_batch", None)
    if partials is None:
        raise ValueError("horizontal_slope needs a function with coordinate partials")
    g = partials(z.as_array()[None, :])[0]
    x1f = g[0] - 2.0 * z.x2 * g[2]
    x2f = g[1] + 2.0 * z.x1 * g[2]
    return float(np.hypot(x1f, x2f))


# ---------------------------------------------------------------------------
# Busemann functions along horizontal lines.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BusemannProbe:
    """Probe of b_{gamma,s}(z) = d(z, gamma(s)) - |s| along the horizontal
    geodesic gamma(s) = (a*s, b*s, 0)."""

    direction: tuple
    z: HPoint
    s_values: tuple

    def __post_init__(self):
        a, b = self.direction
        if abs(a * a + b * b - 1.0) > 1e-12:
            raise ValueError("direction must be a unit horizontal vector")
        if not isinstance(self.z, HPoint):
            object.__setattr__(self, "z", HPoint(*self.z))
        sv = np.asarray(self.s_values, dtype=np.float64)
        if sv.size == 0 or np.any(sv <= 0) or np.any(np.diff(sv) <= 0):
            raise ValueError("s_values must be strictly increasing and positive")


def busemann(probe: BusemannProbe, sign: str = "+"):
    """[(s, b_{gamma, sign*s}(z))] for each s in the probe.

    As s -> +inf the values decrease to -(z . v) for sign '+', and to
    +(z . v) for sign '-', with v the horizontal direction.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    a, b = probe.direction
    s = np.asarray(probe.s_values, dtype=np.float64)
    if sign == "-":
        s = -s
    z = probe.z
    # gamma(s)^{-1} * z
    g1 = z.x1 - a * s
    g2 = z.x2 - b * s
    g3 = z.x3 + 2.0 * s * (b * z.x1 - a * z.x2)
    vals = d0_coords(g1, g2, g3) - np.abs(s)
    return [(float(abs(si)), float(v)) for si, v in zip(s, vals)]


def busemann_rate(pairs, limit: float) -> float:
    """Least-squares C in b(s) ~ limit + C/s over probe output."""
    s = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    x = 1.0 / s
    return float(np.dot(x, b - limit) / np.dot(x, x))
