"""The glued space R^4 union_A H^1.

Both factors contain an isometric copy of the real line A: the first
coordinate axis a(t) = (t, 0, 0, 0) in R^4 (any line would do; this
choice is a fixed convention) and the horizontal line a(t) = (t, 0, 0)
in H^1, which is a geodesic with d(a(t), a(t')) = |t - t'| in both
factors.  The glued metric extends the side metrics and, across sides,

    d(y, z) = inf_t  d_E(y, a(t)) + d_H(a(t), z).

Same-side pairs keep their own side's distance: a through-seam path
y -> a(t) -> a(t') -> y' has length >= d(y, a(t)) + |t - t'| +
d(a(t'), y') >= d(y, y') by two triangle inequalities plus A being
geodesic, so the detour never wins.  `side_restriction_check` verifies
this numerically instead of trusting the argument.

The cross-side infimum is minimized by a coarse grid over a certified
bracket followed by golden-section refinement of the best cell;
d_H(a(t), z) is not known to be convex in t, which rules out plain
bisection.
"""

from dataclasses import dataclass, field

import numpy as np

from . import heisenberg as h1

EUCLID_SIDE = "euclidean4"
H1_SIDE = "heisenberg1"

_GRID = 1024
_GOLDEN_TOL = 1e-10


def _euclid_to_seam(y, t):
    """d_E(y, a(t)) for a 4-vector y and scalar/array t."""
    dy = y[0] - t
    return np.sqrt(dy * dy + y[1] * y[1] + y[2] * y[2] + y[3] * y[3])


def _h1_seam_coords(z, t):
    """Coordinates of a(t)^{-1} * z for a 3-vector z and array t."""
    t = np.asarray(t, dtype=np.float64)
    g1 = z[0] - t
    g2 = np.broadcast_to(z[1], t.shape)
    g3 = z[2] - 2.0 * t * z[1]
    return g1, g2, g3


def _h1_to_seam(z, t):
    """d_H(a(t), z) = d0(a(t)^{-1} z)."""
    g1, g2, g3 = _h1_seam_coords(z, np.atleast_1d(np.asarray(t, dtype=np.float64)))
    return h1.d0_coords(g1, g2, g3)


def _golden_min(fn, a, b, tol=_GOLDEN_TOL):
    gr = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = fn(d)
    return (c, fc) if fc < fd else (d, fd)


def _minimize_over_seam(fn_grid, fn_scalar, t_lo, t_hi, tol=_GOLDEN_TOL):
    """Coarse grid + golden refinement of the best grid cell."""
    ts = np.linspace(t_lo, t_hi, _GRID + 1)
    vals = fn_grid(ts)
    i = int(np.argmin(vals))
    a = ts[max(i - 1, 0)]
    b = ts[min(i + 1, _GRID)]
    t_star, v = _golden_min(fn_scalar, a, b, tol)
    if vals[i] < v:
        return float(ts[i]), float(vals[i])
    return float(t_star), float(v)


def cross_distance(y, z, tol=_GOLDEN_TOL):
    """inf_t d_E(y, a(t)) + d_H(a(t), z) with the minimizing t.

    The bracket is certified: the objective dominates d_E(y, a(t)) >=
    |t - y1|, so any minimizer satisfies |t - y1| <= g(0) where g(0) is
    the objective at t = 0.
    """
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    g0 = float(_euclid_to_seam(y, 0.0) + _h1_to_seam(z, 0.0)[0])
    t_lo, t_hi = y[0] - g0, y[0] + g0

    def grid(ts):
        return _euclid_to_seam(y, ts) + _h1_to_seam(z, ts)

    def scalar(t):
        return float(_euclid_to_seam(y, t) + _h1_to_seam(z, t)[0])

    return _minimize_over_seam(grid, scalar, t_lo, t_hi, tol)


def euclid_seam_distance(y) -> float:
    """d_E(y, A): closed form, the norm of the last three coordinates."""
    y = np.asarray(y, dtype=np.float64)
    return float(np.sqrt(y[1] ** 2 + y[2] ** 2 + y[3] ** 2))


def h1_seam_distance(z, tol=_GOLDEN_TOL):
    """d_H(z, A) = min_t d0(a(t)^{-1} z), with the minimizing t.

    No closed form is used: d0 along the seam initially *decreases* in
    |t - z1| near the axis, so the minimum is found numerically over the
    certified bracket |t - z1| <= d_H(a(z1), z).
    """
    z = np.asarray(z, dtype=np.float64)
    g0 = float(_h1_to_seam(z, z[0])[0])
    if g0 == 0.0:
        return 0.0, float(z[0])
    t_lo, t_hi = z[0] - g0, z[0] + g0

    def grid(ts):
        return _h1_to_seam(z, ts)

    def scalar(t):
        return float(_h1_to_seam(z, t)[0])

    t_star, v = _minimize_over_seam(grid, scalar, t_lo, t_hi, tol)
    return v, t_star


def glued_distance_detail(side_y: str, y, side_z: str, z, tol=_GOLDEN_TOL):
    """(distance, minimizing seam t or None) for raw side/coords input."""
    if side_y == side_z:
        if side_y == EUCLID_SIDE:
            y = np.asarray(y, dtype=np.float64)
            z = np.asarray(z, dtype=np.float64)
            return float(np.linalg.norm(y - z)), None
        x = h1.HPoint(*[float(c) for c in y])
        w = h1.HPoint(*[float(c) for c in z])
        return h1.cc_distance(x, w), None
    if side_y == EUCLID_SIDE:
        t, v = cross_distance(y, z, tol)
        return v, t
    t, v = cross_distance(z, y, tol)
    return v, t


def glued_distance(side_y: str, y, side_z: str, z) -> float:
    return glued_distance_detail(side_y, y, side_z, z)[0]


def seam_distance(side: str, coords) -> float:
    if side == EUCLID_SIDE:
        return euclid_seam_distance(coords)
    return h1_seam_distance(coords)[0]


@dataclass
class SideRestrictionReport:
    pairs_checked: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def side_restriction_check(pairs, seam_params=None, slack=1e-9) -> SideRestrictionReport:
    """Verify that through-seam detours never beat the same-side metric.

    ``pairs`` is a list of (side, coords_y, coords_yp); for each pair and
    each seam parameter pair (t, t') it checks

        d_side(y, a(t)) + |t - t'| + d_side(a(t'), y') >= d_side(y, y').

    Returns a report with witnesses for any violation.
    """
    if seam_params is None:
        seam_params = [(-2.0, 1.0), (0.0, 0.0), (1.5, -0.5)]
    report = SideRestrictionReport(pairs_checked=0)
    for side, y, yp in pairs:
        y = np.asarray(y, dtype=np.float64)
        yp = np.asarray(yp, dtype=np.float64)
        direct = glued_distance(side, y, side, yp)
        for t, tp in seam_params:
            if side == EUCLID_SIDE:
                via = _euclid_to_seam(y, t) + abs(t - tp) + _euclid_to_seam(yp, tp)
            else:
                via = float(_h1_to_seam(y, t)[0]) + abs(t - tp) + float(_h1_to_seam(yp, tp)[0])
            if via < direct - slack:
                report.violations.append(
                    {"side": side, "y": y.tolist(), "yp": yp.tolist(), "t": t, "tp": tp,
                     "via": float(via), "direct": float(direct)}
                )
        report.pairs_checked += 1
    return report


def h1_seam_distance_value(z) -> float:
    return h1_seam_distance(z)[0]
