"""Numerical experiments for the nonlocal-to-local energy limit

    lim_{r -> 0} r^{-p} Int_X mean_{B(x,r)} |f(x) - f(y)|^p dnu
        = C * Int_X slope(f)^p dnu

on model metric measure spaces: Euclidean boxes/tori/spheres, the
Heisenberg group H^1 with its Carnot-Caratheodory metric, and the glued
space R^4 union H^1 where no single constant C works on both sides.
"""

from ._backend import BACKEND
from .constants import (
    c_euclidean_closed,
    c_euclidean_exact,
    c_euclidean_mc,
    c_heisenberg_mc,
    k_bbm,
    radial_moment,
    sphere_k_mc,
)
from .energy import (
    cheeger_energy,
    global_quotient,
    pointwise_quotient,
    quotient_upper_bound,
)
from .functions import TestFunction, bump, h1_horizontal_linear, linear, make_test_function, sine, sphere_height
from .geometry import (
    EUCLID_SIDE,
    H1_SIDE,
    ModelSpace,
    SpacePoint,
    UnsupportedRegimeError,
    ball_measure,
    distance,
    euclidean_space,
    glued_space,
    heisenberg_space,
    sample_ball,
    sphere_space,
    torus_space,
    weighted_space,
)
from .heisenberg import BusemannProbe, HPoint, busemann, busemann_rate, cc_distance
from .mc import EnergyEstimate, RandomStream
from .sweep import (
    FitResult,
    SweepConfig,
    SweepReport,
    extrapolate,
    render_csv,
    render_json,
    run_glued_demo,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BusemannProbe",
    "EUCLID_SIDE",
    "EnergyEstimate",
    "FitResult",
    "H1_SIDE",
    "HPoint",
    "ModelSpace",
    "RandomStream",
    "SpacePoint",
    "SweepConfig",
    "SweepReport",
    "TestFunction",
    "UnsupportedRegimeError",
    "ball_measure",
    "bump",
    "busemann",
    "busemann_rate",
    "c_euclidean_closed",
    "c_euclidean_exact",
    "c_euclidean_mc",
    "c_heisenberg_mc",
    "cc_distance",
    "cheeger_energy",
    "distance",
    "euclidean_space",
    "extrapolate",
    "global_quotient",
    "glued_space",
    "h1_horizontal_linear",
    "heisenberg_space",
    "k_bbm",
    "linear",
    "make_test_function",
    "pointwise_quotient",
    "quotient_upper_bound",
    "radial_moment",
    "render_csv",
    "render_json",
    "run_glued_demo",
    "run_sweep",
    "sample_ball",
    "sine",
    "sphere_height",
    "sphere_k_mc",
    "sphere_space",
    "torus_space",
    "weighted_space",
    "__version__",
]
