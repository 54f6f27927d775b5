"""Model spaces: metric axioms, ball samplers, ball measures."""

import math

import numpy as np
import pytest
from scipy import stats

from bbmlab.geometry import (
    EUCLID_SIDE,
    H1_SIDE,
    UnsupportedRegimeError,
    ball_measure,
    distance,
    euclidean_space,
    glued_space,
    heisenberg_space,
    make_point,
    sample_ball,
    sample_ball_batch,
    sphere_space,
    torus_space,
    total_measure,
    unit_ball_volume,
    weighted_space,
)
from bbmlab.mc import RandomStream


def _random_point(space, rng):
    if space.kind in ("euclidean", "weighted"):
        return make_point(space, *rng.normal(size=space.dim))
    if space.kind == "torus":
        return make_point(space, *rng.uniform(0, space.period, size=space.dim))
    if space.kind == "sphere2":
        g = rng.normal(size=3)
        return make_point(space, *(g / np.linalg.norm(g)))
    if space.kind == "heisenberg1":
        return make_point(space, *rng.normal(size=3))
    if space.kind == "glued":
        if rng.random() < 0.5:
            return make_point(space, *rng.normal(size=4), side=EUCLID_SIDE)
        return make_point(space, *rng.normal(size=3), side=H1_SIDE)
    raise AssertionError(space.kind)


SPACES = [
    euclidean_space(2),
    euclidean_space(4),
    torus_space(2, 2 * math.pi),
    sphere_space(),
    heisenberg_space(),
    glued_space(),
]


@pytest.mark.parametrize("space", SPACES, ids=lambda s: s.kind + str(s.dim))
def test_metric_axioms(space):
    rng = np.random.default_rng(101)
    n = 200 if space.kind == "glued" else 1000
    for _ in range(n):
        x, y, z = (_random_point(space, rng) for _ in range(3))
        dxy = distance(space, x, y)
        dyx = distance(space, y, x)
        dxx = distance(space, x, x)
        assert dxy >= 0
        assert dxx <= 1e-9
        assert dxy == pytest.approx(dyx, rel=1e-9, abs=1e-12)
        assert distance(space, x, z) <= dxy + distance(space, y, z) + 1e-6


def test_point_validation():
    sp = sphere_space()
    with pytest.raises(ValueError):
        make_point(sp, 1.0, 1.0, 0.0)
    eu = euclidean_space(3)
    with pytest.raises(ValueError):
        make_point(eu, 1.0, 2.0)
    gl = glued_space()
    with pytest.raises(ValueError):
        make_point(gl, 1.0, 2.0, 3.0)  # no side
    with pytest.raises(ValueError):
        make_point(gl, 1.0, 2.0, 3.0, side=EUCLID_SIDE)  # wrong arity
    with pytest.raises(ValueError):
        distance(eu, make_point(eu, 0, 0, 0), make_point(sp, 0.0, 0.0, 1.0))


def test_torus_wraps_and_distance():
    sp = torus_space(2, 2 * math.pi)
    x = make_point(sp, 0.1, 0.0)
    y = make_point(sp, 2 * math.pi - 0.1, 0.0)
    assert distance(sp, x, y) == pytest.approx(0.2, rel=1e-12)
    z = make_point(sp, -0.5, 7.0)
    assert 0 <= z.coords[0] < 2 * math.pi and 0 <= z.coords[1] < 2 * math.pi


def test_euclid_ball_radii_distribution():
    # |Y - x| / r should have CDF t^N on [0, 1]
    sp = euclidean_space(3)
    gen = RandomStream(7).generator()
    centers = np.zeros((20000, 3))
    y = sample_ball_batch(sp, centers, 2.0, gen)
    u = (np.linalg.norm(y, axis=1) / 2.0) ** 3
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_euclid_ball_direction_isotropy():
    sp = euclidean_space(2)
    gen = RandomStream(8).generator()
    y = sample_ball_batch(sp, np.zeros((20000, 2)), 1.0, gen)
    ang = np.arctan2(y[:, 1], y[:, 0])
    assert stats.kstest((ang + np.pi) / (2 * np.pi), "uniform").pvalue > 1e-3


def test_sphere_cap_distribution():
    sp = sphere_space()
    gen = RandomStream(9).generator()
    center = np.tile(np.array([0.0, 0.0, 1.0]), (20000, 1))
    r = 0.7
    y = sample_ball_batch(sp, center, r, gen)
    np.testing.assert_allclose(np.linalg.norm(y, axis=1), 1.0, rtol=1e-12)
    cos_t = y[:, 2]
    assert cos_t.min() >= math.cos(r) - 1e-12
    u = (1.0 - cos_t) / (1.0 - math.cos(r))
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_sphere_cap_respects_center():
    sp = sphere_space()
    gen = RandomStream(10).generator()
    c = np.array([1.0, 0.0, 0.0])
    y = sample_ball_batch(sp, np.tile(c, (5000, 1)), 0.3, gen)
    assert np.arccos(np.clip(y @ c, -1, 1)).max() <= 0.3 + 1e-12


def test_torus_ball_wraps():
    sp = torus_space(2, 2 * math.pi)
    gen = RandomStream(11).generator()
    centers = np.zeros((5000, 2))  # near the wrap seam
    y = sample_ball_batch(sp, centers, 0.5, gen)
    assert np.all((y >= 0) & (y < 2 * math.pi))
    x = make_point(sp, 0.0, 0.0)
    d = np.array([distance(sp, x, make_point(sp, *row)) for row in y[:200]])
    assert d.max() <= 0.5 + 1e-12


def test_torus_ball_radius_guard():
    sp = torus_space(2, 2.0)
    with pytest.raises(UnsupportedRegimeError):
        sample_ball_batch(sp, np.zeros((4, 2)), 1.0, RandomStream(1).generator())
    with pytest.raises(UnsupportedRegimeError):
        ball_measure(sp, make_point(sp, 0, 0), 1.5)


def test_heisenberg_ball_sampling():
    sp = heisenberg_space()
    gen = RandomStream(12).generator()
    center = np.tile(np.array([0.4, -0.2, 1.0]), (10000, 1))
    r = 0.6
    y = sample_ball_batch(sp, center, r, gen)
    x = make_point(sp, 0.4, -0.2, 1.0)
    d = np.array([distance(sp, x, make_point(sp, *row)) for row in y[:300]])
    assert d.max() < r


def test_glued_ball_one_sided():
    sp = glued_space()
    x = make_point(sp, 0.0, 3.0, 0.0, 0.0, side=EUCLID_SIDE)
    y = sample_ball(sp, x, 0.5, RandomStream(13))
    assert y.side == EUCLID_SIDE
    with pytest.raises(UnsupportedRegimeError):
        sample_ball(sp, x, 3.5, RandomStream(13))  # reaches the seam


def test_ball_measures():
    assert ball_measure(euclidean_space(3), make_point(euclidean_space(3), 0, 0, 0), 2.0) == \
        pytest.approx(4.0 / 3.0 * math.pi * 8.0, rel=1e-12)
    sp = torus_space(2, 2 * math.pi)
    assert ball_measure(sp, make_point(sp, 1, 1), 0.5) == pytest.approx(math.pi * 0.25, rel=1e-12)
    ss = sphere_space()
    x = make_point(ss, 0, 0, 1)
    assert ball_measure(ss, x, 0.8) == pytest.approx(2 * math.pi * (1 - math.cos(0.8)), rel=1e-12)
    assert ball_measure(ss, x, 10.0) == pytest.approx(4 * math.pi, rel=1e-12)
    hs = heisenberg_space()
    v1 = ball_measure(hs, make_point(hs, 0, 0, 0), 1.0)
    v2 = ball_measure(hs, make_point(hs, 5, 5, 5), 2.0)
    assert v2 == pytest.approx(16.0 * v1, rel=1e-12)  # r^4 scaling, translation invariance
    assert total_measure(sp) == pytest.approx((2 * math.pi) ** 2)
    assert total_measure(ss) == pytest.approx(4 * math.pi)
    assert total_measure(hs) is None


def _example_weighted(n=2):
    def w(x):
        return 1.0 + 0.5 * np.sin(x[..., 0]) * np.cos(x[..., 1] if n > 1 else 0.0)

    return weighted_space(n, w, lower=0.5, upper=1.5, window=4.0)


def test_weighted_space_bounds_validation():
    def bad(x):
        return 0.1 + 0.0 * x[..., 0]

    with pytest.raises(ValueError):
        weighted_space(2, bad, lower=0.5, upper=1.5, window=2.0)


def test_weighted_ball_sampler_density():
    # accepted points in a half-plane split must match the weight's mass split
    sp = _example_weighted()
    gen = RandomStream(21).generator()
    centers = np.zeros((40000, 2))
    y = sample_ball_batch(sp, centers, 1.0, gen)
    assert np.linalg.norm(y, axis=1).max() <= 1.0 + 1e-12
    # oracle by dense quadrature over the disc
    t = np.linspace(-1, 1, 801)
    xx, yy = np.meshgrid(t, t, indexing="ij")
    mask = xx ** 2 + yy ** 2 <= 1.0
    wgt = (1.0 + 0.5 * np.sin(xx) * np.cos(yy)) * mask
    frac_right = wgt[xx > 0].sum() / wgt.sum()
    observed = (y[:, 0] > 0).mean()
    assert observed == pytest.approx(frac_right, abs=0.01)


def test_weighted_ball_measure():
    sp = _example_weighted()
    x = make_point(sp, 0.5, 0.5)
    t = np.linspace(-1, 1, 801)
    xx, yy = np.meshgrid(t, t, indexing="ij")
    mask = xx ** 2 + yy ** 2 <= 1.0
    cell = (t[1] - t[0]) ** 2
    oracle = ((1.0 + 0.5 * np.sin(xx + 0.5) * np.cos(yy + 0.5)) * mask).sum() * cell
    assert ball_measure(sp, x, 1.0) == pytest.approx(oracle, rel=0.01)


def test_weighted_window_guard():
    sp = _example_weighted()
    with pytest.raises(UnsupportedRegimeError):
        sample_ball_batch(sp, np.full((4, 2), 3.9), 0.5, RandomStream(2).generator())


def test_unit_ball_volume_values():
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0)
    assert unit_ball_volume(4) == pytest.approx(math.pi ** 2 / 2.0)
