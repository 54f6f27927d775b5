"""Rate-model fits: recovery, degeneracy, and the fallback path."""

import math

import numpy as np
import pytest

from bbmlab.sweep import FitResult, extrapolate


def test_recovers_affine_in_r_squared():
    pts = [(0.4, 2.0 + 0.5 * 0.4 ** 2, 1e-6),
           (0.2, 2.0 + 0.5 * 0.2 ** 2, 1e-6),
           (0.1, 2.0 + 0.5 * 0.1 ** 2, 1e-6),
           (0.05, 2.0 + 0.5 * 0.05 ** 2, 1e-6)]
    fit = extrapolate(pts)
    assert not fit.fallback and not fit.degenerate
    assert fit.limit == pytest.approx(2.0, abs=1e-7)
    assert fit.rate == pytest.approx(2.0, abs=1e-3)


def test_recovers_first_order_rate():
    pts = [(r, 5.0 - 1.3 * r, 1e-7) for r in (0.8, 0.4, 0.2, 0.1, 0.05)]
    fit = extrapolate(pts)
    assert fit.limit == pytest.approx(5.0, abs=1e-7)
    assert fit.rate == pytest.approx(1.0, abs=1e-3)


def test_recovers_fractional_rate():
    pts = [(r, 1.0 + 0.7 * r ** 1.5, 1e-8) for r in (0.5, 0.25, 0.125, 0.0625, 0.03125)]
    fit = extrapolate(pts)
    assert fit.limit == pytest.approx(1.0, rel=1e-6)
    assert fit.rate == pytest.approx(1.5, abs=0.01)


def test_constant_sequence_is_degenerate():
    pts = [(r, 3.0, 1e-6) for r in (0.4, 0.2, 0.1)]
    fit = extrapolate(pts)
    assert fit.degenerate
    assert fit.rate == 0.0
    assert fit.limit == pytest.approx(3.0, abs=1e-9)


def test_noise_below_sigma_is_degenerate():
    gen = np.random.default_rng(7)
    pts = [(r, 3.0 + 1e-7 * gen.standard_normal(), 1e-6)
           for r in (0.4, 0.2, 0.1, 0.05)]
    fit = extrapolate(pts)
    assert fit.degenerate
    assert fit.rate == 0.0
    assert fit.limit == pytest.approx(3.0, abs=1e-6)


def test_non_monotone_data_falls_back_to_smallest_radius():
    # no power law fits these values at the stated precision
    pts = [(0.4, 3.1, 1e-4), (0.2, 2.2, 1e-4), (0.1, 2.8, 1e-4)]
    fit = extrapolate(pts)
    assert fit.fallback
    assert fit.limit == 2.8
    assert fit.rate == 0.0


def test_fallback_threshold_is_configurable():
    pts = [(0.4, 2.08, 1e-3), (0.2, 2.02, 1e-3), (0.1, 2.035, 1e-3)]
    loose = extrapolate(pts, residual_bound=10.0)
    tight = extrapolate(pts, residual_bound=1e-9)
    assert not loose.fallback
    assert tight.fallback


def test_weighting_downweights_noisy_points():
    # large-r point is far off but carries a huge sigma; the fit should
    # essentially ignore it
    pts = [(0.4, 9.0, 5.0),
           (0.2, 2.0 + 0.2 ** 2, 1e-8),
           (0.1, 2.0 + 0.1 ** 2, 1e-8),
           (0.05, 2.0 + 0.05 ** 2, 1e-8)]
    fit = extrapolate(pts)
    assert fit.limit == pytest.approx(2.0, abs=1e-4)


def test_limit_sigma_reasonable():
    pts = [(r, 2.0 + 0.5 * r, 1e-4) for r in (0.4, 0.2, 0.1, 0.05)]
    fit = extrapolate(pts)
    assert 0.0 < fit.limit_sigma < 0.01


def test_requires_three_radii():
    with pytest.raises(ValueError):
        extrapolate([(0.2, 1.0, 1e-6), (0.1, 1.1, 1e-6)])


def test_rejects_duplicate_radii():
    with pytest.raises(ValueError):
        extrapolate([(0.2, 1.0, 1e-6), (0.2, 1.1, 1e-6), (0.1, 1.2, 1e-6)])


def test_public_dict_shape():
    pts = [(r, 2.0 + r, 1e-6) for r in (0.4, 0.2, 0.1)]
    d = extrapolate(pts).to_public_dict()
    assert set(d) == {"limit", "rate", "residual", "fallback"}
    assert isinstance(d["fallback"], bool)


def test_fit_result_defaults():
    fr = FitResult(limit=1.0, rate=2.0, residual=0.0, fallback=False)
    assert fr.degenerate is False and fr.limit_sigma == 0.0
