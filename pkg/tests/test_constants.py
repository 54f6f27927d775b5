"""Tangent constants: closed forms, Monte Carlo cross-checks, and the
radial-moment relation."""

import math
from fractions import Fraction

import numpy as np
import pytest

from bbmlab.constants import (
    c_euclidean_closed,
    c_euclidean_exact,
    c_euclidean_mc,
    c_heisenberg_mc,
    k_bbm,
    radial_moment,
    sphere_k_mc,
)
from bbmlab.mc import RandomStream


def test_closed_form_exact_values():
    assert c_euclidean_closed(4, 4) == 0.0625  # 1/16, bit-exact
    assert c_euclidean_closed(2, 2) == 0.25
    assert c_euclidean_closed(2, 1) == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert c_euclidean_closed(3, 3) == 0.125
    assert c_euclidean_exact(4, 4) == Fraction(1, 16)
    assert c_euclidean_exact(2, 2) == Fraction(1, 4)
    assert c_euclidean_exact(2, 1) == Fraction(1, 3)


def test_closed_form_odd_p_even_n_carries_pi():
    # C(3, 2) = Gamma(2)Gamma(2) / (Gamma(1/2)Gamma(7/2)) = 8 / (15 pi):
    # the only parity combination where the sqrt(pi) factors survive
    assert c_euclidean_closed(3, 2) == pytest.approx(8.0 / (15.0 * math.pi), rel=1e-15)
    with pytest.raises(ValueError, match="not rational"):
        c_euclidean_exact(3, 2)


def test_closed_form_integer_matches_gamma_formula():
    from scipy.special import gamma

    for p in (2, 3, 4, 6):
        for n in (1, 2, 3, 4, 7):
            direct = (gamma((p + 1) / 2) * gamma(n / 2 + 1)
                      / (gamma(0.5) * gamma((n + p) / 2 + 1)))
            assert c_euclidean_closed(p, n) == pytest.approx(float(direct), rel=1e-14)


def test_closed_form_noninteger_p():
    # direct 1-d oracle for N = 1: mean of |z|^p on [-1, 1] is 1/(p+1)
    for p in (2.5, 3.7):
        assert c_euclidean_closed(p, 1) == pytest.approx(1.0 / (p + 1.0), rel=1e-12)


@pytest.mark.parametrize("p,n", [(2, 1), (2, 2), (3, 3), (4, 4)])
def test_mc_agrees_with_closed_form(p, n):
    est = c_euclidean_mc(p, n, 1 << 20, RandomStream(50 + n))
    closed = c_euclidean_closed(p, n)
    assert est.std_error < 1e-3
    assert abs(est.value - closed) <= 3 * est.std_error


def test_mc_rotation_invariance():
    v = np.array([1.0, 1.0, -1.0]) / math.sqrt(3.0)
    a = c_euclidean_mc(2, 3, 1 << 19, RandomStream(60))
    b = c_euclidean_mc(2, 3, 1 << 19, RandomStream(61), v=v)
    assert abs(a.value - b.value) <= 3 * math.hypot(a.std_error, b.std_error)


def test_radial_moment():
    assert radial_moment(2, 2) == 0.5
    assert radial_moment(4, 4) == 0.5
    assert radial_moment(0, 3) == 1.0
    with pytest.raises(ValueError):
        radial_moment(-1, 2)


@pytest.mark.parametrize("p,n", [(2, 2), (4, 4), (3, 3)])
def test_k_bbm_against_sphere_mc(p, n):
    # C(p, N) = radial_moment(p, N) * K(p, N) with K the sphere average
    est = sphere_k_mc(p, n, 1 << 20, RandomStream(70 + p))
    assert abs(k_bbm(p, n) - est.value) <= 3 * est.std_error


def test_heisenberg_constant_direction_invariant():
    a = c_heisenberg_mc(4, 1 << 19, RandomStream(80))
    b = c_heisenberg_mc(4, 1 << 19, RandomStream(81), v=(0.0, 1.0))
    c = c_heisenberg_mc(4, 1 << 19, RandomStream(82), v=(0.6, 0.8))
    assert abs(a.value - b.value) <= 3 * math.hypot(a.std_error, b.std_error)
    assert abs(a.value - c.value) <= 3 * math.hypot(a.std_error, c.std_error)


def test_heisenberg_constant_reference_value():
    est = c_heisenberg_mc(4, 1 << 21, RandomStream(83))
    assert est.value == pytest.approx(0.106, abs=0.005)


def test_validation():
    with pytest.raises(ValueError):
        c_euclidean_closed(1.0, 2)
    with pytest.raises(ValueError):
        c_euclidean_closed(2, 0)
    with pytest.raises(ValueError):
        c_euclidean_mc(2, 2, 10, RandomStream(1))
    with pytest.raises(ValueError):
        c_heisenberg_mc(2, 1 << 12, RandomStream(1), v=(2.0, 0.0))
