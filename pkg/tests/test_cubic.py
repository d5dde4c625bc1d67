from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import bisect, cubic_positive_roots_bisect
from trioform.analysis.cubic import (
    ReducedCubic,
    cubic_f_roots,
    solve_reduced_cubic_positive,
    threshold_distance,
)
from trioform.errors import DomainError, NegativeDiscriminant

# Frozen from the bisection oracle (see test_frozen_values_match_oracle).
F_ROOTS_10_16 = (0.016004099148953465, 0.9919018966162678)


@pytest.mark.parametrize("c, d, root", [(-3.0, 2.0, 1.0), (-12.0, 16.0, 2.0)])
def test_double_root_anchor(c, d, root):
    r = solve_reduced_cubic_positive(c, d)
    assert r.y_p1 == pytest.approx(root, abs=1e-12)
    assert r.y_p2 == pytest.approx(root, abs=1e-12)
    assert r.phi_v == pytest.approx(math.pi, abs=1e-15)
    assert r.y_p1 == pytest.approx(np.cbrt(d / 2), abs=1e-12)


def test_phi_quadrant_and_polar_radius():
    r = solve_reduced_cubic_positive(-100.0, 16.0)
    assert math.pi / 2 < r.phi_v <= math.pi
    assert r.r_v == pytest.approx(math.sqrt((100 / 3) ** 3))
    assert 90 < r.phi_v_deg <= 180


def test_ell10_instance_against_bisection():
    r = solve_reduced_cubic_positive(-100.0, 16.0)
    lo, hi = cubic_positive_roots_bisect(-100.0, 16.0)
    assert abs(r.y_p1 - lo) < 1e-9 and abs(r.y_p2 - hi) < 1e-9
    assert r.y_p1 == pytest.approx(0.16004, abs=1e-4)
    assert r.y_p2 == pytest.approx(9.91902, abs=1e-4)


@pytest.mark.parametrize("c, d", [(0.0, 1.0), (1.0, 1.0), (-1.0, 0.0), (-1.0, -2.0)])
def test_domain_errors(c, d):
    with pytest.raises(DomainError):
        solve_reduced_cubic_positive(c, d)


def test_negative_discriminant():
    with pytest.raises(NegativeDiscriminant):
        solve_reduced_cubic_positive(-3.0, 2.5)


@given(
    st.floats(0.01, 1e3),  # |c|
    st.floats(0.0, 1.0, exclude_max=False),  # d as a fraction of the largest admissible d
)
def test_roots_satisfy_cubic(mc, frac):
    c = -mc
    d_max = math.sqrt(-4 * c**3 / 27)
    d = max(frac * d_max, 1e-9 * d_max)
    r = solve_reduced_cubic_positive(c, d)
    cub = ReducedCubic(c, d)
    scale = max(1.0, abs(d), abs(c) ** 1.5)
    assert abs(cub(r.y_p1)) <= 1e-9 * scale
    assert abs(cub(r.y_p2)) <= 1e-9 * scale
    assert 0 < r.y_p1 <= r.y_p2
    assert cub.discriminant >= -1e-9 * abs(c) ** 3


class TestThreshold:
    @pytest.mark.parametrize(
        "R, expected", [(16, 2 * math.sqrt(3)), (2, math.sqrt(3)), (0.25, math.sqrt(3) / 2)]
    )
    def test_values(self, R, expected):
        assert abs(threshold_distance(R) - expected) < 1e-12

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            threshold_distance(0)


class TestFRoots:
    def test_below_threshold_is_none(self):
        assert cubic_f_roots(3.0, 16.0) is None

    def test_at_threshold_double_root(self):
        fr = cubic_f_roots(2 * math.sqrt(3), 16.0)
        assert fr.r1 == pytest.approx(1 / math.sqrt(3), abs=1e-9)
        assert fr.r2 == pytest.approx(1 / math.sqrt(3), abs=1e-9)
        z = fr.r1 * 2 * math.sqrt(3)
        assert z == pytest.approx(2.0, abs=1e-9)

    def test_frozen_values_match_oracle(self):
        f = lambda z: z**3 - 100 * z + 16
        split = 10 / math.sqrt(3)
        assert abs(bisect(f, 0, split) / 10 - F_ROOTS_10_16[0]) < 1e-12
        assert abs(bisect(f, split, 10) / 10 - F_ROOTS_10_16[1]) < 1e-12

    def test_ell10(self):
        fr = cubic_f_roots(10.0, 16.0)
        assert abs(fr.r1 - F_ROOTS_10_16[0]) < 1e-9
        assert abs(fr.r2 - F_ROOTS_10_16[1]) < 1e-9
        # cross-check against numpy's companion-matrix roots
        np_roots = sorted(r.real for r in np.roots([1, 0, -100, 16]) if r.real > 0)
        assert np.allclose(np.array(np_roots) / 10, F_ROOTS_10_16, atol=1e-12)

    @given(st.floats(3.5, 200.0), st.floats(0.1, 50.0))
    def test_range_containment(self, ell, R):
        fr = cubic_f_roots(ell, R)
        if fr is None:
            assert ell < threshold_distance(R) * (1 + 1e-9)
            return
        s = 1 / math.sqrt(3)
        assert 0 < fr.r1 <= s + 1e-9 and s - 1e-9 <= fr.r2 < 1
        for r in (fr.r1, fr.r2):
            z = r * ell
            assert abs(z**3 - ell**2 * z + R) <= 1e-9 * ell**3

    def test_formula_in_scaled_form(self):
        fr = cubic_f_roots(10.0, 16.0)
        k = 2 * math.sqrt(3) / 3
        assert fr.r1 == pytest.approx(k * math.cos(fr.phi / 3 - 2 * math.pi / 3), rel=1e-14)
        assert fr.r2 == pytest.approx(k * math.cos(fr.phi / 3), rel=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            cubic_f_roots(0, 1)
        with pytest.raises(DomainError):
            cubic_f_roots(1, 0)
