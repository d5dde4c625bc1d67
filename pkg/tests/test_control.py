from __future__ import annotations

import math

import numpy as np
import numpy.testing as npt
import pytest

from oracles import grad_p1_fd, r1_potential, rand_config
from trioform import kernel
from trioform.control import (
    Gains,
    area_control_term,
    bearing_control_term,
    distance_control_term,
    link_velocity,
    moving_velocity,
    team_velocity,
)
from trioform.errors import DomainError, ZeroLink
from trioform.analysis.search import moving_zeros
from trioform.geometry import H, FormationSpec, error_norm, links

GAINS = Gains(3.0, 48.0, 1.7)


class TestGains:
    def test_ratios_and_threshold(self):
        g = Gains(3.0, 48.0, 1.5)
        assert g.R_bd == 16.0
        assert g.R_Ad == 0.5
        assert abs(g.d_hat - 2 * math.sqrt(3)) < 1e-12

    def test_from_ratio(self):
        g = Gains.from_ratio(3.0, 48.0, 0.5)
        assert g.K_A == 1.5

    @pytest.mark.parametrize("bad", [(0, 1, 1), (1, -1, 1), (1, 1, 0), (1, 1, math.nan), (1, math.inf, 1)])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(DomainError):
            Gains(*bad)


@pytest.mark.parametrize(
    "z, d, expected", [((2, 0), 1, (6, 0)), ((1, 0), 1, (0, 0)), ((0.6, 0.8), 2, (-1.8, -2.4))]
)
def test_distance_control_term(z, d, expected):
    npt.assert_allclose(distance_control_term(z, d), expected, atol=1e-15)


def test_bearing_control_term():
    npt.assert_array_equal(bearing_control_term((1, 0), (1, 0)), (0, 0))
    npt.assert_array_equal(bearing_control_term((0, 1), (1, 0)), (-1, 1))
    s = FormationSpec.isosceles(1, 60)
    npt.assert_allclose(bearing_control_term(-s.g13_star, s.g12_star), (-1.5, -math.sqrt(3) / 2), atol=1e-15)


def test_area_control_term():
    npt.assert_allclose(area_control_term((1, 0), (0, 1), 0.0), (0.5, 0.5))
    s = FormationSpec.isosceles(3, 75)
    p = s.reference_configuration()
    npt.assert_allclose(area_control_term(p[1], p[2], s.A_star), (0, 0), atol=1e-14)
    # mirrored triangle: e_A = -2 A*
    z12, z13 = p[1] * np.array([1, -1]), p[2] * np.array([1, -1])
    expected = -2 * s.A_star * np.array([[0, 1], [-1, 0]]) @ (z13 - z12)
    npt.assert_allclose(area_control_term(z12, z13, s.A_star), expected, rtol=1e-13)


def test_zero_velocity_on_desired_set(rng):
    spec = FormationSpec.from_angle(4, 9, 50)
    for _ in range(50):
        v = rng.uniform(-1e3, 1e3, size=2)
        assert np.abs(team_velocity(spec.reference_configuration() + v, spec, GAINS)).max() < 1e-12 * 1e3


def test_moving_velocity_at_flipped_equilibrium():
    # Solve the scalar moving equation for x = y at theta = 60 deg with tiny R_Ad,
    # then build the flipped configuration; all three robots must drift at w.
    spec = FormationSpec.isosceles(10.0, 60)
    g = Gains.from_ratio(3.0, 48.0, 0.5)
    w = moving_velocity(spec, g)
    npt.assert_allclose(w, (72.0, 24 * math.sqrt(3)), rtol=1e-15)
    x, y = moving_zeros(10.0, g.R_bd, g.R_Ad, spec.theta_star, (0.5, 1.5), (0.5, 1.5)).zeros[0]
    p = np.stack([np.zeros(2), -x * 10 * spec.g13_star, -y * 10 * spec.g12_star])
    v = team_velocity(p, spec, g)
    for row in v:
        npt.assert_allclose(row, w, rtol=1e-9)
    # link form: z23 stationary
    npt.assert_allclose(link_velocity(links(p), spec, g)[2], 0, atol=1e-12)


def test_translation_invariance(rng):
    spec = FormationSpec.from_angle(5, 5, 120)
    for _ in range(100):
        p = rand_config(rng)
        v = rng.uniform(-50, 50, size=2)
        a = team_velocity(p, spec, GAINS)
        b = team_velocity(p + v, spec, GAINS)
        npt.assert_allclose(a, b, rtol=1e-10, atol=1e-10 * np.abs(a).max())


def test_gradient_matches_finite_differences(rng):
    spec = FormationSpec.from_angle(6, 8, 70)
    for _ in range(100):
        p = rand_config(rng, box=10.0)
        fun = lambda q: r1_potential(q, 6, 8, spec.A_star, GAINS.K_d, GAINS.K_A)
        expected = -grad_p1_fd(fun, p)
        got = team_velocity(p, spec, GAINS)[0]
        npt.assert_allclose(got, expected, rtol=1e-5, atol=1e-5 * np.linalg.norm(expected))


def test_bearing_robots_follow_bearing_law():
    spec = FormationSpec.isosceles(2, 90)
    p = np.array([[0.0, 0.0], [0.0, 5.0], [-3.0, 0.0]])
    v = team_velocity(p, spec, GAINS)
    npt.assert_allclose(v[1], -48 * (np.array([0, 1]) - spec.g12_star))
    npt.assert_allclose(v[2], -48 * (np.array([-1, 0]) - spec.g13_star), atol=1e-13)


def test_link_velocity_consistency(rng):
    spec = FormationSpec.from_angle(3, 7, 35)
    for _ in range(1000):
        p = rand_config(rng)
        lhs = link_velocity(links(p), spec, GAINS)
        rhs = H @ team_velocity(p, spec, GAINS)
        npt.assert_allclose(lhs, rhs, rtol=0, atol=1e-12 * max(1.0, np.abs(rhs).max()))


def test_zero_link_raises():
    spec = FormationSpec.isosceles(1, 60)
    with pytest.raises(ZeroLink):
        team_velocity([[0, 0], [0, 0], [1, 1]], spec, GAINS)
    with pytest.raises(ZeroLink):
        link_velocity([[0, 0], [1, 1], [1, 1]], spec, GAINS)


def test_kernel_rhs_matches_reference(rng):
    spec = FormationSpec.from_angle(10, 15, 60)
    prm = kernel.pack_problem(spec, GAINS, 1e-9)
    out = np.empty(6)
    for _ in range(300):
        p = rand_config(rng, box=100.0)
        L = kernel.rhs(p.ravel().copy(), out, prm)
        assert L > 0
        ref = team_velocity(p, spec, GAINS)
        npt.assert_allclose(out, ref.ravel(), rtol=1e-12, atol=1e-12 * np.abs(ref).max())
        e = kernel.error_norm_flat(p.ravel().copy(), prm)
        assert e == pytest.approx(error_norm(p, spec), rel=1e-12)
    assert kernel.rhs(np.array([0, 0, 0, 0, 1.0, 1.0]), out, prm) == -1.0


def _jacobian_fd(p, spec, gains, h=1e-6):
    p = p.ravel()
    J = np.empty((6, 6))
    for k in range(6):
        a = p.copy()
        b = p.copy()
        s = h * max(1.0, abs(p[k]))
        a[k] += s
        b[k] -= s
        J[:, k] = (team_velocity(a, spec, gains).ravel() - team_velocity(b, spec, gains).ravel()) / (2 * s)
    return J


def test_step_bound_dominates_jacobian_spectrum(rng):
    # The limiter sets h = 1.5 / L; RK4 is stable for |h lambda| up to ~2.78 on
    # the negative real axis, so rho(J) <= 1.5 L keeps h rho within that.
    spec = FormationSpec.isosceles(10, 60)
    gains = Gains.from_ratio(3, 48, 2.0)
    prm = kernel.pack_problem(spec, gains, 1e-9)
    out = np.empty(6)
    worst = 0.0
    for _ in range(300):
        p = rand_config(rng, box=30.0)
        L = kernel.rhs(p.ravel().copy(), out, prm)
        rho = np.abs(np.linalg.eigvals(_jacobian_fd(p, spec, gains))).max()
        worst = max(worst, rho / L)
    assert worst < 1.5
