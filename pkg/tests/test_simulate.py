from __future__ import annotations

import math

import numpy as np
import numpy.testing as npt
import pytest

from fixtures import MOVING_START, MOVING_START_INDEX
from trioform.control import Gains, moving_velocity
from trioform.errors import DomainError, WrongKind, ZeroLink
from trioform.geometry import FormationSpec, error_norm, errors, signed_area
from trioform.simulate import (
    TRAJECTORY_HEADER,
    OutcomeKind,
    SimParams,
    is_flipped,
    simulate,
    step_rk4,
    verify_moving_velocity,
)
from trioform.sweep import sample_initial

SPEC60 = FormationSpec.isosceles(10.0, 60)


def gains(rad: float) -> Gains:
    return Gains.from_ratio(3.0, 48.0, rad)


class TestStepRK4:
    def test_fixed_point(self):
        spec = FormationSpec.from_angle(3, 4, 100)
        p = spec.reference_configuration() + 7.0
        npt.assert_allclose(step_rk4(p, spec, gains(1), 1e-3), p, rtol=0, atol=1e-14 * 10)

    def test_fourth_order_convergence(self):
        spec = FormationSpec.isosceles(2.0, 60)
        g = gains(1.0)
        p0 = spec.reference_configuration() + np.array([[0.3, -0.2], [0.1, 0.4], [-0.5, 0.2]])

        def endpoint(dt, T=0.2):
            p = p0.copy()
            for _ in range(int(round(T / dt))):
                p = step_rk4(p, spec, g, dt)
            return p

        ref = endpoint(1e-4)
        e1 = np.abs(endpoint(4e-3) - ref).max()
        e2 = np.abs(endpoint(2e-3) - ref).max()
        assert 12 < e1 / e2 < 20

    def test_error_decreases_near_reference(self, rng):
        spec = FormationSpec.isosceles(2.0, 75)
        g = gains(1.0)
        for _ in range(20):
            p = spec.reference_configuration() + rng.normal(scale=1e-3, size=(3, 2))
            assert error_norm(step_rk4(p, spec, g, 1e-3), spec) < error_norm(p, spec)

    def test_collision_raises(self):
        with pytest.raises(ZeroLink):
            step_rk4([[0, 0], [0, 0], [1, 0]], SPEC60, gains(1), 1e-3)


class TestSimParams:
    @pytest.mark.parametrize(
        "kw", [{"dt": 0}, {"dt": 1, "t_max": 0.5}, {"error_tol": 0}, {"conv_window": 0}]
    )
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            SimParams(**kw)

    def test_defaults(self):
        p = SimParams()
        assert (p.dt, p.t_max, p.conv_window) == (1e-3, 50.0, 500)
        assert (p.eq_velocity_tol, p.moving_residual_tol, p.error_tol) == (1e-8, 1e-6, 1e-6)


def test_kernel_matches_reference_stepper():
    # Small formation: the stability limiter does not bind, so the compiled
    # loop must take exactly the same RK4 steps as the reference stepper.
    spec = FormationSpec.isosceles(2.0, 60)
    g = gains(1.0)
    p0 = spec.reference_configuration() + np.array([[0.3, -0.2], [0.1, 0.4], [-0.5, 0.2]])
    traj, out = simulate(p0, spec, g, SimParams(t_max=0.05, record_stride=1))
    p = p0.copy()
    for k in range(1, 11):
        p = step_rk4(p, spec, g, 1e-3)
        npt.assert_allclose(traj.p[k], p, rtol=1e-13, atol=1e-13)
        assert traj.t[k] == pytest.approx(k * 1e-3, rel=1e-12)


def test_reference_start_is_desired_immediately():
    _, out = simulate(SPEC60.reference_configuration() + 3.0, SPEC60, gains(1))
    assert out.kind is OutcomeKind.DESIRED
    assert out.n_steps == 0
    assert out.kind.exit_code == 0


def test_area_gain_pair_and_moving_invariants():
    p0 = sample_initial(0, MOVING_START_INDEX)
    npt.assert_array_equal(p0, MOVING_START)
    _, mv = simulate(p0, SPEC60, gains(0.5))
    assert mv.kind is OutcomeKind.MOVING
    assert mv.kind.exit_code == 2
    assert signed_area(mv.final_config) < 0
    w = moving_velocity(SPEC60, gains(0.5))
    assert verify_moving_velocity(mv, SPEC60, gains(0.5)) < 1e-4 * np.linalg.norm(w)
    assert is_flipped(mv.final_config, SPEC60)
    assert np.linalg.norm(mv.steady_velocity) > SimParams().eq_velocity_tol
    _, ok = simulate(p0, SPEC60, gains(1.0))
    assert ok.kind is OutcomeKind.DESIRED
    assert ok.final_error_norm < 1e-6
    with pytest.raises(WrongKind):
        verify_moving_velocity(ok, SPEC60, gains(1.0))


def test_moving_velocity_right_angle():
    spec = FormationSpec.isosceles(10.0, 90)
    _, out = simulate(sample_initial(0, 37), spec, gains(0.05))
    assert out.kind is OutcomeKind.MOVING
    npt.assert_allclose(out.steady_velocity, (48.0, 48.0), rtol=1e-6)


def test_distance_law_in_vanishing_area_gain_limit():
    g = gains(1e-6)
    _, out = simulate(sample_initial(0, 1), SPEC60, g)
    assert out.kind is OutcomeKind.MOVING
    e = errors(out.final_config, SPEC60)
    z = out.final_config[1:] - out.final_config[0]
    for e_d, zi in ((e.e12d, z[0]), (e.e13d, z[1])):
        assert e_d == pytest.approx(-g.R_bd / np.linalg.norm(zi), rel=1e-3)


def test_collision_is_detected_and_robust_to_step_size():
    spec = FormationSpec.isosceles(3.0, 5)
    p0 = sample_initial(0, 1)
    for factor in (1.5, 0.2):
        _, out = simulate(p0, spec, gains(50), SimParams(stability_factor=factor))
        assert out.kind is OutcomeKind.COLLISION
        assert out.kind.exit_code == 3
        assert math.isnan(out.final_error_norm)


def test_short_horizon_is_undecided():
    _, out = simulate(sample_initial(0, 5), SPEC60, gains(1), SimParams(t_max=0.01))
    assert out.kind is OutcomeKind.UNDECIDED
    assert out.t_end == pytest.approx(0.01)
    assert out.kind.exit_code == 4


def test_determinism_and_buffer_growth():
    params = SimParams(record_stride=1)
    t1, o1 = simulate(sample_initial(0, 3), SPEC60, gains(2), params)
    t2, o2 = simulate(sample_initial(0, 3), SPEC60, gains(2), params)
    assert len(t1) > 1024  # forced the record buffer to grow
    assert np.array_equal(t1.p, t2.p) and np.array_equal(t1.t, t2.t)
    assert np.all(np.diff(t1.t) > 0)
    npt.assert_array_equal(t1.p[-1], o1.final_config)
    assert o1.n_steps == o2.n_steps and o1.t_end == o2.t_end


def test_unrecorded_run_matches_recorded():
    _, a = simulate(sample_initial(0, 4), SPEC60, gains(1), record=True)
    tr, b = simulate(sample_initial(0, 4), SPEC60, gains(1), record=False)
    npt.assert_array_equal(a.final_config, b.final_config)
    assert len(tr) == 2


def test_trajectory_csv(tmp_path):
    traj, _ = simulate(sample_initial(0, 7), SPEC60, gains(1), SimParams(record_stride=500))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    traj.to_csv(a)
    simulate(sample_initial(0, 7), SPEC60, gains(1), SimParams(record_stride=500))[0].to_csv(b)
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == ",".join(TRAJECTORY_HEADER)
    assert len(lines) == len(traj) + 1
    row = [float(v) for v in lines[1].split(",")]
    assert row[0] == 0.0
    npt.assert_array_equal(row[1:7], sample_initial(0, 7).ravel())
