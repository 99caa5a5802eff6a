"""
Unit Tests for LIPM Recovery Module

Tests the pendulum integration, the capture-point decision boundary and the
CoP controllers.

Run with:
    pytest tests/test_lipm.py -v
"""

import sys
import math
import pytest
import numpy as np
from pathlib import Path
from hypothesis import given, settings, strategies as st

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.lipm import (
    Controller,
    FootGeometry,
    LipmError,
    LipmParams,
    PhasePoint,
    Verdict,
    apply_push,
    bang_bang_oracle,
    capture_point,
    classify_recovery,
    closed_form,
    decision_boundary,
    orbital_energy,
    phase_trajectory,
    simulate_lipm,
    sweep_phase_grid,
)
from src.sensor_ingest import Handedness, Sex, SubjectMeta


@pytest.fixture
def params():
    # omega = sqrt(10)
    return LipmParams(z0=0.98, mass=60.0, g=9.8)


@pytest.fixture
def foot():
    return FootGeometry(cop_min=-0.05, cop_max=0.15)


class TestParams:
    """Tests for pendulum constants."""

    def test_omega(self, params):
        """Test omega = sqrt(g / z0)."""
        assert params.omega == pytest.approx(math.sqrt(10.0))

    @pytest.mark.parametrize("kwargs", [
        {"z0": 0.0, "mass": 60.0},
        {"z0": 1.0, "mass": -1.0},
        {"z0": 1.0, "mass": 60.0, "g": 0.0},
    ])
    def test_rejects_non_positive(self, kwargs):
        """Test every constant must be positive."""
        with pytest.raises(LipmError):
            LipmParams(**kwargs)

    def test_from_subject(self):
        """Test the CoM height is a fraction of stature."""
        meta = SubjectMeta(height=1.70, weight=60.0, sex=Sex.FEMALE, handedness=Handedness.LEFT, age=22)
        p = LipmParams.from_subject(meta)
        assert p.z0 == pytest.approx(0.57 * 1.70)
        assert p.mass == 60.0

    def test_foot_order(self):
        """Test the CoP range must be ordered."""
        with pytest.raises(LipmError):
            FootGeometry(cop_min=0.1, cop_max=0.1)

    def test_non_finite_state(self):
        """Test phase points must be finite."""
        with pytest.raises(LipmError):
            PhasePoint(float("nan"), 0.0)


class TestIntegration:
    """Tests for the RK4 pendulum integration."""

    def test_matches_closed_form(self, params):
        """Test RK4 at 1 ms tracks the analytic solution within 1e-8."""
        initial = PhasePoint(0.02, 0.1)
        traj = simulate_lipm(params, initial, lambda t, s: 0.05, dt=1e-3, t_end=1.0)
        x, xdot = closed_form(params, initial, 0.05, traj.t)
        assert np.max(np.abs(traj.x - x)) <= 1e-8
        assert np.max(np.abs(traj.xdot - xdot)) <= 1e-8

    def test_closed_form_value(self, params):
        """Test x(0.2) from rest at 0.1 m over the ankle."""
        x, xdot = closed_form(params, PhasePoint(0.1, 0.0), 0.0, 0.2)
        assert float(x) == pytest.approx(0.120675, abs=1e-6)
        assert float(xdot) == pytest.approx(0.1 * math.sqrt(10.0) * math.sinh(math.sqrt(10.0) * 0.2))

    def test_orbital_energy_conserved(self, params):
        """Test the orbital energy stays constant under a fixed CoP."""
        initial = PhasePoint(-0.01, 0.3)
        traj = simulate_lipm(params, initial, lambda t, s: 0.0, dt=1e-3, t_end=1.0)
        energies = np.array([orbital_energy(params, s, 0.0) for s in traj.points()])
        assert np.max(np.abs(energies - energies[0])) <= 1e-9

    def test_balanced_state_stays(self, params):
        """Test the CoM over the CoP at rest does not move."""
        traj = simulate_lipm(params, PhasePoint(0.05, 0.0), lambda t, s: 0.05, dt=1e-2, t_end=1.0)
        np.testing.assert_allclose(traj.x, 0.05)
        np.testing.assert_allclose(traj.xdot, 0.0)

    def test_cop_clamped_to_foot(self, params, foot):
        """Test CoP commands outside the foot are clamped."""
        traj = simulate_lipm(params, PhasePoint(0.0, 0.0), lambda t, s: 5.0, dt=1e-2, t_end=0.1, foot=foot)
        np.testing.assert_allclose(traj.p, foot.cop_max)
        assert len(traj.p) == len(traj.t)

    def test_stop_callback(self, params):
        """Test a stop condition ends the run early."""
        traj = simulate_lipm(
            params, PhasePoint(0.0, 1.0), lambda t, s: 0.0, dt=1e-3, t_end=5.0,
            stop=lambda t, y: y[0] > 0.5,
        )
        assert traj.x[-1] > 0.5
        assert traj.t[-1] < 5.0


class TestCapturePoint:
    """Tests for the capture point and decision boundary."""

    def test_capture_point(self, params):
        """Test cp = x + x_dot / omega."""
        assert capture_point(params, PhasePoint(0.1, math.sqrt(10.0))) == pytest.approx(1.1)

    def test_push_changes_velocity(self, params):
        """Test an impulse adds impulse / mass to the velocity."""
        pushed = apply_push(params, PhasePoint(0.0, 0.1), 30.0)
        assert pushed.x == 0.0
        assert pushed.xdot == pytest.approx(0.6)

    @given(
        impulse=st.floats(min_value=0.0, max_value=80.0, allow_nan=False),
        factor=st.floats(min_value=0.1, max_value=10.0, allow_nan=False),
    )
    @settings(max_examples=50, deadline=None)
    def test_push_scales_with_mass(self, impulse, factor):
        """Test scaling impulse and mass together gives the same state and verdict."""
        foot = FootGeometry()
        light = LipmParams(z0=0.98, mass=60.0)
        heavy = LipmParams(z0=0.98, mass=60.0 * factor)
        a = apply_push(light, PhasePoint(0.02, 0.0), impulse)
        b = apply_push(heavy, PhasePoint(0.02, 0.0), impulse * factor)
        assert b.xdot == pytest.approx(a.xdot, rel=1e-12, abs=1e-15)
        ra = classify_recovery(light, foot, a, horizon=0.5)
        rb = classify_recovery(heavy, foot, b, horizon=0.5)
        assert rb.boundary_margin == pytest.approx(ra.boundary_margin, rel=1e-9, abs=1e-12)
        if abs(ra.boundary_margin) > 1e-9:
            assert rb.verdict is ra.verdict

    def test_push_outcome_scales_with_mass(self):
        """Test a doubled mass under a doubled push simulates the same trajectory."""
        foot = FootGeometry()
        light = phase_trajectory(LipmParams(z0=0.98, mass=50.0), foot, PhasePoint(0.0, 0.0), 10.0, t_end=1.0)
        heavy = phase_trajectory(LipmParams(z0=0.98, mass=100.0), foot, PhasePoint(0.0, 0.0), 20.0, t_end=1.0)
        assert heavy.outcome is light.outcome
        np.testing.assert_allclose(heavy.trajectory.x, light.trajectory.x, atol=1e-12)

    def test_non_finite_push(self, params):
        """Test a non-finite impulse is rejected."""
        with pytest.raises(LipmError):
            apply_push(params, PhasePoint(0.0, 0.0), float("inf"))

    def test_boundary_line(self, params, foot):
        """Test the boundary passes through (cop_max, 0) with slope -omega."""
        boundary = decision_boundary(params, foot)
        assert float(boundary.xdot_at(foot.cop_max)) == pytest.approx(0.0)
        assert boundary.slope == pytest.approx(-params.omega)
        rows = boundary.sample(np.linspace(-0.3, 0.3, 101))
        assert rows.shape == (101, 2)

    def test_margin_sign(self, params, foot):
        """Test the margin is positive inside the band and negative outside."""
        boundary = decision_boundary(params, foot)
        assert boundary.margin(PhasePoint(0.0, 0.0)) > 0
        assert boundary.margin(PhasePoint(0.0, 1.0)) < 0
        assert boundary.margin(PhasePoint(0.0, -1.0)) < 0
        on_line = PhasePoint(0.0, params.omega * foot.cop_max)
        assert boundary.margin(on_line) == pytest.approx(0.0, abs=1e-12)


class TestClassify:
    """Tests for recover/fall classification."""

    def test_quiet_stance_recoverable(self, params, foot):
        """Test standing still over the foot is recoverable."""
        report = classify_recovery(params, foot, PhasePoint(0.0, 0.0))
        assert report.verdict is Verdict.RECOVERABLE
        assert report.recoverable
        assert report.boundary_margin >= 0

    def test_fast_forward_falls(self, params, foot):
        """Test x_dot = 1 m/s from the ankle falls with z0 = 0.98."""
        report = classify_recovery(params, foot, PhasePoint(0.0, 1.0))
        assert report.verdict is Verdict.FALL
        assert report.capture_point == pytest.approx(1.0 / math.sqrt(10.0))
        assert len(report.trajectory) == 1

    def test_recoverable_trajectory_settles(self, params, foot):
        """Test holding the CoP at the capture point brings the CoM to rest over it."""
        report = classify_recovery(params, foot, PhasePoint(0.0, 0.3), horizon=3.0)
        assert report.trajectory.x[-1] == pytest.approx(report.capture_point, abs=1e-3)
        assert abs(report.trajectory.xdot[-1]) < 1e-2

    def test_verdict_matches_margin(self, params, foot):
        """Test the verdict is recoverable exactly when the margin is non-negative."""
        rng = np.random.default_rng(8)
        for x, xdot in rng.uniform([-0.3, -1.5], [0.3, 1.5], size=(200, 2)):
            report = classify_recovery(params, foot, PhasePoint(x, xdot), dt=1e-2, horizon=0.1)
            assert report.recoverable == (report.boundary_margin >= 0)
            cp = x + xdot / params.omega
            assert report.recoverable == (foot.cop_min <= cp <= foot.cop_max)

    def test_boundary_agrees_with_bang_bang_oracle(self, params, foot):
        """Test the analytic boundary matches brute-force bang-bang control off the boundary."""
        X, XD, recoverable = sweep_phase_grid(params, foot, (-0.3, 0.3), (-1.5, 1.5), 41)
        oracle = bang_bang_oracle(params, foot, X, XD, dt=1e-3, t_max=5.0)

        dx = 0.6 / 40
        dxd = 3.0 / 40
        band = dx + dxd / params.omega
        cp = X + XD / params.omega
        clear = (np.abs(cp - foot.cop_max) > band) & (np.abs(cp - foot.cop_min) > band)
        assert clear.sum() > 1000
        np.testing.assert_array_equal(oracle[clear], recoverable[clear])


class TestControllers:
    """Tests for simulated pushes under CoP controllers."""

    def test_no_push(self, params, foot):
        """Test a zero push is recovered without escape."""
        report = phase_trajectory(params, foot, PhasePoint(0.0, 0.0), 0.0)
        assert report.verdict is Verdict.RECOVERABLE
        assert report.outcome is Verdict.RECOVERABLE
        assert report.escape_time is None
        assert report.controller is Controller.CAPTURE_COP

    def test_large_push_escapes(self, params, foot):
        """Test a push beyond the boundary falls under every controller."""
        for controller in Controller:
            report = phase_trajectory(params, foot, PhasePoint(0.0, 0.0), 60.0, controller)
            assert report.verdict is Verdict.FALL
            assert report.outcome is Verdict.FALL
            assert 0 < report.escape_time < 3.0

    def test_controllers_differ_inside_boundary(self, params, foot):
        """Test a recoverable push is lost by a CoP held at the ankle."""
        push = 0.3 * params.mass  # x_dot = 0.3, capture point ~0.095
        capture = phase_trajectory(params, foot, PhasePoint(0.0, 0.0), push, Controller.CAPTURE_COP)
        bang = phase_trajectory(params, foot, PhasePoint(0.0, 0.0), push, Controller.BANG_BANG)
        fixed = phase_trajectory(params, foot, PhasePoint(0.0, 0.0), push, Controller.FIXED_COP)
        assert capture.verdict is Verdict.RECOVERABLE
        assert capture.outcome is Verdict.RECOVERABLE
        assert bang.outcome is Verdict.RECOVERABLE
        assert fixed.outcome is Verdict.FALL

    def test_controller_by_name(self, params, foot):
        """Test controllers can be given by their string value."""
        report = phase_trajectory(params, foot, PhasePoint(0.0, 0.0), 0.0, "bang_bang")
        assert report.controller is Controller.BANG_BANG

    def test_cop_within_foot(self, params, foot):
        """Test the simulated CoP never leaves the foot."""
        report = phase_trajectory(params, foot, PhasePoint(0.0, 0.0), 12.0, Controller.BANG_BANG)
        assert np.all(report.trajectory.p >= foot.cop_min)
        assert np.all(report.trajectory.p <= foot.cop_max)
