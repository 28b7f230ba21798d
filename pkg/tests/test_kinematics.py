import math

import numpy as np
import pytest

from swarmdeck.kinematics import (
    KinematicParams,
    KinematicsConfigError,
    WheelSpeeds,
    clamp_twist,
    forward_kinematics,
    inverse_kinematics,
    step,
)
from swarmdeck.world import Pose, RobotState, Twist

P = KinematicParams()


def test_pure_rotation_drives_all_wheels_equally():
    u = inverse_kinematics(Twist(0, 0, 1.0), P)
    expected = P.chassis_radius / P.wheel_radius
    assert u.u1 == pytest.approx(expected)
    assert u.u2 == pytest.approx(expected)
    assert u.u3 == pytest.approx(expected)


def test_pure_x_translation_matches_minus_sin():
    u = inverse_kinematics(Twist(1.0, 0, 0), P)
    r = P.wheel_radius
    assert u.u1 == pytest.approx(-1.0 / r)
    assert u.u2 == pytest.approx(0.5 / r)
    assert u.u3 == pytest.approx(0.5 / r)


def test_zero_twist_zero_wheels():
    u = inverse_kinematics(Twist(0, 0, 0), P)
    assert u.as_tuple() == (0.0, 0.0, 0.0)


def test_forward_of_equal_wheels_is_pure_rotation():
    w = P.chassis_radius / P.wheel_radius
    t = forward_kinematics(WheelSpeeds(w, w, w), P)
    assert t.vx == pytest.approx(0.0, abs=1e-12)
    assert t.vy == pytest.approx(0.0, abs=1e-12)
    assert t.omega == pytest.approx(1.0)


def test_forward_inverse_identity_random():
    rng = np.random.default_rng(11)
    for _ in range(500):
        t = Twist(*rng.uniform(-0.5, 0.5, size=2), float(rng.uniform(-3, 3)))
        back = forward_kinematics(inverse_kinematics(t, P), P)
        assert abs(back.vx - t.vx) <= 1e-12
        assert abs(back.vy - t.vy) <= 1e-12
        assert abs(back.omega - t.omega) <= 1e-12
        u = np.array(rng.uniform(-20, 20, size=3))
        u2 = inverse_kinematics(forward_kinematics(WheelSpeeds(*u), P), P)
        assert np.allclose(u2.as_tuple(), u, atol=1e-12)


def test_degenerate_wheel_layout_rejected():
    # coincident wheels are the only way to degrade J for this drive
    with pytest.raises(KinematicsConfigError):
        KinematicParams(wheel_angles=(0.0, 0.0, math.pi))
    with pytest.raises(KinematicsConfigError):
        KinematicParams(wheel_angles=(0.1, 0.1 + 2 * math.pi, 2.0))


def test_radial_clamp_preserves_direction():
    cmd = Twist(0.8, 0.6, 0.0)  # speed 1.0
    out = clamp_twist(cmd, P)
    assert out.speed() == pytest.approx(P.max_body_speed)
    assert out.vx / out.vy == pytest.approx(cmd.vx / cmd.vy)
    assert out.vx > 0 and out.vy > 0


def test_clamp_planar_direction_is_nonnegative_multiple():
    rng = np.random.default_rng(5)
    for _ in range(200):
        cmd = Twist(*rng.uniform(-2, 2, size=2), float(rng.uniform(-8, 8)))
        out = clamp_twist(cmd, P)
        cross = cmd.vx * out.vy - cmd.vy * out.vx
        dot = cmd.vx * out.vx + cmd.vy * out.vy
        assert abs(cross) <= 1e-9 * max(1.0, cmd.speed())
        assert dot >= -1e-12
        assert out.speed() <= P.max_body_speed + 1e-12
        assert abs(out.omega) <= P.max_body_omega + 1e-12
        assert out.omega * cmd.omega >= 0
        assert inverse_kinematics(out, P).max_abs() <= P.max_wheel_speed + 1e-9


def _robot(x=0.0, y=0.0, theta=0.0):
    return RobotState(id=0, pose=Pose(x, y, theta))


def test_step_euler_advance():
    s = step(_robot(), Twist(0.1, 0, 0), 0.02, P)
    assert s.pose.x == pytest.approx(0.002)
    assert s.pose.y == pytest.approx(0.0)


def test_step_rotated_frame():
    s = step(_robot(theta=math.pi / 2), Twist(0.1, 0, 0), 0.02, P)
    assert s.pose.x == pytest.approx(0.0, abs=1e-12)
    assert s.pose.y == pytest.approx(0.002)


def test_step_clamps_command():
    s = step(_robot(), Twist(1.0, 0, 0), 0.02, P)
    assert s.pose.x == pytest.approx(P.max_body_speed * 0.02)
    assert s.twist_body.vx == pytest.approx(P.max_body_speed)


def test_step_rejects_bad_input():
    with pytest.raises(ValueError):
        step(_robot(), Twist(0.1, 0, 0), 0.0, P)
    with pytest.raises(ValueError):
        Twist(float("nan"), 0, 0)


def test_constant_rotation_closes_loop():
    omega = 2.0
    dt = 0.02
    n = int(round((math.tau / omega) / dt))
    s = _robot()
    for _ in range(n):
        s = step(s, Twist(0, 0, omega), dt, P)
    # O(dt) closure tolerance on heading after one full turn
    assert abs(s.pose.theta) <= omega * dt + 1e-9
    assert s.pose.x == pytest.approx(0.0, abs=1e-12)


def test_wheel_speeds_consistent_with_twist_after_step():
    s = step(_robot(), Twist(0.2, -0.1, 1.5), 0.02, P)
    t = forward_kinematics(WheelSpeeds(*s.wheel_speeds), P)
    assert t.vx == pytest.approx(s.twist_body.vx, abs=1e-12)
    assert t.vy == pytest.approx(s.twist_body.vy, abs=1e-12)
    assert t.omega == pytest.approx(s.twist_body.omega, abs=1e-12)
