"""Three-omniwheel kinematics: wheel maps, command limiting, Euler stepping.

Wheel i sits at angle theta_i on a chassis of radius R and contributes
roll speed u_i = (1/r) * (-sin(theta_i) * vx + cos(theta_i) * vy + R * omega),
i.e. u = (1/r) J [vx, vy, omega] with J rows [-sin t, cos t, R]. The default
geometry spaces the wheels 120 degrees apart (90/210/330), which keeps J
well conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .world import Pose, RobotState, Twist, normalize_angle

DEFAULT_WHEEL_ANGLES = (math.pi / 2, 7 * math.pi / 6, 11 * math.pi / 6)


class KinematicsConfigError(ValueError):
    """Degenerate wheel layout: the kinematic matrix is not invertible."""


@dataclass(frozen=True)
class KinematicParams:
    wheel_angles: tuple[float, float, float] = DEFAULT_WHEEL_ANGLES
    chassis_radius: float = 0.055   # wheel contact circle, meters
    wheel_radius: float = 0.024     # meters
    max_wheel_speed: float = 25.0   # rad/s
    max_body_speed: float = 0.3     # m/s
    max_body_omega: float = 3.0     # rad/s

    def __post_init__(self) -> None:
        if self.chassis_radius <= 0 or self.wheel_radius <= 0:
            raise KinematicsConfigError("radii must be positive")
        if min(self.max_wheel_speed, self.max_body_speed, self.max_body_omega) <= 0:
            raise KinematicsConfigError("speed limits must be positive")
        angles = [normalize_angle(a) for a in self.wheel_angles]
        for i in range(3):
            for j in range(i + 1, 3):
                if abs(normalize_angle(angles[i] - angles[j])) < 1e-9:
                    raise KinematicsConfigError("wheel angles must be distinct mod 2*pi")
        if abs(np.linalg.det(self.coupling_matrix())) < 1e-9:
            raise KinematicsConfigError("kinematic matrix is singular")

    def coupling_matrix(self) -> np.ndarray:
        """J such that wheel speeds u = (1/r) J [vx, vy, omega]."""
        return np.array(
            [[-math.sin(a), math.cos(a), self.chassis_radius] for a in self.wheel_angles]
        )


@dataclass(frozen=True)
class WheelSpeeds:
    u1: float
    u2: float
    u3: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.u1, self.u2, self.u3)

    def max_abs(self) -> float:
        return max(abs(self.u1), abs(self.u2), abs(self.u3))


def inverse_kinematics(twist_body: Twist, p: KinematicParams) -> WheelSpeeds:
    """Wheel speeds that realize a body-frame twist under pure rolling."""
    v = np.array([twist_body.vx, twist_body.vy, twist_body.omega])
    u = p.coupling_matrix() @ v / p.wheel_radius
    return WheelSpeeds(float(u[0]), float(u[1]), float(u[2]))


def forward_kinematics(u: WheelSpeeds, p: KinematicParams) -> Twist:
    """Body twist produced by the given wheel speeds (inverse of the above)."""
    v = np.linalg.solve(p.coupling_matrix(), np.array(u.as_tuple())) * p.wheel_radius
    return Twist(float(v[0]), float(v[1]), float(v[2]))


def clamp_twist(cmd: Twist, p: KinematicParams) -> Twist:
    """Limit a command: radial body-speed clamp, omega clamp, then a
    proportional scale-down if any wheel would exceed its speed limit.

    The planar direction of the command is always preserved; the final
    stage scales the whole twist so wheel limits cannot skew it either.
    """
    vx, vy, omega = cmd.vx, cmd.vy, cmd.omega
    speed = math.hypot(vx, vy)
    if speed > p.max_body_speed:
        scale = p.max_body_speed / speed
        vx, vy = vx * scale, vy * scale
    if abs(omega) > p.max_body_omega:
        omega = math.copysign(p.max_body_omega, omega)
    limited = Twist(vx, vy, omega)
    peak = inverse_kinematics(limited, p).max_abs()
    if peak > p.max_wheel_speed:
        s = p.max_wheel_speed / peak
        limited = Twist(vx * s, vy * s, omega * s)
    return limited


def step(state: RobotState, cmd: Twist, dt: float, p: KinematicParams) -> RobotState:
    """Advance one robot by dt seconds under a body-frame velocity command.

    The command is clamped, rotated by the current heading into the world
    frame, and integrated with an explicit Euler step; heading is
    re-normalized to (-pi, pi].
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not all(math.isfinite(c) for c in (cmd.vx, cmd.vy, cmd.omega)):
        raise ValueError("command twist must be finite")
    twist = clamp_twist(cmd, p)
    heading = state.pose.theta
    c, s = math.cos(heading), math.sin(heading)
    world_vx = c * twist.vx - s * twist.vy
    world_vy = s * twist.vx + c * twist.vy
    pose = Pose(
        state.pose.x + world_vx * dt,
        state.pose.y + world_vy * dt,
        normalize_angle(heading + twist.omega * dt),
    )
    wheels = inverse_kinematics(twist, p)
    return RobotState(
        id=state.id,
        pose=pose,
        twist_body=twist,
        wheel_speeds=wheels.as_tuple(),
        radius=state.radius,
    )
