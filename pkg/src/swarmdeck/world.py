"""Field geometry, shared pose/twist types, and the selection-region grid.

Coordinate convention used everywhere in swarmdeck: origin at the top-left
corner of the display field, x to the right, y downward, in meters. This is
the same orientation as TUIO's normalized screen coordinates, so the tracker
never has to flip an axis. Headings are radians in (-pi, pi], measured from
+x toward +y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class OutOfFieldError(ValueError):
    """A point fell outside the field (or grid) rectangle."""


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi], preserving congruence mod 2*pi."""
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    wrapped = math.remainder(theta, math.tau)
    if wrapped <= -math.pi:
        wrapped += math.tau
    return wrapped


@dataclass(frozen=True)
class Pose:
    """Planar pose: position in meters, heading in (-pi, pi]."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("pose position must be finite")
        object.__setattr__(self, "theta", normalize_angle(self.theta))


@dataclass(frozen=True)
class Twist:
    """Planar velocity command (vx, vy in m/s, omega in rad/s).

    Whether vx/vy are world- or body-frame depends on the consumer; robot
    command topics carry body-frame twists, behaviors compute world-frame
    ones and rotate before publishing.
    """

    vx: float = 0.0
    vy: float = 0.0
    omega: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(c) for c in (self.vx, self.vy, self.omega)):
            raise ValueError("twist components must be finite")

    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


ZERO_TWIST = Twist(0.0, 0.0, 0.0)


def rotate_twist(t: Twist, angle: float) -> Twist:
    """Rotate the linear part of a twist by `angle` (omega unchanged)."""
    c, s = math.cos(angle), math.sin(angle)
    return Twist(c * t.vx - s * t.vy, s * t.vx + c * t.vy, t.omega)


def body_to_world(t: Twist, heading: float) -> Twist:
    return rotate_twist(t, heading)


def world_to_body(t: Twist, heading: float) -> Twist:
    return rotate_twist(t, -heading)


# Default field: 2 x 2 tiled 55" 16:9 panels of 1.21 m x 0.68 m each.
DEFAULT_CELL_W = 1.21
DEFAULT_CELL_H = 0.68


@dataclass(frozen=True)
class FieldConfig:
    """Physical extent of the display field and its safety margin."""

    width: float = 2 * DEFAULT_CELL_W
    height: float = 2 * DEFAULT_CELL_H
    cell_rows: int = 2
    cell_cols: int = 2
    boundary_margin: float = 0.06

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("field dimensions must be positive")
        if self.boundary_margin < 0:
            raise ValueError("boundary margin must be >= 0")
        if 2 * self.boundary_margin >= min(self.width, self.height):
            raise ValueError("boundary margin leaves no interior")

    def contains(self, x: float, y: float, margin: float = 0.0) -> bool:
        return margin <= x <= self.width - margin and margin <= y <= self.height - margin

    def clamp_inside(self, x: float, y: float, margin: float | None = None) -> tuple[float, float]:
        m = self.boundary_margin if margin is None else margin
        return (min(max(x, m), self.width - m), min(max(y, m), self.height - m))


def to_normalized(x: float, y: float, cfg: FieldConfig) -> tuple[float, float]:
    """Map field meters to TUIO-style normalized [0,1]^2 coordinates."""
    if not cfg.contains(x, y):
        raise OutOfFieldError(f"point ({x}, {y}) outside {cfg.width} x {cfg.height} field")
    return (x / cfg.width, y / cfg.height)


def from_normalized(u: float, v: float, cfg: FieldConfig) -> tuple[float, float]:
    """Inverse of :func:`to_normalized`."""
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise OutOfFieldError(f"normalized point ({u}, {v}) outside [0,1]^2")
    return (u * cfg.width, v * cfg.height)


@dataclass(frozen=True)
class RegionGrid:
    """Row-major 1-based tiling of a field rectangle into selection regions.

    The stimulus grid is fixed at 8 columns x 5 rows = 40 regions by default;
    region 1 is the top-left cell, numbering runs along each row.
    """

    rows: int = 5
    cols: int = 8
    width: float = 2 * DEFAULT_CELL_W
    height: float = 2 * DEFAULT_CELL_H

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must have at least one row and column")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("grid extent must be positive")

    @classmethod
    def for_field(cls, cfg: FieldConfig, rows: int = 5, cols: int = 8) -> "RegionGrid":
        return cls(rows=rows, cols=cols, width=cfg.width, height=cfg.height)

    @property
    def count(self) -> int:
        return self.rows * self.cols

    def region_of(self, x: float, y: float) -> int:
        """1-based row-major region index of a point inside the extent."""
        if not (0.0 <= x <= self.width and 0.0 <= y <= self.height):
            raise OutOfFieldError(f"point ({x}, {y}) outside grid extent")
        col = min(int(x / self.width * self.cols), self.cols - 1)
        row = min(int(y / self.height * self.rows), self.rows - 1)
        return row * self.cols + col + 1

    def region_center(self, region: int) -> tuple[float, float]:
        if not 1 <= region <= self.count:
            raise ValueError(f"region {region} outside 1..{self.count}")
        row, col = divmod(region - 1, self.cols)
        return ((col + 0.5) * self.width / self.cols, (row + 0.5) * self.height / self.rows)


def region_of(x: float, y: float, grid: RegionGrid) -> int:
    return grid.region_of(x, y)


def region_center(region: int, grid: RegionGrid) -> tuple[float, float]:
    return grid.region_center(region)


@dataclass(frozen=True)
class RobotState:
    """Kinematic state of one simulated robot.

    `twist_body` is the realized body-frame twist of the last step and
    `wheel_speeds` the wheel rates that produce it under the kinematic map.
    """

    id: int
    pose: Pose
    twist_body: Twist = ZERO_TWIST
    wheel_speeds: tuple[float, float, float] = (0.0, 0.0, 0.0)
    radius: float = 0.055

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError("robot id must be >= 0")
        if self.radius <= 0:
            raise ValueError("robot radius must be positive")


@dataclass(frozen=True)
class Obstacle:
    """Static object sitting on the field, tracked as a TUIO blob."""

    id: int
    x: float
    y: float
    angle: float = 0.0
    width: float = 0.10
    height: float = 0.10

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Touch:
    """One operator touch point forwarded from the console."""

    id: int
    x: float
    y: float


@dataclass(frozen=True)
class WorldSnapshot:
    """Immutable per-tick view of ground truth handed to the tracker."""

    t: float
    robots: tuple[RobotState, ...] = ()
    obstacles: tuple[Obstacle, ...] = ()
    touches: tuple[Touch, ...] = ()

    @classmethod
    def of(cls, t: float, robots=(), obstacles=(), touches=()) -> "WorldSnapshot":
        return cls(t, tuple(robots), tuple(obstacles), tuple(touches))
