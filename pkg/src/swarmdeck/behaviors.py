"""Swarm controllers: target surround, common-velocity driving, formation
following, plus the shared point controller and pairwise collision repulsion.

All controllers produce world-frame twists with omega = 0: the omni drive
decouples heading from translation and none of the scenarios command
orientation. The gateway rotates twists into each robot's body frame before
publishing them.

Safety model: commands are boundary-limited (a velocity component that would
push a robot across the field margin within one tick is zeroed), then pairs
closer than twice the minimum separation have any excess closing speed
cancelled symmetrically, then the boundary limit is re-applied so the
avoidance nudge can never shove a robot out of the field. The permitted
closing speed shrinks linearly to zero at the separation floor, so the
pairwise distance decays toward the floor but cannot cross it, while robots
resting at nearby goals receive no force at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .gaze import FittedPath
from .world import FieldConfig, RobotState, Twist, ZERO_TWIST

DEFAULT_FORMATION = ((0.0, 0.0), (-0.26, 0.15), (-0.26, -0.15))


class BehaviorError(ValueError):
    pass


@dataclass(frozen=True)
class BehaviorConfig:
    kp: float = 1.5                      # 1/s position gain
    cruise_speed: float = 0.15           # m/s
    surround_radius: float = 0.18        # meters
    min_separation: float = 0.165        # meters (3 x default robot radius)
    arrival_tolerance: float = 0.01      # meters
    formation: tuple[tuple[float, float], ...] = DEFAULT_FORMATION
    approach_horizon: float = 0.5        # seconds to close the gap to min separation
    progress_error_scale: float = 0.1    # meters of follower error that stalls the path
    progress_floor: float = 0.2          # never slow the path below this fraction

    def __post_init__(self) -> None:
        for name in ("kp", "cruise_speed", "surround_radius", "min_separation",
                     "arrival_tolerance", "approach_horizon", "progress_error_scale",
                     "progress_floor"):
            if getattr(self, name) <= 0:
                raise BehaviorError(f"{name} must be positive")


def goto_controller(state: RobotState, goal: tuple[float, float], cfg: BehaviorConfig) -> Twist:
    """Proportional point controller, speed-clamped, heading left alone."""
    ex = goal[0] - state.pose.x
    ey = goal[1] - state.pose.y
    dist = math.hypot(ex, ey)
    if dist <= cfg.arrival_tolerance:
        return ZERO_TWIST
    vx, vy = cfg.kp * ex, cfg.kp * ey
    speed = math.hypot(vx, vy)
    if speed > cfg.cruise_speed:
        scale = cfg.cruise_speed / speed
        vx, vy = vx * scale, vy * scale
    return Twist(vx, vy, 0.0)


@dataclass(frozen=True)
class SurroundPlan:
    """Leader-first surround: who leads, where everyone goes, and the radius
    actually used (auto-scaled so adjacent slots keep the separation floor)."""

    leader_id: int
    goals: dict  # robot id -> (x, y)
    radius: float
    target: tuple[float, float]


def surround_radius_for(n_slots: int, cfg: BehaviorConfig) -> float:
    if n_slots < 2:
        return cfg.surround_radius
    needed = cfg.min_separation / (2 * math.sin(math.pi / n_slots))
    return max(cfg.surround_radius, needed)


def _circular_diff(a: float, b: float) -> float:
    return abs(math.remainder(a - b, math.tau))


def surround_allocation(
    states: list[RobotState], target: tuple[float, float], cfg: BehaviorConfig
) -> SurroundPlan:
    """Nearest robot takes the target center; the rest take evenly spaced
    slots on the surround circle.

    Followers sorted by bearing from the target are matched in cyclic order
    against the sorted slot angles, using the rotation that minimizes total
    angular mismatch; that keeps every robot on its own side of the circle
    instead of routing it across the occupied center.
    """
    if not states:
        raise BehaviorError("surround needs at least one robot")
    leader = min(states, key=lambda s: (math.hypot(s.pose.x - target[0], s.pose.y - target[1]), s.id))
    goals = {leader.id: (target[0], target[1])}
    followers = [s for s in states if s.id != leader.id]
    radius = surround_radius_for(len(followers), cfg)
    if followers:
        n = len(followers)
        slot_angles = [2 * math.pi * j / n for j in range(n)]
        by_bearing = sorted(
            followers,
            key=lambda s: (math.atan2(s.pose.y - target[1], s.pose.x - target[0]), s.id),
        )
        bearings = [
            math.atan2(s.pose.y - target[1], s.pose.x - target[0]) for s in by_bearing
        ]
        best_rotation = min(
            range(n),
            key=lambda r: (
                sum(_circular_diff(bearings[i], slot_angles[(i + r) % n]) for i in range(n)),
                r,
            ),
        )
        for i, state in enumerate(by_bearing):
            angle = slot_angles[(i + best_rotation) % n]
            goals[state.id] = (
                target[0] + radius * math.cos(angle),
                target[1] + radius * math.sin(angle),
            )
    return SurroundPlan(leader_id=leader.id, goals=goals, radius=radius, target=target)


def limit_to_field(
    state: RobotState, twist: Twist, fieldcfg: FieldConfig, dt: float
) -> Twist:
    """Zero any velocity component that would cross the boundary margin
    within one tick."""
    m = fieldcfg.boundary_margin
    vx, vy = twist.vx, twist.vy
    nx = state.pose.x + vx * dt
    if nx < m or nx > fieldcfg.width - m:
        vx = 0.0
    ny = state.pose.y + vy * dt
    if ny < m or ny > fieldcfg.height - m:
        vy = 0.0
    if vx == twist.vx and vy == twist.vy:
        return twist
    return Twist(vx, vy, twist.omega)


def avoid_collisions(
    twists: dict, states: list[RobotState], cfg: BehaviorConfig
) -> dict:
    """Damp pairwise approaches that would breach the separation floor.

    For a pair inside the activation distance D = 2 * min_separation, the
    permitted closing speed is (d - min_separation) / approach_horizon:
    fast far out, zero at the floor, negative (a push-apart) below it. Any
    excess closing speed is cancelled symmetrically, each robot's share
    capped at cruise speed, along the separating direction. Pairs holding
    distance or separating are untouched, so goal layouts inside the band
    (surround slots, formation offsets) are genuine equilibria, while a
    head-on approach at the floor is cancelled outright. Adjusted outputs
    are re-clamped to cruise speed.
    """
    out = dict(twists)
    D = 2 * cfg.min_separation
    by_id = {s.id: s for s in states}
    ids = sorted(out)
    adjust = {i: [0.0, 0.0] for i in ids}
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            sa, sb = by_id[ids[a]], by_id[ids[b]]
            dx = sa.pose.x - sb.pose.x
            dy = sa.pose.y - sb.pose.y
            d = math.hypot(dx, dy)
            if d >= D:
                continue
            if d < 1e-9:
                # coincident robots: separate along x by id order
                dx, dy, d = 1.0, 0.0, 1.0
            ux, uy = dx / d, dy / d
            ta, tb = twists[ids[a]], twists[ids[b]]
            closing = -((ta.vx - tb.vx) * ux + (ta.vy - tb.vy) * uy)
            permitted = (d - cfg.min_separation) / cfg.approach_horizon
            excess = closing - permitted
            if excess <= 0:
                continue
            share = min(excess / 2.0, cfg.cruise_speed)
            adjust[ids[a]][0] += share * ux
            adjust[ids[a]][1] += share * uy
            adjust[ids[b]][0] -= share * ux
            adjust[ids[b]][1] -= share * uy
    for rid in ids:
        ax, ay = adjust[rid]
        if ax == 0.0 and ay == 0.0:
            continue
        t = out[rid]
        vx, vy = t.vx + ax, t.vy + ay
        speed = math.hypot(vx, vy)
        if speed > cfg.cruise_speed:
            scale = cfg.cruise_speed / speed
            vx, vy = vx * scale, vy * scale
        out[rid] = Twist(vx, vy, t.omega)
    return out


def enforce_safety(
    twists: dict,
    states: list[RobotState],
    fieldcfg: FieldConfig,
    cfg: BehaviorConfig,
    dt: float,
    iterations: int = 4,
) -> dict:
    """Compose the boundary limit and the approach damper to a fixpoint.

    One damper pass splits a cancellation between both robots of a pair; if
    one of them is pinned against the field margin its half evaporates in
    the boundary pass, so a single pass only damps half the excess.
    Iterating shifts the burden onto the unblocked robot (the gap above the
    permitted closing speed halves per round). When nothing is blocked the
    extra rounds are no-ops.
    """
    for _ in range(iterations):
        twists = {s.id: limit_to_field(s, twists[s.id], fieldcfg, dt) for s in states}
        twists = avoid_collisions(twists, states, cfg)
    return {s.id: limit_to_field(s, twists[s.id], fieldcfg, dt) for s in states}


def common_velocity(
    gesture_twist: Twist,
    states: list[RobotState],
    fieldcfg: FieldConfig,
    cfg: BehaviorConfig,
    dt: float,
) -> dict:
    """Every robot gets the commanded twist, boundary-limited per robot,
    then collision-adjusted, with the boundary re-enforced afterwards."""
    twists = {s.id: gesture_twist for s in states}
    return enforce_safety(twists, states, fieldcfg, cfg, dt)


@dataclass
class FormationProgress:
    s: float = 0.0
    done: bool = False


def formation_goals(
    path: FittedPath, s: float, formation, fieldcfg: FieldConfig
) -> list[tuple[float, float]]:
    """Slot positions at path progress s: leader on the path, followers at
    their offsets rotated into the tangent frame, all clamped into the field."""
    point, tangent, _ = path.sample(s)
    c, sn = tangent[0], tangent[1]
    goals = []
    for ox, oy in formation:
        gx = point[0] + c * ox - sn * oy
        gy = point[1] + sn * ox + c * oy
        goals.append(fieldcfg.clamp_inside(gx, gy))
    return goals


def formation_follow(
    path: FittedPath,
    states: list[RobotState],
    progress: FormationProgress,
    dt: float,
    fieldcfg: FieldConfig,
    cfg: BehaviorConfig,
) -> tuple[dict, FormationProgress]:
    """One tick of formation path following.

    Robots take formation slots in ascending id order (slot 0, the path
    rider, goes to the lowest id). Path progress advances at cruise speed
    scaled down by the worst slot error so the path cannot outrun the
    formation; the mode completes once the end of the path is reached and
    every robot sits within the arrival tolerance.
    """
    if len(states) != len(cfg.formation):
        raise BehaviorError(
            f"formation has {len(cfg.formation)} slots but {len(states)} robots"
        )
    ordered = sorted(states, key=lambda s: s.id)
    goals = formation_goals(path, progress.s, cfg.formation, fieldcfg)
    worst = max(
        math.hypot(s.pose.x - g[0], s.pose.y - g[1]) for s, g in zip(ordered, goals)
    )

    if progress.s >= path.length and worst <= cfg.arrival_tolerance:
        return {s.id: ZERO_TWIST for s in states}, FormationProgress(path.length, True)

    speed_scale = max(cfg.progress_floor, 1.0 - worst / cfg.progress_error_scale)
    new_s = min(progress.s + cfg.cruise_speed * speed_scale * dt, path.length)

    twists = {s.id: goto_controller(s, g, cfg) for s, g in zip(ordered, goals)}
    twists = enforce_safety(twists, states, fieldcfg, cfg, dt)
    return twists, FormationProgress(new_s, False)


# Gesture commands in the screen frame (y grows downward).
GESTURE_SPEED = 0.15

GESTURE_TWISTS = {
    "stop": Twist(0.0, 0.0, 0.0),
    "up": Twist(0.0, -GESTURE_SPEED, 0.0),
    "down": Twist(0.0, GESTURE_SPEED, 0.0),
    "left": Twist(-GESTURE_SPEED, 0.0, 0.0),
    "right": Twist(GESTURE_SPEED, 0.0, 0.0),
}
