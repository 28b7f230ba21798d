"""Virtual multitouch screen: noisy observation of ground truth as TUIO.

The tracker watches the simulated world at its own rate, perturbs robot and
obstacle poses with millimeter-scale Gaussian noise, estimates velocities
and accelerations from short least-squares fits over the observation
history (the real screen reports derived quantities, it does not leak
ground truth), and emits one TUIO frame per tick: robots as tagged objects
(marker id = robot id), obstacles as blobs, operator touches as cursors.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .tuio import TuioBlob, TuioCursor, TuioFrame, TuioObject, wrap_angle_tuio
from .world import FieldConfig, WorldSnapshot


@dataclass(frozen=True)
class TrackerConfig:
    rate: float = 30.0                 # Hz
    pos_noise_sigma: float = 0.0015    # meters
    angle_noise_sigma: float = 0.01    # radians
    velocity_window: int = 5           # samples in the estimator window
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise ValueError("tracker rate must be positive")
        if self.pos_noise_sigma < 0 or self.angle_noise_sigma < 0:
            raise ValueError("noise sigmas must be >= 0")
        if self.velocity_window < 2:
            raise ValueError("velocity window needs >= 2 samples")


def fit_motion(ts: np.ndarray, xs: np.ndarray) -> tuple[float, float]:
    """Windowed least-squares motion estimate: (velocity, acceleration).

    Velocity is the slope of the linear fit; acceleration is twice the
    quadratic coefficient of a parabola fit (needs >= 3 samples). Both are
    zero while the history is too short.
    """
    n = len(ts)
    if n < 2:
        return 0.0, 0.0
    t0 = ts.mean()
    tc = ts - t0  # centering keeps the normal equations well conditioned
    vel = float(np.polyfit(tc, xs, 1)[0])
    acc = 0.0
    if n >= 3:
        acc = 2.0 * float(np.polyfit(tc, xs, 2)[0])
    return vel, acc


class _History:
    """Fixed-depth observation history for one tracked entity."""

    def __init__(self, depth: int):
        self.t: deque[float] = deque(maxlen=depth)
        self.x: deque[float] = deque(maxlen=depth)
        self.y: deque[float] = deque(maxlen=depth)
        self.angle: deque[float] = deque(maxlen=depth)

    def push(self, t: float, x: float, y: float, angle: float) -> None:
        # store the angle unwrapped so fits never see a 2*pi jump
        if self.angle:
            prev = self.angle[-1]
            angle = prev + math.remainder(angle - prev, math.tau)
        self.t.append(t)
        self.x.append(x)
        self.y.append(y)
        self.angle.append(angle)

    def estimates(self) -> tuple[float, float, float, float, float, float]:
        ts = np.array(self.t)
        vx, ax = fit_motion(ts, np.array(self.x))
        vy, ay = fit_motion(ts, np.array(self.y))
        vang, aang = fit_motion(ts, np.array(self.angle))
        return vx, vy, ax, ay, vang, aang


def _motion_accel(vx: float, vy: float, ax: float, ay: float) -> float:
    """TUIO scalar motion acceleration: acceleration along the velocity
    direction (signed), falling back to the magnitude when nearly still."""
    speed = math.hypot(vx, vy)
    if speed < 1e-9:
        return math.hypot(ax, ay)
    return (vx * ax + vy * ay) / speed


class Tracker:
    """Stateful observer; one instance per run, driven by the gateway."""

    def __init__(self, config: TrackerConfig, fieldcfg: FieldConfig):
        self.config = config
        self.field = fieldcfg
        self.rng = np.random.default_rng(config.seed)
        self.fseq = 0
        self._histories: dict[tuple[str, int], _History] = {}
        self._sessions: dict[tuple[str, int], int] = {}
        self._next_session = 1

    def _session_for(self, kind: str, key: int) -> int:
        sid = self._sessions.get((kind, key))
        if sid is None:
            sid = self._next_session
            self._next_session += 1
            self._sessions[(kind, key)] = sid
        return sid

    def _history_for(self, kind: str, key: int) -> _History:
        hist = self._histories.get((kind, key))
        if hist is None:
            hist = _History(self.config.velocity_window)
            self._histories[(kind, key)] = hist
        return hist

    def observe(self, world: WorldSnapshot) -> TuioFrame:
        """One tracker tick: noisy snapshot of the world as a TUIO frame."""
        cfg = self.config
        W, H = self.field.width, self.field.height
        self.fseq += 1

        objects = []
        for robot in sorted(world.robots, key=lambda r: r.id):
            x = robot.pose.x + self.rng.normal(0.0, cfg.pos_noise_sigma)
            y = robot.pose.y + self.rng.normal(0.0, cfg.pos_noise_sigma)
            angle = robot.pose.theta + self.rng.normal(0.0, cfg.angle_noise_sigma)
            hist = self._history_for("object", robot.id)
            hist.push(world.t, x, y, angle)
            vx, vy, ax, ay, vang, aang = hist.estimates()
            objects.append(
                TuioObject(
                    session_id=self._session_for("object", robot.id),
                    class_id=robot.id,
                    x=min(max(x / W, 0.0), 1.0),
                    y=min(max(y / H, 0.0), 1.0),
                    angle=wrap_angle_tuio(angle),
                    vx=vx / W,
                    vy=vy / H,
                    vang=vang,
                    motion_accel=_motion_accel(vx / W, vy / H, ax / W, ay / H),
                    rotation_accel=aang,
                )
            )

        blobs = []
        for obstacle in sorted(world.obstacles, key=lambda o: o.id):
            x = obstacle.x + self.rng.normal(0.0, cfg.pos_noise_sigma)
            y = obstacle.y + self.rng.normal(0.0, cfg.pos_noise_sigma)
            angle = obstacle.angle + self.rng.normal(0.0, cfg.angle_noise_sigma)
            hist = self._history_for("blob", obstacle.id)
            hist.push(world.t, x, y, angle)
            vx, vy, ax, ay, vang, aang = hist.estimates()
            blobs.append(
                TuioBlob(
                    session_id=self._session_for("blob", obstacle.id),
                    x=min(max(x / W, 0.0), 1.0),
                    y=min(max(y / H, 0.0), 1.0),
                    angle=wrap_angle_tuio(angle),
                    width=min(max(obstacle.width / W, 1e-6), 1.0),
                    height=min(max(obstacle.height / H, 1e-6), 1.0),
                    area=min(max(obstacle.area / (W * H), 1e-9), 1.0),
                    vx=vx / W,
                    vy=vy / H,
                    vang=vang,
                    motion_accel=_motion_accel(vx / W, vy / H, ax / W, ay / H),
                    rotation_accel=aang,
                )
            )

        cursors = []
        for touch in sorted(world.touches, key=lambda c: c.id):
            hist = self._history_for("cursor", touch.id)
            hist.push(world.t, touch.x, touch.y, 0.0)
            vx, vy, ax, ay, _, _ = hist.estimates()
            cursors.append(
                TuioCursor(
                    session_id=self._session_for("cursor", touch.id),
                    x=min(max(touch.x / W, 0.0), 1.0),
                    y=min(max(touch.y / H, 0.0), 1.0),
                    vx=vx / W,
                    vy=vy / H,
                    motion_accel=_motion_accel(vx / W, vy / H, ax / W, ay / H),
                )
            )

        # entities that left the field lose their session and history
        live = {("object", r.id) for r in world.robots}
        live |= {("blob", o.id) for o in world.obstacles}
        live |= {("cursor", c.id) for c in world.touches}
        for key in list(self._sessions):
            if key not in live:
                del self._sessions[key]
                self._histories.pop(key, None)

        return TuioFrame(
            fseq=self.fseq,
            cursors=tuple(cursors),
            objects=tuple(objects),
            blobs=tuple(blobs),
        )
