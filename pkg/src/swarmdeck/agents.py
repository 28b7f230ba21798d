"""Run-time components wired over broker topics.

Each component owns one broker client whose deliveries it buffers; the
simulation loop drains those buffers at fixed points in the tick, so a
headless run is a deterministic single-threaded schedule no matter how the
messages fan out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import messages
from .behaviors import (
    GESTURE_TWISTS,
    FormationProgress,
    SurroundPlan,
    common_velocity,
    enforce_safety,
    formation_follow,
    goto_controller,
    surround_allocation,
)
from .broker import Broker, Envelope
from .emg import Debouncer, MlpGestureClassifier, extract_features, make_dataset, synthesize_emg
from .gaze import (
    DwellDetector,
    FittedPath,
    GazeSample,
    TrajectoryTooShort,
    capture_trajectory,
    fit_trajectory,
    path_from_knots,
)
from .kinematics import step
from .scenario import ScenarioConfig
from .seeds import derive_rng, derive_seed
from .ssvep import classify_ssvep, stimulus_table, synthesize_eeg
from .tracker import Tracker, TrackerConfig
from .tuio import encode_frame
from .world import Pose, RobotState, Touch, Twist, WorldSnapshot


class Component:
    """Base: a named broker client buffering matching messages."""

    def __init__(self, hub: Broker, name: str, subscriptions: tuple[str, ...]):
        self.client = hub.client(name)
        self.pending: list[Envelope] = []
        # late-bound so drain() can swap the list out
        self.client.on_message = lambda env: self.pending.append(env)
        for pattern in subscriptions:
            self.client.subscribe(pattern)

    def drain(self) -> list[Envelope]:
        msgs, self.pending = self.pending, []
        return msgs


class SsvepAgent(Component):
    """Turns scripted/console stimulation epochs into decoded selections.

    The decision publishes at epoch start + window length: the simulated
    subject has to watch the flicker for the full window before the
    correlations exist.
    """

    def __init__(self, hub: Broker, config: ScenarioConfig):
        super().__init__(hub, "ssvep", ("ui/ssvep/epoch",))
        self.params = config.ssvep
        self.seed = config.seed
        self.table = stimulus_table()
        self.epoch = 0
        self._queue: list[tuple[float, int, int, float]] = []  # (due_t, epoch, region, snr)

    def process(self, t: float) -> None:
        for env in self.drain():
            msg = messages.loads(env.payload)
            self.epoch += 1
            due = t + self.params.window_s
            self._queue.append((due, self.epoch, msg["region"], float(msg["snr"])))
        while self._queue and self._queue[0][0] <= t:
            _, epoch, region, snr = self._queue.pop(0)
            rng = derive_rng(self.seed, f"ssvep/epoch/{epoch}")
            window = synthesize_eeg(
                region,
                snr,
                rng,
                table=self.table,
                channels=self.params.channels,
                fs=self.params.fs,
                duration=self.params.window_s,
                harmonics=self.params.harmonics,
            )
            decision = classify_ssvep(
                window, self.table, self.params.harmonics, self.params.beta
            )
            self.client.publish(
                "intent/ssvep",
                messages.dumps(
                    {
                        "epoch": epoch,
                        "region": decision.region,
                        "probabilities": [float(p) for p in decision.probabilities],
                        "correlations": [float(c) for c in decision.correlations],
                    }
                ),
            )


class EmgAgent(Component):
    """Synthesizes windows for the operator's held gesture at the hop rate,
    classifies them, and debounces the label stream into commands.

    Hops classify before queued gesture changes apply: a window ending at
    the instant of a transition contains no post-transition signal, so the
    first hop that can see the new gesture is one hop later, which makes a
    clean transition emit exactly five hops (0.5 s) after the event.
    """

    HOP_US = 100_000

    def __init__(self, hub: Broker, config: ScenarioConfig):
        super().__init__(hub, "emg", ("ui/emg/gesture",))
        self.seed = config.seed
        self.params = config.emg
        self.active: Optional[str] = None
        self.debouncer = Debouncer()
        self.hop_index = 0
        self._next_hop_us = 0
        if self.params.model_path:
            self.model = MlpGestureClassifier.load(self.params.model_path)
        else:
            rng = derive_rng(config.seed, "emg/train")
            X, y = make_dataset(self.params.train_per_class, rng)
            self.model = MlpGestureClassifier(
                epochs=self.params.epochs,
                learning_rate=self.params.learning_rate,
                seed=derive_seed(config.seed, "emg/model") % (2**32),
            ).fit(X, y)

    def process(self, t_us: int) -> None:
        while self._next_hop_us <= t_us:
            hop_t = self._next_hop_us
            self._next_hop_us += self.HOP_US
            if self.active is None:
                continue
            self.hop_index += 1
            rng = derive_rng(self.seed, f"emg/hop/{self.hop_index}")
            window = synthesize_emg(self.active, rng)
            label, scores = self.model.classify(extract_features(window))
            command = self.debouncer.push(label)
            if command is not None:
                self.client.publish(
                    "intent/emg",
                    messages.dumps(
                        {
                            "gesture": command,
                            "scores": [float(s) for s in scores],
                            "t": hop_t / 1e6,
                        }
                    ),
                )
        for env in self.drain():
            msg = messages.loads(env.payload)
            self.active = msg["gesture"]


class GazeAgent(Component):
    """Dwell detection plus trajectory capture/fit over the ui gaze stream."""

    def __init__(self, hub: Broker, config: ScenarioConfig):
        super().__init__(hub, "gaze", ("ui/gaze", "ui/gaze/capture"))
        gaze = config.gaze
        self.detector = DwellDetector(
            radius=gaze.dwell_radius,
            hold=gaze.dwell_hold,
            refractory=gaze.dwell_refractory,
            grid=config.grid(),
        )
        self.capturing = False
        self.samples: list[GazeSample] = []

    def process(self, t: float) -> None:
        for env in self.drain():
            if env.topic == "ui/gaze":
                msg = messages.loads(env.payload)
                sample = GazeSample(msg["t"], msg["x"], msg["y"], msg["valid"])
                if self.capturing:
                    self.samples.append(sample)
                event = self.detector.push(sample)
                if event is not None:
                    self.client.publish(
                        "intent/gaze/selection",
                        messages.dumps(
                            {"t": event.t, "x": event.x, "y": event.y,
                             "region": event.region}
                        ),
                    )
            else:  # ui/gaze/capture
                msg = messages.loads(env.payload)
                if msg["action"] == "start":
                    self.capturing = True
                    self.samples = []
                elif self.capturing:
                    self.capturing = False
                    self._finish_capture()

    def _finish_capture(self) -> None:
        # the capture window is bounded by the samples' own timestamps: a
        # live console stamps gaze with its local clock, not sim time
        try:
            if len(self.samples) < 2:
                raise TrajectoryTooShort(f"only {len(self.samples)} samples captured")
            points = capture_trajectory(
                self.samples, self.samples[0].t, self.samples[-1].t
            )
            path = fit_trajectory(points)
        except TrajectoryTooShort as exc:
            self.client.publish("intent/gaze/error", messages.dumps({"error": str(exc)}))
            return
        self.client.publish(
            "intent/gaze/path",
            messages.dumps(
                {
                    "knots": [[float(x), float(y)] for x, y in path.knots],
                    "length": path.length,
                }
            ),
        )


class SwarmController(Component):
    """Mode state machine mapping decoded intents onto per-robot commands.

    One mode is active at a time; intents switch it at tick boundaries.
    Every mode runs its twists through the boundary limiter and the pairwise
    repulsion before they are rotated into each robot's body frame and
    published on the per-robot command topics.
    """

    def __init__(self, hub: Broker, config: ScenarioConfig):
        super().__init__(
            hub,
            "swarm",
            ("intent/ssvep", "intent/emg", "intent/gaze/selection", "intent/gaze/path"),
        )
        self.config = config
        self.behavior = config.behavior
        self.grid = config.grid()
        self.mode = "idle"
        self.surround: Optional[SurroundPlan] = None
        self.surround_dispatched = False
        self.gesture_twist = Twist(0, 0, 0)
        self.path: Optional[FittedPath] = None
        self.progress = FormationProgress()
        self.goto_target: Optional[tuple[float, float]] = None

    def _set_mode(self, mode: str, detail: dict) -> None:
        self.mode = mode
        self.client.publish("swarm/mode", messages.dumps({"mode": mode, "detail": detail}))

    def _handle_intents(self, states: list[RobotState]) -> None:
        for env in self.drain():
            msg = messages.loads(env.payload)
            if env.topic == "intent/ssvep":
                cx, cy = self.grid.region_center(msg["region"])
                cx, cy = self.config.field.clamp_inside(cx, cy)
                self.surround = surround_allocation(states, (cx, cy), self.behavior)
                self.surround_dispatched = False
                self._set_mode(
                    "goto-surround",
                    {"region": msg["region"], "leader": self.surround.leader_id,
                     "target": [cx, cy]},
                )
            elif env.topic == "intent/emg":
                self.gesture_twist = GESTURE_TWISTS[msg["gesture"]]
                self._set_mode("common-velocity", {"gesture": msg["gesture"]})
            elif env.topic == "intent/gaze/selection":
                x, y = self.config.field.clamp_inside(msg["x"], msg["y"])
                self.goto_target = (x, y)
                self._set_mode("goto", {"target": [x, y], "region": msg["region"]})
            elif env.topic == "intent/gaze/path":
                if len(states) != len(self.behavior.formation):
                    self._set_mode(
                        "idle",
                        {"error": f"formation needs {len(self.behavior.formation)} robots, "
                                  f"have {len(states)}"},
                    )
                    continue
                knots = np.asarray(msg["knots"], dtype=float)
                try:
                    self.path = path_from_knots(knots)
                except TrajectoryTooShort as exc:
                    self._set_mode("idle", {"error": str(exc)})
                    continue
                self.progress = FormationProgress()
                self._set_mode("formation-follow", {"length": self.path.length})

    def tick(self, states: list[RobotState], dt: float) -> dict[int, Twist]:
        """World-frame twist per robot id for this tick."""
        self._handle_intents(states)
        fieldcfg = self.config.field
        cfg = self.behavior
        if self.mode == "goto-surround" and self.surround is not None:
            plan = self.surround
            by_id = {s.id: s for s in states}
            leader = by_id[plan.leader_id]
            dist = math.hypot(
                leader.pose.x - plan.target[0], leader.pose.y - plan.target[1]
            )
            if not self.surround_dispatched and dist <= 2 * cfg.arrival_tolerance:
                self.surround_dispatched = True
            twists = {}
            for s in states:
                if s.id == plan.leader_id:
                    twists[s.id] = goto_controller(s, plan.goals[s.id], cfg)
                elif self.surround_dispatched:
                    goal = fieldcfg.clamp_inside(*plan.goals[s.id])
                    twists[s.id] = goto_controller(s, goal, cfg)
                else:
                    twists[s.id] = Twist(0, 0, 0)
            return enforce_safety(twists, states, fieldcfg, cfg, dt)
        if self.mode == "common-velocity":
            return common_velocity(self.gesture_twist, states, fieldcfg, cfg, dt)
        if self.mode == "goto" and self.goto_target is not None:
            nearest = min(
                states,
                key=lambda s: (
                    math.hypot(s.pose.x - self.goto_target[0], s.pose.y - self.goto_target[1]),
                    s.id,
                ),
            )
            twists = {s.id: Twist(0, 0, 0) for s in states}
            twists[nearest.id] = goto_controller(nearest, self.goto_target, cfg)
            return enforce_safety(twists, states, fieldcfg, cfg, dt)
        if self.mode == "formation-follow" and self.path is not None:
            twists, self.progress = formation_follow(
                self.path, states, self.progress, dt, fieldcfg, cfg
            )
            if self.progress.done:
                self.path = None
                self._set_mode("idle", {"completed": "formation-follow"})
            return twists
        return {s.id: Twist(0, 0, 0) for s in states}


class SimEngine(Component):
    """Owns the robot states; applies the latest command per robot each tick."""

    def __init__(self, hub: Broker, config: ScenarioConfig):
        super().__init__(hub, "sim", ("robot/+/cmd_vel",))
        self.kinematics = config.kinematics
        self.states = {
            spec.id: RobotState(
                id=spec.id,
                pose=Pose(spec.x, spec.y, spec.theta),
                radius=spec.radius,
            )
            for spec in config.robots
        }
        self.commands: dict[int, Twist] = {rid: Twist(0, 0, 0) for rid in self.states}

    def ordered_states(self) -> list[RobotState]:
        return [self.states[rid] for rid in sorted(self.states)]

    def step(self, dt: float, t: float) -> None:
        for env in self.drain():
            parts = env.topic.split("/")
            try:
                rid = int(parts[1])
            except ValueError:
                continue
            if rid in self.states:
                msg = messages.loads(env.payload)
                self.commands[rid] = Twist(msg["vx"], msg["vy"], msg["w"])
        for rid in sorted(self.states):
            state = step(self.states[rid], self.commands[rid], dt, self.kinematics)
            self.states[rid] = state
            heading = state.pose.theta
            c, s = math.cos(heading), math.sin(heading)
            world_vx = c * state.twist_body.vx - s * state.twist_body.vy
            world_vy = s * state.twist_body.vx + c * state.twist_body.vy
            self.client.publish(
                f"robot/{rid}/state",
                messages.robot_state(
                    state.pose.x, state.pose.y, heading,
                    world_vx, world_vy, state.twist_body.omega, t,
                ),
            )


class TouchRouter(Component):
    """Tracks active console touches for the tracker's cursor channel."""

    def __init__(self, hub: Broker):
        super().__init__(hub, "touch", ("ui/touch",))
        self.active: dict[int, Touch] = {}

    def process(self) -> None:
        for env in self.drain():
            msg = messages.loads(env.payload)
            if msg["down"]:
                self.active[msg["id"]] = Touch(msg["id"], msg["x"], msg["y"])
            else:
                self.active.pop(msg["id"], None)

    def touches(self) -> tuple[Touch, ...]:
        return tuple(self.active[k] for k in sorted(self.active))


class TrackerAgent:
    """Publishes TUIO frames at the tracker rate from world snapshots."""

    def __init__(self, hub: Broker, config: ScenarioConfig):
        self.client = hub.client("tracker")
        tracker_cfg = TrackerConfig(
            rate=config.tracker.rate,
            pos_noise_sigma=config.tracker.pos_noise_sigma,
            angle_noise_sigma=config.tracker.angle_noise_sigma,
            velocity_window=config.tracker.velocity_window,
            seed=derive_seed(config.seed, "tracker") % (2**32),
        )
        self.tracker = Tracker(tracker_cfg, config.field)
        self.period_us = None  # scheduled on integer microseconds, no drift
        self.rate = tracker_cfg.rate
        self.samples_emitted = 0

    def due(self, t_us: int) -> bool:
        next_due = int(self.samples_emitted * 1_000_000 / self.rate)
        return t_us >= next_due

    def observe(self, t_us: int, snapshot: WorldSnapshot) -> None:
        frame = self.tracker.observe(snapshot)
        self.samples_emitted += 1
        self.client.publish("tracking/tuio", encode_frame(frame))


@dataclass
class SafetyMonitor:
    """Hard invariants evaluated on ground truth every tick."""

    fieldcfg: object
    min_pairwise: float = math.inf
    collision_violations: int = 0
    containment_violations: int = 0
    ticks_checked: int = 0

    def check(self, states: list[RobotState]) -> None:
        self.ticks_checked += 1
        margin = self.fieldcfg.boundary_margin
        eps = 1e-9
        for s in states:
            if not (
                margin - eps <= s.pose.x <= self.fieldcfg.width - margin + eps
                and margin - eps <= s.pose.y <= self.fieldcfg.height - margin + eps
            ):
                self.containment_violations += 1
        for i in range(len(states)):
            for j in range(i + 1, len(states)):
                d = math.hypot(
                    states[i].pose.x - states[j].pose.x,
                    states[i].pose.y - states[j].pose.y,
                )
                self.min_pairwise = min(self.min_pairwise, d)
                if d < states[i].radius + states[j].radius:
                    self.collision_violations += 1

    def report(self) -> dict:
        return {
            "min_pairwise_distance": None if math.isinf(self.min_pairwise) else self.min_pairwise,
            "collision_violations": self.collision_violations,
            "containment_violations": self.containment_violations,
            "ticks_checked": self.ticks_checked,
            "ok": self.collision_violations == 0 and self.containment_violations == 0,
        }
