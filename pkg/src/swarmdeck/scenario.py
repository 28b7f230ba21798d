"""Scenario configuration: field, roster, behavior wiring, seeds, scripts.

A scenario is fully declarative: everything a run needs, including the
scripted operator events that drive the intent decoders in headless mode,
lives here. Validation is total: `validate` returns every violation it can
find instead of stopping at the first, and `run_scenario` refuses invalid
configs with the full list.

The three bundled presets reproduce the platform's demonstration scenarios:
a scripted region selection sending five robots into a leader-first
surround, ten robots driven around by gesture commands, and a gaze-drawn
semicircle followed by a three-robot formation.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

from .behaviors import BehaviorConfig
from .gaze import semicircle_track, synthetic_gaze
from .kinematics import KinematicParams, KinematicsConfigError
from .messages import UI_TOPICS, validate_ui_message
from .seeds import derive_rng
from .tracker import TrackerConfig
from .world import FieldConfig, Obstacle, RegionGrid

ENV_SEED = "SWARMDECK_SEED"


class ScenarioValidationError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("invalid scenario: " + "; ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class RobotSpec:
    id: int
    x: float
    y: float
    theta: float = 0.0
    radius: float = 0.055


@dataclass(frozen=True)
class ScriptEvent:
    """One scripted operator action: publish `payload` on `topic` at sim
    time `t` seconds."""

    t: float
    topic: str
    payload: dict


@dataclass(frozen=True)
class SsvepParams:
    channels: int = 8
    fs: float = 250.0
    window_s: float = 2.0
    harmonics: int = 2
    beta: float = 40.0


@dataclass(frozen=True)
class EmgParams:
    train_per_class: int = 40
    epochs: int = 300
    learning_rate: float = 0.1
    model_path: Optional[str] = None  # pre-trained model; None = train at start


@dataclass(frozen=True)
class GazeParams:
    dwell_radius: float = 0.05
    dwell_hold: float = 0.8
    dwell_refractory: float = 1.0


@dataclass(frozen=True)
class ScenarioConfig:
    robots: tuple[RobotSpec, ...]
    field: FieldConfig = FieldConfig()
    obstacles: tuple[Obstacle, ...] = ()
    tick_rate: float = 50.0
    duration: float = 10.0
    seed: int = 0
    mode: str = "headless"
    tracker: TrackerConfig = TrackerConfig()
    behavior: BehaviorConfig = BehaviorConfig()
    kinematics: KinematicParams = KinematicParams()
    ssvep: SsvepParams = SsvepParams()
    emg: EmgParams = EmgParams()
    gaze: GazeParams = GazeParams()
    grid_rows: int = 5
    grid_cols: int = 8
    script: tuple[ScriptEvent, ...] = ()

    def grid(self) -> RegionGrid:
        return RegionGrid(self.grid_rows, self.grid_cols, self.field.width, self.field.height)


def validate(config: ScenarioConfig) -> list[str]:
    """Every violation found, empty when the scenario is runnable."""
    errors: list[str] = []
    if not config.robots:
        errors.append("robot roster is empty")
    ids = [r.id for r in config.robots]
    if len(set(ids)) != len(ids):
        errors.append(f"robot ids are not unique: {sorted(ids)}")
    margin = config.field.boundary_margin
    for r in config.robots:
        if not config.field.contains(r.x, r.y, margin):
            errors.append(f"robot {r.id} start ({r.x}, {r.y}) outside field margin")
        if r.radius <= 0:
            errors.append(f"robot {r.id} radius must be positive")
    min_sep = config.behavior.min_separation
    for i in range(len(config.robots)):
        for j in range(i + 1, len(config.robots)):
            a, b = config.robots[i], config.robots[j]
            d = math.hypot(a.x - b.x, a.y - b.y)
            if d < min_sep:
                errors.append(
                    f"robots {a.id} and {b.id} start {d:.3f} m apart; "
                    f"minimum separation is {min_sep}"
                )
    if config.tick_rate <= 0:
        errors.append("tick rate must be positive")
    if config.duration <= 0:
        errors.append("duration must be positive")
    if config.mode not in ("headless", "live"):
        errors.append(f"mode must be headless or live, not {config.mode!r}")
    if config.grid_rows < 1 or config.grid_cols < 1:
        errors.append("region grid must have positive dimensions")
    for obstacle in config.obstacles:
        if not config.field.contains(obstacle.x, obstacle.y):
            errors.append(f"obstacle {obstacle.id} outside field")
    last_t = -math.inf
    for event in config.script:
        if event.t < 0:
            errors.append(f"script event at t={event.t} before run start")
        if event.t < last_t:
            errors.append("script events are not time-ordered")
        last_t = event.t
        if event.topic not in UI_TOPICS:
            errors.append(f"script may only publish ui topics, not {event.topic!r}")
        else:
            for problem in validate_ui_message(event.topic, event.payload):
                errors.append(f"script event t={event.t} {event.topic}: {problem}")
    if config.ssvep.window_s * config.ssvep.fs < config.ssvep.fs:
        errors.append("ssvep window must be at least one second")
    try:
        _ = config.kinematics.coupling_matrix()
    except KinematicsConfigError as exc:
        errors.append(f"kinematics: {exc}")
    return errors


def apply_env_seed(config: ScenarioConfig, environ=os.environ) -> ScenarioConfig:
    """SWARMDECK_SEED overrides the configured seed when set."""
    raw = environ.get(ENV_SEED)
    if raw is None:
        return config
    try:
        return replace(config, seed=int(raw))
    except ValueError as exc:
        raise ScenarioValidationError([f"{ENV_SEED} must be an integer, got {raw!r}"]) from exc


# ------------------------------------------------------------ (de)serialization


def to_dict(config: ScenarioConfig) -> dict:
    doc = asdict(config)
    doc["robots"] = [asdict(r) for r in config.robots]
    doc["obstacles"] = [asdict(o) for o in config.obstacles]
    doc["script"] = [asdict(e) for e in config.script]
    return doc


def from_dict(doc: dict) -> ScenarioConfig:
    def build(cls, value, default):
        if value is None:
            return default
        return cls(**value)

    return ScenarioConfig(
        robots=tuple(RobotSpec(**r) for r in doc.get("robots", [])),
        field=build(FieldConfig, doc.get("field"), FieldConfig()),
        obstacles=tuple(Obstacle(**o) for o in doc.get("obstacles", [])),
        tick_rate=doc.get("tick_rate", 50.0),
        duration=doc.get("duration", 10.0),
        seed=doc.get("seed", 0),
        mode=doc.get("mode", "headless"),
        tracker=build(TrackerConfig, doc.get("tracker"), TrackerConfig()),
        behavior=_behavior_from(doc.get("behavior")),
        kinematics=_kinematics_from(doc.get("kinematics")),
        ssvep=build(SsvepParams, doc.get("ssvep"), SsvepParams()),
        emg=build(EmgParams, doc.get("emg"), EmgParams()),
        gaze=build(GazeParams, doc.get("gaze"), GazeParams()),
        grid_rows=doc.get("grid_rows", 5),
        grid_cols=doc.get("grid_cols", 8),
        script=tuple(ScriptEvent(**e) for e in doc.get("script", [])),
    )


def _behavior_from(doc: Optional[dict]) -> BehaviorConfig:
    if doc is None:
        return BehaviorConfig()
    if "formation" in doc:
        doc = dict(doc, formation=tuple(tuple(p) for p in doc["formation"]))
    return BehaviorConfig(**doc)


def _kinematics_from(doc: Optional[dict]) -> KinematicParams:
    if doc is None:
        return KinematicParams()
    if "wheel_angles" in doc:
        doc = dict(doc, wheel_angles=tuple(doc["wheel_angles"]))
    return KinematicParams(**doc)


def load_config(path) -> ScenarioConfig:
    return apply_env_seed(from_dict(json.loads(Path(path).read_text())))


def save_config(config: ScenarioConfig, path) -> None:
    Path(path).write_text(json.dumps(to_dict(config), indent=2, sort_keys=True))


# -------------------------------------------------------------------- presets


def preset_ssvep_surround(seed: int = 7, region: int = 26, snr: float = 10.0) -> ScenarioConfig:
    """Five dispersed robots; a scripted stimulation epoch selects a region
    and the swarm surrounds its center, leader first."""
    robots = (
        RobotSpec(1, 0.40, 0.30),
        RobotSpec(2, 2.00, 0.25),
        RobotSpec(3, 2.10, 1.10),
        RobotSpec(4, 0.30, 1.05),
        RobotSpec(5, 1.20, 0.20),
    )
    script = (ScriptEvent(0.2, "ui/ssvep/epoch", {"region": region, "snr": snr}),)
    return ScenarioConfig(robots=robots, duration=20.0, seed=seed, script=script)


def preset_emg_ten(seed: int = 11) -> ScenarioConfig:
    """Ten robots driven simultaneously through a gesture script."""
    xs = [0.35 + 0.19 * i for i in range(10)]
    robots = tuple(
        RobotSpec(i + 1, xs[i], 0.95 if i % 2 == 0 else 1.15) for i in range(10)
    )
    gestures = ["up", "left", "stop", "down", "right", "stop"]
    script = tuple(
        ScriptEvent(0.2 + 5.0 * k, "ui/emg/gesture", {"gesture": g})
        for k, g in enumerate(gestures)
    )
    return ScenarioConfig(robots=robots, duration=30.0, seed=seed, script=script)


def preset_gaze_formation(seed: int = 13) -> ScenarioConfig:
    """A gaze-drawn semicircle is captured, fitted, and followed by a
    three-robot triangle formation."""
    # roster starts near the formation slots at the path head (the sweep
    # begins at the right end of the arc, heading up-screen)
    cfg = ScenarioConfig(
        robots=(
            RobotSpec(1, 1.64, 0.98),
            RobotSpec(2, 1.80, 1.20),
            RobotSpec(3, 1.50, 1.22),
        ),
        duration=40.0,
        seed=seed,
    )
    track = semicircle_track(1.21, 0.95, 0.45, duration=3.0)
    rng = derive_rng(seed, "script/gaze")
    samples = synthetic_gaze(track, 3.0, rng, start_t=0.5)
    script = [ScriptEvent(0.4, "ui/gaze/capture", {"action": "start"})]
    script += [
        ScriptEvent(s.t, "ui/gaze", {"t": s.t, "x": s.x, "y": s.y, "valid": True})
        for s in samples
    ]
    script.append(ScriptEvent(3.6, "ui/gaze/capture", {"action": "stop"}))
    return replace(cfg, script=tuple(script))


PRESETS = {
    "ssvep-surround": preset_ssvep_surround,
    "emg-ten": preset_emg_ten,
    "gaze-formation": preset_gaze_formation,
}
