"""JSON payload schemas for every non-binary topic, plus UI-message validation.

Topic table (authoritative, also in README):

    robot/<id>/cmd_vel   {"vx","vy","w"}            body-frame command, m/s & rad/s
    robot/<id>/state     {"x","y","theta","vx","vy","w","t"}   world pose + world twist
    tracking/tuio        binary TUIO bytes (see tuio module)
    intent/ssvep         {"epoch","region","probabilities","correlations"}
    intent/emg           {"gesture","scores","t"}
    intent/gaze/selection {"t","x","y","region"}
    intent/gaze/path     {"knots","length"}
    intent/gaze/error    {"error"}
    swarm/mode           {"mode","detail"}
    sim/tick             {"tick","t"}
    ui/touch             {"id","x","y","down"}
    ui/ssvep/epoch       {"region","snr"}
    ui/emg/gesture       {"gesture"}
    ui/gaze              {"t","x","y","valid"}
    ui/gaze/capture      {"action"}

All JSON payloads are canonical: sorted keys, compact separators. Inbound
ui/* messages are validated against the schemas below before they may enter
the broker; everything else is produced only by trusted components.
"""

from __future__ import annotations

import json
from typing import Any, Callable

from .emg import GESTURES

UI_TOPICS = ("ui/touch", "ui/ssvep/epoch", "ui/emg/gesture", "ui/gaze", "ui/gaze/capture")


def dumps(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def loads(payload: bytes) -> dict:
    return json.loads(payload.decode("utf-8"))


def _require(payload: dict, key: str, kinds, errors: list[str], check=None) -> None:
    if key not in payload:
        errors.append(f"missing field {key!r}")
        return
    value = payload[key]
    kinds_t = kinds if isinstance(kinds, tuple) else (kinds,)
    # bool is an int subclass; only accept it where bool is explicitly allowed
    if isinstance(value, bool) and bool not in kinds_t or not isinstance(value, kinds_t):
        errors.append(f"field {key!r} has wrong type {type(value).__name__}")
        return
    if check is not None and not check(value):
        errors.append(f"field {key!r} value {value!r} out of range")


def _validate_touch(p: dict) -> list[str]:
    errors: list[str] = []
    _require(p, "id", int, errors, lambda v: v >= 0)
    _require(p, "x", (int, float), errors)
    _require(p, "y", (int, float), errors)
    _require(p, "down", bool, errors)
    return errors


def _validate_ssvep_epoch(p: dict) -> list[str]:
    errors: list[str] = []
    _require(p, "region", int, errors, lambda v: 1 <= v <= 40)
    _require(p, "snr", (int, float), errors, lambda v: v >= 0)
    return errors


def _validate_emg_gesture(p: dict) -> list[str]:
    errors: list[str] = []
    _require(p, "gesture", str, errors, lambda v: v in GESTURES)
    return errors


def _validate_gaze(p: dict) -> list[str]:
    errors: list[str] = []
    _require(p, "t", (int, float), errors)
    _require(p, "x", (int, float), errors)
    _require(p, "y", (int, float), errors)
    _require(p, "valid", bool, errors)
    return errors


def _validate_gaze_capture(p: dict) -> list[str]:
    errors: list[str] = []
    _require(p, "action", str, errors, lambda v: v in ("start", "stop"))
    return errors


_UI_VALIDATORS: dict[str, Callable[[dict], list[str]]] = {
    "ui/touch": _validate_touch,
    "ui/ssvep/epoch": _validate_ssvep_epoch,
    "ui/emg/gesture": _validate_emg_gesture,
    "ui/gaze": _validate_gaze,
    "ui/gaze/capture": _validate_gaze_capture,
}


def validate_ui_message(topic: str, payload: Any) -> list[str]:
    """All schema violations for one inbound UI message (empty = valid)."""
    validator = _UI_VALIDATORS.get(topic)
    if validator is None:
        return [f"unknown ui topic {topic!r}"]
    if not isinstance(payload, dict):
        return ["payload must be a JSON object"]
    return validator(payload)


def robot_cmd(vx: float, vy: float, w: float) -> bytes:
    return dumps({"vx": vx, "vy": vy, "w": w})


def robot_state(x, y, theta, vx, vy, w, t) -> bytes:
    return dumps({"t": t, "theta": theta, "vx": vx, "vy": vy, "w": w, "x": x, "y": y})
