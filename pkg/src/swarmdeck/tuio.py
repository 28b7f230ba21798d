"""TUIO 1.1 cursor/object/blob profiles and the alive/set/fseq state machine.

Wire layout follows the public TUIO 1.1 specification. Each frame encodes
one OSC bundle per profile (alive message, one set per entity, fseq); the
per-profile bundles are nested inside a single carrier bundle so a whole
frame rides as one broker payload on topic "tracking/tuio". A profile whose
entity list is None is omitted from the wire entirely, meaning "no
information" rather than "everything vanished".

Floats are quantized to float32 by the transport; encode-then-decode is the
identity once that quantization has been applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from . import osc

CURSOR_ADDRESS = "/tuio/2Dcur"
OBJECT_ADDRESS = "/tuio/2Dobj"
BLOB_ADDRESS = "/tuio/2Dblb"

PROFILE_ADDRESSES = {
    "cursor": CURSOR_ADDRESS,
    "object": OBJECT_ADDRESS,
    "blob": BLOB_ADDRESS,
}


class TuioError(ValueError):
    """Frame violates a profile invariant (coordinates, duplicate ids...)."""


def _check_unit(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise TuioError(f"{name}={value} outside [0,1]")
    return value


@dataclass(frozen=True)
class TuioCursor:
    """Touch point. Wire set order: s, x, y, X, Y, m."""

    session_id: int
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0
    motion_accel: float = 0.0

    def set_args(self) -> list:
        _check_unit("x", self.x)
        _check_unit("y", self.y)
        return ["set", self.session_id, float(self.x), float(self.y),
                float(self.vx), float(self.vy), float(self.motion_accel)]


@dataclass(frozen=True)
class TuioObject:
    """Tagged marker (a robot). Wire set order: s, i, x, y, a, X, Y, A, m, r."""

    session_id: int
    class_id: int
    x: float
    y: float
    angle: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    vang: float = 0.0
    motion_accel: float = 0.0
    rotation_accel: float = 0.0

    def set_args(self) -> list:
        _check_unit("x", self.x)
        _check_unit("y", self.y)
        return ["set", self.session_id, self.class_id, float(self.x), float(self.y),
                float(self.angle), float(self.vx), float(self.vy), float(self.vang),
                float(self.motion_accel), float(self.rotation_accel)]


@dataclass(frozen=True)
class TuioBlob:
    """Untagged shape. Wire set order: s, x, y, a, w, h, f, X, Y, A, m, r."""

    session_id: int
    x: float
    y: float
    angle: float = 0.0
    width: float = 0.0
    height: float = 0.0
    area: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    vang: float = 0.0
    motion_accel: float = 0.0
    rotation_accel: float = 0.0

    def set_args(self) -> list:
        _check_unit("x", self.x)
        _check_unit("y", self.y)
        for name in ("width", "height", "area"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise TuioError(f"{name}={v} outside (0,1]")
        return ["set", self.session_id, float(self.x), float(self.y), float(self.angle),
                float(self.width), float(self.height), float(self.area),
                float(self.vx), float(self.vy), float(self.vang),
                float(self.motion_accel), float(self.rotation_accel)]


@dataclass(frozen=True)
class TuioFrame:
    """One tracking snapshot. Profile lists set to None are not on the wire."""

    fseq: int
    cursors: Optional[tuple[TuioCursor, ...]] = ()
    objects: Optional[tuple[TuioObject, ...]] = ()
    blobs: Optional[tuple[TuioBlob, ...]] = ()

    def profile(self, kind: str):
        return {"cursor": self.cursors, "object": self.objects, "blob": self.blobs}[kind]


def wrap_angle_tuio(theta: float) -> float:
    """Map a (-pi, pi] heading onto TUIO's [0, 2*pi) convention."""
    a = math.fmod(theta, math.tau)
    return a + math.tau if a < 0 else a


def _session_ids(entities: Iterable) -> list[int]:
    ids = [e.session_id for e in entities]
    if len(set(ids)) != len(ids):
        raise TuioError(f"duplicate session ids in frame: {sorted(ids)}")
    return ids


def _profile_bundle(address: str, entities, fseq: int) -> bytes:
    messages = [osc.encode_message(address, ["alive", *_session_ids(entities)])]
    for entity in entities:
        messages.append(osc.encode_message(address, entity.set_args()))
    messages.append(osc.encode_message(address, ["fseq", fseq]))
    return osc.encode_bundle(messages)


def encode_frame(frame: TuioFrame) -> bytes:
    """Encode a frame as one carrier bundle of per-profile bundles."""
    bundles = []
    for kind, address in PROFILE_ADDRESSES.items():
        entities = frame.profile(kind)
        if entities is not None:
            bundles.append(_profile_bundle(address, entities, frame.fseq))
    return osc.encode_bundle(bundles)


_SET_PARSERS = {
    CURSOR_ADDRESS: ("cursor", 6, lambda a: TuioCursor(a[0], a[1], a[2], a[3], a[4], a[5])),
    OBJECT_ADDRESS: ("object", 10, lambda a: TuioObject(a[0], a[1], a[2], a[3], a[4], a[5],
                                                        a[6], a[7], a[8], a[9])),
    BLOB_ADDRESS: ("blob", 12, lambda a: TuioBlob(a[0], a[1], a[2], a[3], a[4], a[5], a[6],
                                                  a[7], a[8], a[9], a[10], a[11])),
}


def decode_frame(data: bytes) -> TuioFrame:
    """Decode a carrier bundle (or a bare profile bundle) back into a frame.

    Profiles absent from the payload come back as None.
    """
    messages = osc.decode_bundle(data)
    present: dict[str, list] = {}
    fseq = -1
    for address, args in messages:
        if address not in _SET_PARSERS:
            continue  # ignore unrelated OSC traffic
        kind, set_arity, build = _SET_PARSERS[address]
        entries = present.setdefault(kind, [])
        if not args:
            raise TuioError(f"empty TUIO message on {address}")
        command = args[0]
        if command == "alive":
            pass  # membership is implied by the set messages we emit
        elif command == "set":
            if len(args) - 1 != set_arity:
                raise TuioError(f"{address} set expects {set_arity} args, got {len(args) - 1}")
            entries.append(build(args[1:]))
        elif command == "fseq":
            fseq = int(args[1])
        else:
            raise TuioError(f"unknown TUIO command {command!r}")
    return TuioFrame(
        fseq=fseq,
        cursors=tuple(present["cursor"]) if "cursor" in present else None,
        objects=tuple(present["object"]) if "object" in present else None,
        blobs=tuple(present["blob"]) if "blob" in present else None,
    )


def quantize_frame(frame: TuioFrame) -> TuioFrame:
    """Apply the encode-side float32 quantization without going to bytes."""
    def q(entity):
        floats = {
            f.name: osc.float32(getattr(entity, f.name))
            for f in entity.__dataclass_fields__.values()
            if f.name not in ("session_id", "class_id")
        }
        return replace(entity, **floats)

    def qlist(entities):
        return None if entities is None else tuple(q(e) for e in entities)

    return TuioFrame(frame.fseq, qlist(frame.cursors), qlist(frame.objects), qlist(frame.blobs))


@dataclass(frozen=True)
class TuioEvent:
    """One reconciled change: an entity appeared, moved, or vanished."""

    kind: str      # cursor | object | blob
    action: str    # added | updated | removed
    session_id: int
    entity: object = None


@dataclass(frozen=True)
class TrackState:
    """Reconciler memory: per-profile alive sets plus the last frame number."""

    alive: dict = field(default_factory=lambda: {"cursor": frozenset(), "object": frozenset(),
                                                 "blob": frozenset()})
    last_fseq: int = 0


def reconcile(state: TrackState, frame: TuioFrame) -> tuple[list[TuioEvent], TrackState]:
    """Pure frame-to-events step.

    A frame whose fseq is stale (<= last seen and not the out-of-band -1) is
    dropped without events. Within each present profile: ids not previously
    alive are added, persisting ids with set data are updated, ids that
    disappeared are removed. Events are ordered added, updated, removed,
    each sorted by session id.
    """
    if frame.fseq != -1 and frame.fseq <= state.last_fseq:
        return [], state
    events: list[TuioEvent] = []
    new_alive = dict(state.alive)
    for kind in ("cursor", "object", "blob"):
        entities = frame.profile(kind)
        if entities is None:
            continue
        prev = state.alive[kind]
        by_id = {e.session_id: e for e in entities}
        now = frozenset(by_id)
        for sid in sorted(now - prev):
            events.append(TuioEvent(kind, "added", sid, by_id[sid]))
        for sid in sorted(now & prev):
            events.append(TuioEvent(kind, "updated", sid, by_id[sid]))
        for sid in sorted(prev - now):
            events.append(TuioEvent(kind, "removed", sid))
        new_alive[kind] = now
    new_fseq = state.last_fseq if frame.fseq == -1 else frame.fseq
    return events, TrackState(new_alive, new_fseq)


class TuioReconciler:
    """Stateful convenience wrapper around :func:`reconcile`."""

    def __init__(self) -> None:
        self.state = TrackState()

    def push(self, frame: TuioFrame) -> list[TuioEvent]:
        events, self.state = reconcile(self.state, frame)
        return events
