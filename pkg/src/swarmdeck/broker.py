"""Minimal topic pub/sub hub with a framed byte-stream wire protocol.

This is the platform's stand-in for a full MQTT/ROS stack: one-to-many
publishing on '/'-separated topics, MQTT-flavored '+'/'#' subscription
wildcards, at-most-once delivery, no retained messages, no sessions.

Wire framing (all integers big-endian):

    frame  = type:u8  length:u32  body:length bytes
    types    1=CONNECT 2=SUBSCRIBE 3=PUBLISH 4=PING 5=PONG 6=ERROR

    CONNECT body    = optional UTF-8 client name
    SUBSCRIBE body  = UTF-8 filter pattern
    PUBLISH body    = topic_len:u16  topic:UTF-8  timestamp_us:u64  payload
    PING/PONG body  = empty
    ERROR body      = UTF-8 message

Full byte-level details live in docs/protocol.md.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass
from typing import Callable, Optional

CONNECT = 1
SUBSCRIBE = 2
PUBLISH = 3
PING = 4
PONG = 5
ERROR = 6

FRAME_TYPES = {CONNECT, SUBSCRIBE, PUBLISH, PING, PONG, ERROR}

MAX_PAYLOAD = 1 << 20          # 1 MiB envelope payload cap
MAX_TOPIC = (1 << 16) - 1
# Frame body must fit a max payload plus topic + fixed publish overhead.
MAX_FRAME_BODY = MAX_PAYLOAD + 4096

HEADER = struct.Struct(">BI")
PUBLISH_FIXED = struct.Struct(">H")  # topic length; timestamp packed separately


class ProtocolError(ValueError):
    """Malformed frame, topic, or filter."""


class Envelope:
    """One routed message: topic, microseconds since run start, raw payload."""

    __slots__ = ("topic", "timestamp_us", "payload")

    def __init__(self, topic: str, timestamp_us: int, payload: bytes):
        self.topic = topic
        self.timestamp_us = timestamp_us
        self.payload = payload

    def __repr__(self) -> str:
        return f"Envelope({self.topic!r}, t={self.timestamp_us}, {len(self.payload)}B)"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Envelope)
            and self.topic == other.topic
            and self.timestamp_us == other.timestamp_us
            and self.payload == other.payload
        )


def validate_topic(topic: str) -> None:
    if not topic:
        raise ProtocolError("topic must be non-empty")
    for level in topic.split("/"):
        if "+" in level or "#" in level or "\x00" in level:
            raise ProtocolError(f"topic level {level!r} contains a reserved character")


def validate_filter(pattern: str) -> None:
    if not pattern:
        raise ProtocolError("filter must be non-empty")
    levels = pattern.split("/")
    for i, level in enumerate(levels):
        if "\x00" in level:
            raise ProtocolError("filter contains NUL")
        if level == "#":
            if i != len(levels) - 1:
                raise ProtocolError("'#' is only allowed as the final level")
        elif "#" in level:
            raise ProtocolError("'#' must occupy a whole level")
        elif level != "+" and "+" in level:
            raise ProtocolError("'+' must occupy a whole level")


def topic_matches(pattern: str, topic: str) -> bool:
    """True iff `topic` matches the wildcard `pattern`.

    '+' matches exactly one level; a terminal '#' matches the remaining
    levels including none ("robot/#" matches "robot" itself).
    """
    plevels = pattern.split("/")
    tlevels = topic.split("/")
    for i, pl in enumerate(plevels):
        if pl == "#":
            return True
        if i >= len(tlevels):
            return False
        if pl != "+" and pl != tlevels[i]:
            return False
    return len(plevels) == len(tlevels)


@dataclass(frozen=True)
class Frame:
    frame_type: int
    body: bytes = b""


def encode_frame(frame: Frame) -> bytes:
    if frame.frame_type not in FRAME_TYPES:
        raise ProtocolError(f"unknown frame type {frame.frame_type}")
    if len(frame.body) > MAX_FRAME_BODY:
        raise ProtocolError(f"frame body {len(frame.body)} exceeds {MAX_FRAME_BODY}")
    return HEADER.pack(frame.frame_type, len(frame.body)) + frame.body


def decode_frame(data: bytes, offset: int = 0) -> Optional[tuple[Frame, int]]:
    """Decode one frame starting at `offset`.

    Returns (frame, bytes consumed) or None when more bytes are needed.
    Raises ProtocolError on an unknown type or oversized length.
    """
    if len(data) - offset < HEADER.size:
        return None
    ftype, length = HEADER.unpack_from(data, offset)
    if ftype not in FRAME_TYPES:
        raise ProtocolError(f"unknown frame type {ftype}")
    if length > MAX_FRAME_BODY:
        raise ProtocolError(f"frame length {length} exceeds {MAX_FRAME_BODY}")
    if len(data) - offset < HEADER.size + length:
        return None
    body = bytes(data[offset + HEADER.size : offset + HEADER.size + length])
    return Frame(ftype, body), HEADER.size + length


def encode_publish_body(topic: str, timestamp_us: int, payload: bytes) -> bytes:
    tb = topic.encode("utf-8")
    if len(tb) > MAX_TOPIC:
        raise ProtocolError("topic too long")
    return PUBLISH_FIXED.pack(len(tb)) + tb + struct.pack(">Q", timestamp_us) + payload


def decode_publish_body(body: bytes) -> Envelope:
    if len(body) < 2:
        raise ProtocolError("publish body truncated before topic length")
    (tlen,) = PUBLISH_FIXED.unpack_from(body, 0)
    if len(body) < 2 + tlen + 8:
        raise ProtocolError("publish body truncated")
    topic = body[2 : 2 + tlen].decode("utf-8")
    (ts,) = struct.unpack_from(">Q", body, 2 + tlen)
    return Envelope(topic, ts, bytes(body[2 + tlen + 8 :]))


class FrameDecoder:
    """Accumulates stream bytes and yields complete frames."""

    def __init__(self) -> None:
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[Frame]:
        self._buf.extend(data)
        frames = []
        offset = 0
        while True:
            result = decode_frame(self._buf, offset)
            if result is None:
                break
            frame, used = result
            frames.append(frame)
            offset += used
        if offset:
            del self._buf[:offset]
        return frames


class Subscriber:
    """One attached connection: a delivery sink plus its filter set."""

    def __init__(self, hub: "Broker", conn_id: int, name: str, sink: Callable[[Envelope], None]):
        self.hub = hub
        self.conn_id = conn_id
        self.name = name
        self._sink = sink
        self.filters: dict[str, int] = {}  # pattern -> subscription id
        self.closed = False

    def deliver(self, env: Envelope) -> None:
        self._sink(env)


class Broker:
    """In-process routing core shared by the TCP server and local clients.

    Routing-table mutation is serialized under one lock; a publish snapshots
    the matching sinks under the lock and delivers outside it, so slow
    subscribers never block table updates. Each connection receives at most
    one copy of a message no matter how many of its filters match.
    """

    def __init__(self, clock_us: Optional[Callable[[], int]] = None):
        self._lock = threading.Lock()
        self._conns: dict[int, Subscriber] = {}
        self._next_conn = 1
        self._next_sub = 1
        self._clock = clock_us or (lambda: 0)

    def now_us(self) -> int:
        return int(self._clock())

    def set_clock(self, clock_us: Callable[[], int]) -> None:
        self._clock = clock_us

    def attach(self, name: str, sink: Callable[[Envelope], None]) -> Subscriber:
        with self._lock:
            conn = Subscriber(self, self._next_conn, name, sink)
            self._conns[self._next_conn] = conn
            self._next_conn += 1
        return conn

    def detach(self, conn: Subscriber) -> None:
        with self._lock:
            conn.closed = True
            self._conns.pop(conn.conn_id, None)

    def subscribe(self, conn: Subscriber, pattern: str) -> int:
        validate_filter(pattern)
        with self._lock:
            existing = conn.filters.get(pattern)
            if existing is not None:
                return existing
            sub_id = self._next_sub
            self._next_sub += 1
            conn.filters[pattern] = sub_id
            return sub_id

    def unsubscribe(self, conn: Subscriber, pattern: str) -> bool:
        with self._lock:
            return conn.filters.pop(pattern, None) is not None

    def publish(
        self,
        conn: Optional[Subscriber],
        topic: str,
        payload: bytes,
        timestamp_us: Optional[int] = None,
    ) -> int:
        """Route one message; returns the number of connections it reached."""
        validate_topic(topic)
        if len(payload) > MAX_PAYLOAD:
            raise ProtocolError(f"payload {len(payload)} exceeds {MAX_PAYLOAD} bytes")
        env = Envelope(topic, self.now_us() if timestamp_us is None else timestamp_us, payload)
        with self._lock:
            # conn_id order makes in-process delivery deterministic.
            targets = [
                c
                for c in self._conns.values()
                if any(topic_matches(p, topic) for p in c.filters)
            ]
        delivered = 0
        for target in targets:
            try:
                target.deliver(env)
                delivered += 1
            except (ConnectionError, OSError):
                # broken transport: subscriber drops out silently
                self.detach(target)
        return delivered

    def client(self, name: str = "local", keep_inbox: bool = False) -> "LocalClient":
        return LocalClient(self, name, keep_inbox=keep_inbox)


class LocalClient:
    """Same contract as a socket client, minus the socket.

    Matching messages are handed to `on_message` synchronously in publish
    order (and additionally buffered in `inbox` if `keep_inbox`), which is
    what makes single-threaded headless runs deterministic.
    """

    def __init__(self, hub: Broker, name: str = "local", keep_inbox: bool = False):
        self.hub = hub
        self.on_message: Optional[Callable[[Envelope], None]] = None
        self.inbox: list[Envelope] = []
        self._keep_inbox = keep_inbox
        self._conn = hub.attach(name, self._receive)

    def _receive(self, env: Envelope) -> None:
        if self._keep_inbox or self.on_message is None:
            self.inbox.append(env)
        if self.on_message is not None:
            self.on_message(env)

    def subscribe(self, pattern: str) -> int:
        return self.hub.subscribe(self._conn, pattern)

    def unsubscribe(self, pattern: str) -> bool:
        return self.hub.unsubscribe(self._conn, pattern)

    def publish(self, topic: str, payload: bytes, timestamp_us: Optional[int] = None) -> int:
        return self.hub.publish(self._conn, topic, payload, timestamp_us)

    def drain(self) -> list[Envelope]:
        msgs, self.inbox = self.inbox, []
        return msgs

    def close(self) -> None:
        self.hub.detach(self._conn)
