"""Run logs: newline-delimited JSON records with base64 payloads, plus replay.

Every broker message of a run lands in the log exactly once, in publish
order, stamped with simulation microseconds. The format is greppable and
replayable; `replay` republishes a log into any broker with inter-record
delays scaled by a speed multiplier (0 = as fast as possible).
"""

from __future__ import annotations

import base64
import hashlib
import json
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional


class LogFormatError(ValueError):
    """Corrupt log record; names the byte offset of the offending line."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class LogRecord:
    t_us: int
    topic: str
    payload: bytes

    def to_json(self) -> str:
        return json.dumps(
            {
                "payload_b64": base64.b64encode(self.payload).decode("ascii"),
                "t": self.t_us,
                "topic": self.topic,
            },
            sort_keys=True,
            separators=(",", ":"),
        )


def write_log(records: Iterable[LogRecord], path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json())
            fh.write("\n")
            count += 1
    return count


def read_log(path) -> Iterator[LogRecord]:
    offset = 0
    last_t = 0
    with open(path, "rb") as fh:
        for line in fh:
            stripped = line.strip()
            if stripped:
                record = _parse_record(stripped, offset, last_t)
                last_t = record.t_us
                yield record
            offset += len(line)


def _parse_record(line: bytes, offset: int, last_t: int) -> LogRecord:
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as exc:
        raise LogFormatError(f"not valid JSON: {exc.msg}", offset) from exc
    if not isinstance(doc, dict):
        raise LogFormatError("record is not an object", offset)
    try:
        t_us = doc["t"]
        topic = doc["topic"]
        payload = base64.b64decode(doc["payload_b64"], validate=True)
    except KeyError as exc:
        raise LogFormatError(f"missing field {exc.args[0]!r}", offset) from exc
    except Exception as exc:
        raise LogFormatError(f"bad payload encoding: {exc}", offset) from exc
    if not isinstance(t_us, int) or not isinstance(topic, str) or not topic:
        raise LogFormatError("bad field types", offset)
    if t_us < last_t:
        raise LogFormatError(f"timestamps go backwards ({t_us} < {last_t})", offset)
    return LogRecord(t_us, topic, payload)


def log_hash(records: Iterable[LogRecord]) -> str:
    digest = hashlib.sha256()
    for record in records:
        digest.update(record.to_json().encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()


def replay(
    records: Iterable[LogRecord],
    publish: Callable[[str, bytes, int], object],
    speed: float = 1.0,
    sleep: Callable[[float], None] = time.sleep,
) -> int:
    """Republish records in order with original timestamps.

    `speed` scales the wall clock: 2.0 runs twice as fast, 0 (or anything
    non-positive) replays back-to-back with no delays.
    """
    count = 0
    prev_t: Optional[int] = None
    for record in records:
        if speed > 0 and prev_t is not None and record.t_us > prev_t:
            sleep((record.t_us - prev_t) / 1e6 / speed)
        publish(record.topic, record.payload, record.t_us)
        prev_t = record.t_us
        count += 1
    return count
