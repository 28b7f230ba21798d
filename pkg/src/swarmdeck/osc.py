"""Bit-exact Open Sound Control 1.0 message and bundle codec.

Only the argument types TUIO 1.1 needs are implemented: int32 ('i'),
float32 ('f'), and NUL-terminated padded strings ('s'). Python ints map to
'i', floats to 'f' (quantized to IEEE-754 single precision on encode), and
str to 's'. Every encoded unit is a multiple of 4 bytes long.
"""

from __future__ import annotations

import struct
from typing import Union

OscArg = Union[int, float, str]

BUNDLE_MAGIC = b"#bundle\x00"
IMMEDIATELY = 1  # OSC timetag meaning "now"

INT32_MIN, INT32_MAX = -(1 << 31), (1 << 31) - 1


class OscError(ValueError):
    """Encode-side violation of the OSC layout rules."""


class OscDecodeError(ValueError):
    """Malformed OSC bytes; carries the offending byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


def _pad_string(s: str) -> bytes:
    data = s.encode("utf-8")
    if b"\x00" in data:
        raise OscError("OSC strings cannot contain NUL")
    # Terminating NUL, then pad to the next 4-byte boundary.
    return data + b"\x00" * (4 - len(data) % 4)


def encode_message(address: str, args: list[OscArg] | tuple[OscArg, ...]) -> bytes:
    if not address.startswith("/"):
        raise OscError(f"address must start with '/', got {address!r}")
    tags = [","]
    packed = []
    for arg in args:
        if isinstance(arg, bool):
            raise OscError("bool is not an OSC argument type here")
        if isinstance(arg, int):
            if not INT32_MIN <= arg <= INT32_MAX:
                raise OscError(f"int32 out of range: {arg}")
            tags.append("i")
            packed.append(struct.pack(">i", arg))
        elif isinstance(arg, float):
            tags.append("f")
            packed.append(struct.pack(">f", arg))
        elif isinstance(arg, str):
            tags.append("s")
            packed.append(_pad_string(arg))
        else:
            raise OscError(f"unsupported argument type {type(arg).__name__}")
    return _pad_string(address) + _pad_string("".join(tags)) + b"".join(packed)


def _read_padded_string(data: bytes, offset: int, end: int) -> tuple[str, int]:
    nul = data.find(b"\x00", offset, end)
    if nul < 0:
        raise OscDecodeError("unterminated string", offset)
    raw = data[offset:nul]
    consumed = (nul - offset) + 1
    consumed += -consumed % 4
    if offset + consumed > end:
        raise OscDecodeError("string padding truncated", offset)
    return raw.decode("utf-8"), offset + consumed


def decode_message(data: bytes, offset: int = 0, end: int | None = None) -> tuple[str, list[OscArg]]:
    """Decode one message occupying data[offset:end]."""
    end = len(data) if end is None else end
    address, pos = _read_padded_string(data, offset, end)
    if not address.startswith("/"):
        raise OscDecodeError(f"address {address!r} does not start with '/'", offset)
    tags, pos = _read_padded_string(data, pos, end)
    if not tags.startswith(","):
        raise OscDecodeError("type tag string must start with ','", pos)
    args: list[OscArg] = []
    for tag in tags[1:]:
        if tag == "i":
            if pos + 4 > end:
                raise OscDecodeError("int32 truncated", pos)
            args.append(struct.unpack_from(">i", data, pos)[0])
            pos += 4
        elif tag == "f":
            if pos + 4 > end:
                raise OscDecodeError("float32 truncated", pos)
            args.append(struct.unpack_from(">f", data, pos)[0])
            pos += 4
        elif tag == "s":
            value, pos = _read_padded_string(data, pos, end)
            args.append(value)
        else:
            raise OscDecodeError(f"unknown type tag {tag!r}", pos)
    return address, args


def encode_bundle(elements: list[bytes], timetag: int = IMMEDIATELY) -> bytes:
    """Wrap pre-encoded messages/bundles in one OSC bundle."""
    out = [BUNDLE_MAGIC, struct.pack(">Q", timetag)]
    for element in elements:
        if len(element) % 4:
            raise OscError("bundle element length must be a multiple of 4")
        out.append(struct.pack(">I", len(element)))
        out.append(element)
    return b"".join(out)


def decode_bundle(data: bytes) -> list[tuple[str, list[OscArg]]]:
    """Decode a bundle into its messages, recursing into nested bundles.

    Returns the contained (address, args) pairs in wire order.
    """
    messages: list[tuple[str, list[OscArg]]] = []
    _decode_bundle_into(data, 0, len(data), messages)
    return messages


def _decode_bundle_into(
    data: bytes, offset: int, end: int, out: list[tuple[str, list[OscArg]]]
) -> None:
    if data[offset : offset + 8] != BUNDLE_MAGIC:
        raise OscDecodeError("missing '#bundle' magic", offset)
    pos = offset + 8
    if pos + 8 > end:
        raise OscDecodeError("bundle timetag truncated", pos)
    pos += 8
    while pos < end:
        if pos + 4 > end:
            raise OscDecodeError("bundle element size truncated", pos)
        (size,) = struct.unpack_from(">I", data, pos)
        pos += 4
        if pos + size > end:
            raise OscDecodeError(f"bundle element of {size} bytes truncated", pos)
        if data[pos : pos + 8] == BUNDLE_MAGIC:
            _decode_bundle_into(data, pos, pos + size, out)
        else:
            out.append(decode_message(data, pos, pos + size))
        pos += size


def float32(x: float) -> float:
    """The value `x` takes after one pass through the wire format."""
    return struct.unpack(">f", struct.pack(">f", x))[0]
