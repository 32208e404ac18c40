"""AAIP/1 message codec: length-prefixed JSON frames with pixel payloads.

Every frame on the wire is a 4-byte big-endian payload length followed by
the payload, capped at MAX_FRAME. The payload carries one message: a JSON
object with reserved keys "type" and "session" plus free-form data fields.

Raw byte values (pixel buffers) inside the data travel one of two ways:
  - text transport: in place, as {"__b64__": "<base64>"} markers;
  - binary transport: the payload becomes <4-byte JSON length><JSON> followed
    by the byte blobs back to back (each prefixed with its own 4-byte
    length), and the JSON holds {"__blob__": index} markers.
Both directions are loss-free: decode_message(encode_message(m)) == m.
Container types are JSON-native (dicts, lists, strings, numbers, booleans,
None) plus bytes; tuples do not survive the trip, so senders use lists.
"""

from __future__ import annotations

import base64
import json
import struct
from dataclasses import dataclass, field

PROTOCOL_VERSION = "AAIP/1"
MAX_FRAME = 64 * 2 ** 20

MESSAGE_TYPES = frozenset({
    "hello", "configure", "reset", "step", "observation", "episode-end",
    "error", "bye",
})

_RESERVED_KEYS = ("type", "session")


class ProtocolError(ValueError):
    """A frame or message that violates the wire contract.

    code is a stable machine-readable slug: oversize, truncated, bad-json,
    bad-frame or unknown-type.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class Message:
    type: str
    data: dict = field(default_factory=dict)
    session: str | None = None

    def __post_init__(self) -> None:
        if self.type not in MESSAGE_TYPES:
            raise ProtocolError("unknown-type",
                                f"unknown message type {self.type!r}")
        for key in _RESERVED_KEYS:
            if key in self.data:
                raise ProtocolError("bad-frame",
                                    f"data may not contain reserved key {key!r}")


def _pack(value, blobs: list[bytes] | None):
    if isinstance(value, (bytes, bytearray, memoryview)):
        raw = bytes(value)
        if blobs is None:
            return {"__b64__": base64.b64encode(raw).decode("ascii")}
        blobs.append(raw)
        return {"__blob__": len(blobs) - 1}
    if isinstance(value, dict):
        return {str(k): _pack(v, blobs) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_pack(v, blobs) for v in value]
    return value


def _unpack(value, blobs: list[bytes] | None):
    if isinstance(value, dict):
        if set(value) == {"__b64__"}:
            try:
                return base64.b64decode(value["__b64__"], validate=True)
            except (TypeError, ValueError) as exc:
                raise ProtocolError("bad-frame", f"bad base64 field: {exc}")
        if set(value) == {"__blob__"}:
            index = value["__blob__"]
            if blobs is None or not isinstance(index, int) \
                    or not 0 <= index < len(blobs):
                raise ProtocolError("bad-frame",
                                    f"blob reference {index!r} out of range")
            return blobs[index]
        return {k: _unpack(v, blobs) for k, v in value.items()}
    if isinstance(value, list):
        return [_unpack(v, blobs) for v in value]
    return value


def encode_message(msg: Message, binary: bool = False) -> bytes:
    blobs: list[bytes] | None = [] if binary else None
    obj = {"type": msg.type}
    if msg.session is not None:
        obj["session"] = msg.session
    obj.update(_pack(msg.data, blobs))
    encoded = json.dumps(obj, separators=(",", ":")).encode("utf-8")
    if binary:
        parts = [struct.pack(">I", len(encoded)), encoded]
        for blob in blobs:
            parts.append(struct.pack(">I", len(blob)))
            parts.append(blob)
        body = b"".join(parts)
    else:
        body = encoded
    if len(body) > MAX_FRAME:
        raise ProtocolError("oversize",
                            f"frame body of {len(body)} bytes exceeds cap")
    return struct.pack(">I", len(body)) + body


def _read_prefixed(buf: bytes, offset: int, what: str) -> tuple[bytes, int]:
    if offset + 4 > len(buf):
        raise ProtocolError("truncated", f"frame ends inside {what} length")
    (n,) = struct.unpack_from(">I", buf, offset)
    if offset + 4 + n > len(buf):
        raise ProtocolError("truncated", f"frame ends inside {what}")
    return buf[offset + 4:offset + 4 + n], offset + 4 + n


def decode_message(frame: bytes, binary: bool = False) -> Message:
    """Decode one complete frame, 4-byte length prefix included."""
    body, end = _read_prefixed(frame, 0, "payload")
    if end != len(frame):
        raise ProtocolError("bad-frame",
                            f"{len(frame) - end} trailing bytes after frame")
    if len(body) > MAX_FRAME:
        raise ProtocolError("oversize",
                            f"frame body of {len(body)} bytes exceeds cap")
    blobs: list[bytes] | None = None
    if binary:
        encoded, offset = _read_prefixed(body, 0, "message JSON")
        blobs = []
        while offset < len(body):
            blob, offset = _read_prefixed(body, offset, f"blob {len(blobs)}")
            blobs.append(blob)
    else:
        encoded = body
    try:
        obj = json.loads(encoded.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError("bad-json", f"payload is not valid JSON: {exc}")
    if not isinstance(obj, dict):
        raise ProtocolError("bad-json", "payload JSON is not an object")
    if "type" not in obj:
        raise ProtocolError("unknown-type", "message has no type field")
    mtype = obj.pop("type")
    session = obj.pop("session", None)
    if not isinstance(mtype, str) or mtype not in MESSAGE_TYPES:
        raise ProtocolError("unknown-type", f"unknown message type {mtype!r}")
    if session is not None and not isinstance(session, str):
        raise ProtocolError("bad-frame", "session id must be a string")
    return Message(type=mtype, data=_unpack(obj, blobs), session=session)


class FrameSplitter:
    """Reassembles complete frames from a byte stream.

    feed() returns every frame completed by the chunk, prefix included, so
    the frames pass straight to decode_message.
    """

    def __init__(self) -> None:
        self._buffer = bytearray()

    def feed(self, chunk: bytes) -> list[bytes]:
        self._buffer.extend(chunk)
        frames = []
        while len(self._buffer) >= 4:
            (n,) = struct.unpack_from(">I", self._buffer, 0)
            if n > MAX_FRAME:
                raise ProtocolError("oversize",
                                    f"announced frame of {n} bytes exceeds cap")
            if len(self._buffer) < 4 + n:
                break
            frames.append(bytes(self._buffer[:4 + n]))
            del self._buffer[:4 + n]
        return frames

    @property
    def pending(self) -> int:
        return len(self._buffer)
