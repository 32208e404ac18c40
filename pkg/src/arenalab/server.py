"""AAIP/1 session server: raw TCP and WebSocket transports on one port.

Incoming connections are sniffed by their first four bytes: an HTTP "GET "
means a WebSocket client (handshake, then one text-transport frame per
WebSocket message); anything else is treated as the raw TCP transport
(binary-transport frames straight on the stream — unambiguous because the
ASCII for "GET " would announce a frame far beyond the size cap).

Each connection owns one isolated session: its own environment, stepped in
request-response lockstep. The reply to reset and step is an observation
message; the step that finishes the last arena is followed by one extra
episode-end message on the same stream. The session id appears only in the
hello acknowledgement so observation byte streams depend on nothing but the
configuration, the seed and the actions.
"""

from __future__ import annotations

import base64
import hashlib
import os
import secrets
import socket
import struct
import threading

from .configfile import ParseError, parse_config
from .episode import Environment
from .model import ARENA_SIZE, TRANSPARENT_NAMES
from .protocol import (PROTOCOL_VERSION, FrameSplitter, Message,
                       ProtocolError, decode_message, encode_message)

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
_RECV_CHUNK = 65536


class _Closed(Exception):
    """Internal signal: stop the session loop after flushing replies."""


def _recv_exact(sock: socket.socket, n: int, buffer: bytearray) -> bytes | None:
    while len(buffer) < n:
        chunk = sock.recv(_RECV_CHUNK)
        if not chunk:
            return None
        buffer.extend(chunk)
    out = bytes(buffer[:n])
    del buffer[:n]
    return out


class WebSocketIO:
    """Minimal RFC 6455 framing over a connected socket.

    Covers what the play client and tests need: the HTTP upgrade handshake,
    single-message and fragmented payloads, ping/pong, close. Client-sent
    frames are unmasked on arrival; mask=True masks outgoing frames (a
    client obligation).
    """

    def __init__(self, sock: socket.socket, initial: bytes = b""):
        self.sock = sock
        self._buf = bytearray(initial)

    def _read(self, n: int) -> bytes | None:
        return _recv_exact(self.sock, n, self._buf)

    def _read_headers(self) -> tuple[str, dict[str, str]] | None:
        while b"\r\n\r\n" not in self._buf:
            chunk = self.sock.recv(_RECV_CHUNK)
            if not chunk:
                return None
            self._buf.extend(chunk)
            if len(self._buf) > 65536:
                return None
        raw, _, rest = bytes(self._buf).partition(b"\r\n\r\n")
        self._buf = bytearray(rest)
        lines = raw.decode("latin-1").split("\r\n")
        headers = {}
        for line in lines[1:]:
            key, _, value = line.partition(":")
            headers[key.strip().lower()] = value.strip()
        return lines[0], headers

    @staticmethod
    def _accept_key(key: str) -> str:
        digest = hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()
        return base64.b64encode(digest).decode("ascii")

    def server_handshake(self) -> bool:
        parsed = self._read_headers()
        if parsed is None:
            return False
        request, headers = parsed
        key = headers.get("sec-websocket-key")
        if not request.startswith("GET ") or key is None \
                or "websocket" not in headers.get("upgrade", "").lower():
            self.sock.sendall(b"HTTP/1.1 400 Bad Request\r\n"
                              b"Content-Length: 0\r\n\r\n")
            return False
        response = ("HTTP/1.1 101 Switching Protocols\r\n"
                    "Upgrade: websocket\r\n"
                    "Connection: Upgrade\r\n"
                    f"Sec-WebSocket-Accept: {self._accept_key(key)}\r\n\r\n")
        self.sock.sendall(response.encode("ascii"))
        return True

    def client_handshake(self, host: str, path: str = "/") -> None:
        key = base64.b64encode(secrets.token_bytes(16)).decode("ascii")
        request = (f"GET {path} HTTP/1.1\r\n"
                   f"Host: {host}\r\n"
                   "Upgrade: websocket\r\n"
                   "Connection: Upgrade\r\n"
                   f"Sec-WebSocket-Key: {key}\r\n"
                   "Sec-WebSocket-Version: 13\r\n\r\n")
        self.sock.sendall(request.encode("ascii"))
        parsed = self._read_headers()
        if parsed is None:
            raise ConnectionError("server closed during websocket handshake")
        status, headers = parsed
        if " 101 " not in f"{status} ":
            raise ConnectionError(f"websocket upgrade refused: {status}")
        if headers.get("sec-websocket-accept") != self._accept_key(key):
            raise ConnectionError("websocket accept key mismatch")

    def _read_frame(self) -> tuple[int, bool, bytes] | None:
        head = self._read(2)
        if head is None:
            return None
        fin = bool(head[0] & 0x80)
        opcode = head[0] & 0x0F
        masked = bool(head[1] & 0x80)
        length = head[1] & 0x7F
        if length == 126:
            ext = self._read(2)
            if ext is None:
                return None
            (length,) = struct.unpack(">H", ext)
        elif length == 127:
            ext = self._read(8)
            if ext is None:
                return None
            (length,) = struct.unpack(">Q", ext)
        mask = b""
        if masked:
            mask = self._read(4)
            if mask is None:
                return None
        payload = self._read(length) if length else b""
        if payload is None:
            return None
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        return opcode, fin, payload

    def recv_payload(self) -> bytes | None:
        """The next data message, reassembled; None once the peer is gone."""
        assembled = bytearray()
        while True:
            frame = self._read_frame()
            if frame is None:
                return None
            opcode, fin, payload = frame
            if opcode == 0x8:  # close
                try:
                    self.send_raw(0x8, payload[:2])
                except OSError:
                    pass
                return None
            if opcode == 0x9:  # ping
                self.send_raw(0xA, payload)
                continue
            if opcode == 0xA:  # pong
                continue
            if opcode in (0x1, 0x2) or (opcode == 0x0 and assembled):
                assembled.extend(payload)
                if fin:
                    return bytes(assembled)
                continue
            return None  # protocol violation: unexpected opcode

    def send_raw(self, opcode: int, payload: bytes, mask: bool = False) -> None:
        head = bytearray([0x80 | opcode])
        length = len(payload)
        if length < 126:
            head.append((0x80 if mask else 0) | length)
        elif length < 65536:
            head.append((0x80 if mask else 0) | 126)
            head.extend(struct.pack(">H", length))
        else:
            head.append((0x80 if mask else 0) | 127)
            head.extend(struct.pack(">Q", length))
        if mask:
            key = secrets.token_bytes(4)
            head.extend(key)
            payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
        self.sock.sendall(bytes(head) + payload)

    def send_payload(self, data: bytes, mask: bool = False) -> None:
        self.send_raw(0x2, data, mask=mask)

    def close(self) -> None:
        try:
            self.send_raw(0x8, b"")
        except OSError:
            pass


class _TcpTransport:
    """Raw stream of binary-transport frames."""

    binary = True

    def __init__(self, sock: socket.socket, initial: bytes = b""):
        self.sock = sock
        self._splitter = FrameSplitter()
        self._ready = list(self._splitter.feed(initial))

    def recv_frame(self) -> bytes | None:
        while not self._ready:
            chunk = self.sock.recv(_RECV_CHUNK)
            if not chunk:
                return None
            self._ready.extend(self._splitter.feed(chunk))
        return self._ready.pop(0)

    def send_frame(self, frame: bytes) -> None:
        self.sock.sendall(frame)

    def goodbye(self) -> None:
        pass


class _WsTransport:
    """One text-transport frame per WebSocket message."""

    binary = False

    def __init__(self, ws: WebSocketIO):
        self.ws = ws

    def recv_frame(self) -> bytes | None:
        return self.ws.recv_payload()

    def send_frame(self, frame: bytes) -> None:
        self.ws.send_payload(frame)

    def goodbye(self) -> None:
        self.ws.close()


def _world_summary(world) -> dict:
    """Top-down map data for the play client: footprints plus agent pose."""
    bodies = []
    for body in world.bodies:
        if body.removed or body.is_agent:
            continue
        bodies.append({
            "name": body.name,
            "kind": body.entry.kind,
            "x": body.position[0], "y": body.position[1], "z": body.position[2],
            "yaw": body.yaw,
            "sx": body.size[0], "sy": body.size[1], "sz": body.size[2],
            "color": [int(c) for c in body.color],
            "transparent": body.name in TRANSPARENT_NAMES,
        })
    agent = world.agent
    return {
        "arena_size": ARENA_SIZE,
        "bodies": bodies,
        "agent": {"x": agent.position[0], "y": agent.position[1],
                  "z": agent.position[2], "yaw": agent.yaw},
    }


def _bundle(obs, summary: dict | None) -> dict:
    out = {
        "arena": obs.arena,
        "step": obs.step,
        "shape": list(obs.pixels.shape),
        "pixels": obs.pixels.tobytes(),
        "velocity": [float(v) for v in obs.velocity],
        "reward": float(obs.reward),
        "score": float(obs.score),
        "done": obs.done,
        "info": {"cause": obs.cause, "step": obs.step,
                 "lights_on": obs.lights_on},
    }
    if summary is not None:
        out["summary"] = summary
    return out


class _Session:
    """State machine for one connection: hello, configure, reset/step loop."""

    def __init__(self, transport, session_id: str, full: bool):
        self.transport = transport
        self.session_id = session_id
        self.full = full
        self.greeted = False
        self.resolution = 84
        self.seed = 0
        self.play = False
        self.env: Environment | None = None

    def run(self) -> None:
        try:
            while True:
                frame = self.transport.recv_frame()
                if frame is None:
                    return
                try:
                    msg = decode_message(frame, binary=self.transport.binary)
                except ProtocolError as exc:
                    self._send(Message("error", {"code": exc.code,
                                                 "message": str(exc)}))
                    return
                try:
                    for reply in self._handle(msg):
                        self._send(reply)
                except _Closed:
                    return
        except (ProtocolError, OSError):
            return

    def _send(self, msg: Message) -> None:
        self.transport.send_frame(encode_message(msg,
                                                 binary=self.transport.binary))

    def _error(self, code: str, message: str) -> list[Message]:
        return [Message("error", {"code": code, "message": message})]

    def _fatal(self, code: str, message: str) -> list[Message]:
        self._send(Message("error", {"code": code, "message": message}))
        raise _Closed

    def _handle(self, msg: Message) -> list[Message]:
        if self.full:
            return self._fatal("server-full", "session limit reached")
        if msg.type == "bye":
            self._send(Message("bye"))
            self.transport.goodbye()
            raise _Closed
        if msg.type == "hello":
            return self._hello(msg)
        if not self.greeted:
            return self._fatal("not-greeted", "hello must come first")
        if msg.type == "configure":
            return self._configure(msg)
        if msg.type == "reset":
            return self._reset(msg)
        if msg.type == "step":
            return self._step(msg)
        return self._error("unexpected-type",
                           f"server does not accept {msg.type} messages")

    def _hello(self, msg: Message) -> list[Message]:
        if self.greeted:
            return self._error("already-greeted", "hello already exchanged")
        version = msg.data.get("protocol")
        if version != PROTOCOL_VERSION:
            return self._fatal(
                "version-mismatch",
                f"server speaks {PROTOCOL_VERSION}, client sent {version!r}")
        resolution = msg.data.get("resolution", 84)
        seed = msg.data.get("seed", 0)
        if not isinstance(resolution, int) or not 4 <= resolution <= 512:
            return self._fatal("bad-hello",
                               f"resolution {resolution!r} outside [4, 512]")
        if not isinstance(seed, int):
            return self._fatal("bad-hello", f"seed {seed!r} is not an integer")
        self.greeted = True
        self.resolution = resolution
        self.seed = seed
        self.play = bool(msg.data.get("play", False))
        return [Message("hello", {"ack": True, "protocol": PROTOCOL_VERSION,
                                  "resolution": resolution, "seed": seed},
                        session=self.session_id)]

    def _configure(self, msg: Message) -> list[Message]:
        text = msg.data.get("config")
        if not isinstance(text, str):
            return self._error("bad-config", "configure needs a config string")
        try:
            doc = parse_config(text)
            self.env = Environment(doc, seed=self.seed,
                                   resolution=self.resolution)
        except (ParseError, ValueError) as exc:
            # the previous environment, if any, stays live
            return self._error("bad-config", str(exc))
        return [Message("configure",
                        {"ok": True, "arenas": sorted(self.env.sessions)})]

    def _observation(self, observations: dict) -> Message:
        arenas = []
        for index in sorted(observations):
            summary = None
            if self.play:
                summary = _world_summary(self.env.sessions[index].world)
            arenas.append(_bundle(observations[index], summary))
        return Message("observation", {"arenas": arenas})

    def _reset(self, msg: Message) -> list[Message]:
        if self.env is None:
            return self._error("not-configured", "configure must come first")
        seed = msg.data.get("seed")
        if seed is not None and not isinstance(seed, int):
            return self._error("bad-reset", f"seed {seed!r} is not an integer")
        if seed is not None:
            self.seed = seed
        return [self._observation(self.env.reset(seed=seed))]

    def _episode_end(self) -> Message:
        scores = {str(i): float(s.score) for i, s in self.env.sessions.items()}
        causes = {str(i): s.cause for i, s in self.env.sessions.items()}
        return Message("episode-end", {"scores": scores, "causes": causes})

    def _step(self, msg: Message) -> list[Message]:
        if self.env is None:
            return self._error("not-configured", "configure must come first")
        if self.env.all_done:
            return self._error("episode-over",
                               "all arenas are done; send reset")
        raw = msg.data.get("actions")
        if not isinstance(raw, dict):
            return self._error("invalid-action",
                               "step needs an actions object")
        actions: dict[int, tuple[int, int]] = {}
        for key, value in raw.items():
            try:
                index = int(key)
                m, r = int(value[0]), int(value[1])
            except (TypeError, ValueError, IndexError):
                return self._error("invalid-action",
                                   f"malformed action for arena {key!r}")
            if m not in (0, 1, 2) or r not in (0, 1, 2):
                return self._error("invalid-action",
                                   f"action ({m}, {r}) outside the 3x3 space")
            actions[index] = (m, r)
        unknown = set(actions) - set(self.env.sessions)
        if unknown:
            return self._error("invalid-action",
                               f"unknown arena(s): {sorted(unknown)}")
        live = {i for i, s in self.env.sessions.items() if not s.done}
        missing = live - set(actions)
        if missing:
            return self._error("invalid-action",
                               f"missing action for live arena(s): "
                               f"{sorted(missing)}")
        observations = self.env.step(actions)
        replies = [self._observation(observations)]
        if self.env.all_done:
            replies.append(self._episode_end())
        return replies


class Server:
    """Accepts connections on one port and runs a worker thread per session."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0,
                 max_sessions: int = 32):
        self.host = host
        self.requested_port = port
        self.max_sessions = max_sessions
        self._listener: socket.socket | None = None
        self._threads: list[threading.Thread] = []
        self._clients: set[socket.socket] = set()
        self._lock = threading.Lock()
        self._active = 0
        self._counter = 0
        self._stopping = False

    @property
    def port(self) -> int:
        return self._listener.getsockname()[1]

    def start(self) -> "Server":
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((self.host, self.requested_port))
        self._listener.listen(16)
        acceptor = threading.Thread(target=self._accept_loop,
                                    name="aaip-accept", daemon=True)
        acceptor.start()
        self._threads.append(acceptor)
        return self

    def __enter__(self) -> "Server":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def stop(self) -> None:
        self._stopping = True
        if self._listener is not None:
            try:
                # close() alone leaves a blocked accept() sleeping
                self._listener.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                self._listener.close()
            except OSError:
                pass
        with self._lock:
            clients = list(self._clients)
        for sock in clients:
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                sock.close()
            except OSError:
                pass
        for thread in self._threads:
            thread.join(timeout=5)

    def _accept_loop(self) -> None:
        while not self._stopping:
            try:
                sock, _ = self._listener.accept()
            except OSError:
                return
            with self._lock:
                self._counter += 1
                session_id = f"s-{self._counter}"
                full = self._active >= self.max_sessions
                if not full:
                    self._active += 1
                self._clients.add(sock)
            worker = threading.Thread(
                target=self._serve_connection, args=(sock, session_id, full),
                name=f"aaip-{session_id}", daemon=True)
            worker.start()
            self._threads.append(worker)

    def _serve_connection(self, sock: socket.socket, session_id: str,
                          full: bool) -> None:
        try:
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            buffer = bytearray()
            first = _recv_exact(sock, 4, buffer)
            if first is None:
                return
            initial = first + bytes(buffer)
            if first == b"GET ":
                ws = WebSocketIO(sock, initial)
                if not ws.server_handshake():
                    return
                transport = _WsTransport(ws)
            else:
                transport = _TcpTransport(sock, initial)
            _Session(transport, session_id, full).run()
        except OSError:
            pass
        finally:
            with self._lock:
                self._clients.discard(sock)
                if not full:
                    self._active -= 1
            try:
                sock.close()
            except OSError:
                pass


def serve(port: int, host: str = "127.0.0.1", max_sessions: int = 32) -> None:
    """Blocking entry point used by the CLI; runs until interrupted."""
    server = Server(host=host, port=port, max_sessions=max_sessions).start()
    print(f"AAIP/1 server listening on {host}:{server.port} "
          f"(raw TCP and WebSocket)")
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()


class ProtocolClient:
    """Raw-TCP client for the session server: hello, configure, reset, step.

    Helper for tests, the remote-environment use case and scripted drivers.
    recv() returns the next message; the step/reset helpers return the
    observation payload and stash any trailing episode-end message.
    """

    def __init__(self, host: str, port: int, resolution: int = 84,
                 seed: int = 0, play: bool = False):
        self.sock = socket.create_connection((host, port), timeout=30)
        self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._transport = _TcpTransport(self.sock)
        self.episode_end: dict | None = None
        ack = self.request(Message("hello", {
            "protocol": PROTOCOL_VERSION, "resolution": resolution,
            "seed": seed, "play": play}))
        if ack.type != "hello" or not ack.data.get("ack"):
            raise ConnectionError(f"handshake failed: {ack.type} {ack.data}")
        self.session = ack.session

    def send(self, msg: Message) -> None:
        self._transport.send_frame(encode_message(msg, binary=True))

    def recv(self) -> Message:
        frame = self._transport.recv_frame()
        if frame is None:
            raise ConnectionError("server closed the connection")
        return decode_message(frame, binary=True)

    def request(self, msg: Message) -> Message:
        self.send(msg)
        return self.recv()

    def configure(self, config_text: str) -> Message:
        reply = self.request(Message("configure", {"config": config_text}))
        if reply.type == "error":
            raise ValueError(f"{reply.data.get('code')}: "
                             f"{reply.data.get('message')}")
        return reply

    def reset(self, seed: int | None = None) -> dict:
        data = {} if seed is None else {"seed": seed}
        self.episode_end = None
        reply = self.request(Message("reset", data))
        if reply.type != "observation":
            raise ValueError(f"reset answered with {reply.type}: {reply.data}")
        return reply.data

    def step(self, actions: dict[int, tuple[int, int]]) -> dict:
        payload = {"actions": {str(i): [int(m), int(r)]
                               for i, (m, r) in actions.items()}}
        reply = self.request(Message("step", payload))
        if reply.type != "observation":
            raise ValueError(f"step answered with {reply.type}: {reply.data}")
        if any(bundle["done"] for bundle in reply.data["arenas"]):
            if all(bundle["done"] for bundle in reply.data["arenas"]):
                tail = self.recv()
                if tail.type == "episode-end":
                    self.episode_end = tail.data
        return reply.data

    def close(self) -> None:
        try:
            self.send(Message("bye"))
            self.recv()
        except (OSError, ConnectionError):
            pass
        try:
            self.sock.close()
        except OSError:
            pass
