"""Scripted action drivers: null, random, pixel-greedy, and remote.

Every driver maps an Observation to one (m, r) action in the 3x3 space.
The remote driver forwards observations over AAIP/1 to an external action
service and returns whatever action comes back; AgentService is the matching
server wrapper so any local driver can be exposed on a port.
"""

from __future__ import annotations

import socket
import threading

import numpy as np
from scipy import ndimage

from .episode import Observation
from .protocol import (PROTOCOL_VERSION, FrameSplitter, Message,
                       ProtocolError, decode_message, encode_message)
from .seeding import rng_for

Action = tuple[int, int]


class NullAgent:
    """Always (0, 0): the do-nothing baseline."""

    def reset(self) -> None:
        pass

    def act(self, obs: Observation) -> Action:
        return (0, 0)


class RandomAgent:
    """Uniform over the 9 actions, reproducible from its seed."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.rng = rng_for("agent-random", seed)

    def reset(self) -> None:
        pass

    def act(self, obs: Observation) -> Action:
        return (self.rng.randrange(3), self.rng.randrange(3))


# Mask thresholds, on lit renderer output (lambert factor >= 0.35):
# green spheres keep g far above both other channels; gold keeps a warm
# r > g > b ladder with g still close to r (which excludes the orange hot
# zone decal and wood tones); "red" means r dominates both g and b by 2x
# (bad goals and death zone decals, but not hot zones).
_TURN_DEADBAND = 0.06
_RED_PANIC_FRACTION = 0.02


def _channels(pixels: np.ndarray):
    p = pixels.astype(np.int16)
    return p[..., 0], p[..., 1], p[..., 2]


def _largest_blob_cx(mask: np.ndarray) -> tuple[float, int]:
    """Centroid column and pixel count of the biggest connected region."""
    labels, count = ndimage.label(mask)
    if count == 0:
        return 0.0, 0
    sizes = ndimage.sum_labels(mask, labels, index=range(1, count + 1))
    best = int(np.argmax(sizes)) + 1
    _, cx = ndimage.center_of_mass(mask, labels, best)
    return float(cx), int(sizes[best - 1])


class GreedyAgent:
    """Steer toward the largest green/gold blob; veer around dominant red.

    With no food in sight it sweeps a forward arc, which eventually scans
    the whole arena. Purely reactive and deterministic.
    """

    def reset(self) -> None:
        pass

    def act(self, obs: Observation) -> Action:
        r, g, b = _channels(obs.pixels)
        k = obs.pixels.shape[0]
        mid = (k - 1) / 2.0
        green = (g > 70) & (g - r > 50) & (g - b > 50)
        gold = (r - g > 10) & (g - b > 60) & (b < 80) & (4 * g > 3 * r)
        red = (r > 60) & (2 * g < r) & (2 * b < r)

        target = green | gold
        red_cx, red_size = _largest_blob_cx(red)
        red_dominant = red_size > _RED_PANIC_FRACTION * k * k

        if target.any():
            cx, size = _largest_blob_cx(target)
            if red_dominant and red_size > size and abs(red_cx - cx) < k / 8:
                # food sits behind a bigger red blob: swing around it
                return (1, 1 if cx >= red_cx else 2)
            dx = (cx - mid) / k
            if dx > _TURN_DEADBAND:
                return (1, 1)
            if dx < -_TURN_DEADBAND:
                return (1, 2)
            return (1, 0)
        if red_dominant and abs(red_cx - mid) < k / 6.0:
            # nothing worth chasing and red dead ahead: turn away from it
            return (1, 1 if red_cx < mid else 2)
        return (1, 1)  # search arc


class RemoteAgent:
    """Forwards observations to an action service at HOST:PORT over AAIP/1.

    Conversation, all binary-transport frames: hello/ack once, then one
    observation -> step exchange per action; reset and bye pass through.
    """

    def __init__(self, address: str, timeout: float = 30.0):
        host, _, port = address.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"remote address {address!r} is not HOST:PORT")
        try:
            self.sock = socket.create_connection((host, int(port)),
                                                 timeout=timeout)
        except OSError as exc:
            raise ConnectionError(
                f"remote agent at {address} unreachable: {exc}")
        self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._splitter = FrameSplitter()
        self._frames: list[bytes] = []
        ack = self._request(Message("hello", {"protocol": PROTOCOL_VERSION,
                                              "role": "agent"}))
        if ack.type != "hello" or not ack.data.get("ack"):
            raise ConnectionError(f"agent service refused hello: {ack.type}")

    def _request(self, msg: Message) -> Message:
        self.sock.sendall(encode_message(msg, binary=True))
        while not self._frames:
            chunk = self.sock.recv(65536)
            if not chunk:
                raise ConnectionError("agent service closed the connection")
            self._frames.extend(self._splitter.feed(chunk))
        return decode_message(self._frames.pop(0), binary=True)

    def reset(self) -> None:
        reply = self._request(Message("reset"))
        if reply.type != "reset":
            raise ConnectionError(f"agent service broke lockstep: {reply.type}")

    def act(self, obs: Observation) -> Action:
        payload = {"arenas": [{
            "arena": obs.arena, "step": obs.step,
            "shape": list(obs.pixels.shape), "pixels": obs.pixels.tobytes(),
            "velocity": [float(v) for v in obs.velocity],
            "reward": float(obs.reward), "score": float(obs.score),
            "done": obs.done,
            "info": {"cause": obs.cause, "step": obs.step,
                     "lights_on": obs.lights_on},
        }]}
        reply = self._request(Message("observation", payload))
        if reply.type != "step":
            raise ConnectionError(f"agent service broke lockstep: {reply.type}")
        m, r = reply.data["actions"][str(obs.arena)]
        return (int(m), int(r))

    def close(self) -> None:
        try:
            self.sock.sendall(encode_message(Message("bye"), binary=True))
        except OSError:
            pass
        self.sock.close()


class AgentService:
    """Exposes a local driver as a remote action service for RemoteAgent."""

    def __init__(self, agent, host: str = "127.0.0.1", port: int = 0):
        self.agent = agent
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(4)
        self._threads: list[threading.Thread] = []
        self._stopping = False

    @property
    def port(self) -> int:
        return self._listener.getsockname()[1]

    def start(self) -> "AgentService":
        acceptor = threading.Thread(target=self._accept_loop,
                                    name="agent-service", daemon=True)
        acceptor.start()
        self._threads.append(acceptor)
        return self

    def __enter__(self) -> "AgentService":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def stop(self) -> None:
        self._stopping = True
        try:
            self._listener.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._listener.close()
        for thread in self._threads:
            thread.join(timeout=5)

    def _accept_loop(self) -> None:
        while not self._stopping:
            try:
                sock, _ = self._listener.accept()
            except OSError:
                return
            worker = threading.Thread(target=self._serve, args=(sock,),
                                      daemon=True)
            worker.start()
            self._threads.append(worker)

    def _serve(self, sock: socket.socket) -> None:
        splitter = FrameSplitter()
        frames: list[bytes] = []

        def send(msg: Message) -> None:
            sock.sendall(encode_message(msg, binary=True))

        try:
            while True:
                while not frames:
                    chunk = sock.recv(65536)
                    if not chunk:
                        return
                    frames.extend(splitter.feed(chunk))
                msg = decode_message(frames.pop(0), binary=True)
                if msg.type == "hello":
                    send(Message("hello", {"ack": True,
                                           "protocol": PROTOCOL_VERSION}))
                elif msg.type == "reset":
                    self.agent.reset()
                    send(Message("reset"))
                elif msg.type == "observation":
                    actions = {}
                    for bundle in msg.data["arenas"]:
                        pixels = np.frombuffer(
                            bundle["pixels"], dtype=np.uint8,
                        ).reshape(bundle["shape"])
                        obs = Observation(
                            arena=bundle["arena"], step=bundle["step"],
                            pixels=pixels,
                            velocity=tuple(bundle["velocity"]),
                            reward=bundle["reward"], score=bundle["score"],
                            done=bundle["done"],
                            cause=bundle["info"]["cause"],
                            lights_on=bundle["info"]["lights_on"])
                        m, r = self.agent.act(obs)
                        actions[str(bundle["arena"])] = [int(m), int(r)]
                    send(Message("step", {"actions": actions}))
                elif msg.type == "bye":
                    send(Message("bye"))
                    return
                else:
                    send(Message("error", {"code": "unexpected-type",
                                           "message": msg.type}))
        except (ProtocolError, OSError):
            return
        finally:
            sock.close()


def make_agent(spec: str, seed: int = 0):
    """Build a driver from its CLI name: null, random, greedy, remote:H:P."""
    if spec == "null":
        return NullAgent()
    if spec == "random":
        return RandomAgent(seed)
    if spec == "greedy":
        return GreedyAgent()
    if spec.startswith("remote:"):
        return RemoteAgent(spec[len("remote:"):])
    raise ValueError(f"unknown agent {spec!r}; "
                     "expected null, random, greedy or remote:HOST:PORT")
