"""Newline-delimited JSON TCP protocol between an agent server and an
environment client.

Every message is one UTF-8 JSON line. Messages are discriminated by their
fields:

  Hello  {"sensor_dim": int, "actuator_dim": int, "actions": [int...],
          "protocol_version": int}
  Obs    {"sensor": [num...], "actuator": [num...], "reward": num,
          "done": bool, "step": int}
  Act    {"action_index": int, "actuator": [num...]}
  Bye    {"reason": str}

The client opens with Hello; the server replies with a Hello ack; thereafter
the session is strict lockstep, exactly one Act per Obs. ``action_index`` is
the index into the Hello ``actions`` array. done=true resets the agent's
episode state; the next Obs starts a new episode. A malformed line, a version
mismatch, or a dimension mismatch gets a Bye and the connection closes.
"""

from __future__ import annotations

import json
import math
import socket
import threading
from typing import Callable, Optional, Sequence

from .agent import ActionOutput, Agent, StepInput, action_index_of
from .errors import ProtocolError

PROTOCOL_VERSION = 1
DEFAULT_PORT = 7878
IDLE_TIMEOUT = 60.0


def _send(wfile, message: dict) -> None:
    wfile.write(json.dumps(message, separators=(",", ":")) + "\n")
    wfile.flush()


def classify(message: dict) -> str:
    if "sensor" in message:
        return "obs"
    if "sensor_dim" in message:
        return "hello"
    if "action_index" in message:
        return "act"
    if "reason" in message:
        return "bye"
    raise ProtocolError(f"unclassifiable message with keys {sorted(message)}")


def _check_vector(vec, dim: int, what: str) -> list[float]:
    if not isinstance(vec, list) or len(vec) != dim:
        raise ProtocolError(f"{what} must be a {dim}-element array")
    out = []
    for x in vec:
        if not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ProtocolError(f"{what} contains a non-finite value")
        out.append(float(x))
    return out


class Server:
    """Agent-side server: accepts one client at a time, strict lockstep."""

    def __init__(self, agent_factory: Callable[[int, int, list], Agent], *,
                 host: str = "127.0.0.1", port: int = DEFAULT_PORT,
                 idle_timeout: float = IDLE_TIMEOUT, snapshot_path=None):
        self.agent_factory = agent_factory
        self.idle_timeout = idle_timeout
        self.snapshot_path = snapshot_path
        self.agent: Optional[Agent] = None
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(1)
        self.address = self._sock.getsockname()

    @property
    def port(self) -> int:
        return self.address[1]

    def serve(self, sessions: Optional[int] = 1) -> None:
        """Handle ``sessions`` sequential client sessions (None: loop forever)."""
        try:
            remaining = sessions
            while remaining is None or remaining > 0:
                conn, _ = self._sock.accept()
                try:
                    self._handle(conn)
                finally:
                    conn.close()
                    if self.snapshot_path is not None and self.agent is not None:
                        self.agent.save(self.snapshot_path)
                if remaining is not None:
                    remaining -= 1
        finally:
            self._sock.close()

    def close(self) -> None:
        self._sock.close()

    def _handle(self, conn: socket.socket) -> None:
        conn.settimeout(self.idle_timeout)
        rfile = conn.makefile("r", encoding="utf-8", newline="\n")
        wfile = conn.makefile("w", encoding="utf-8", newline="\n")
        hello = None
        try:
            line = rfile.readline()
            if not line:
                return
            try:
                hello = json.loads(line)
                if classify(hello) != "hello":
                    raise ProtocolError("expected Hello")
            except (ValueError, ProtocolError):
                _send(wfile, {"reason": "protocol error"})
                return
            if hello.get("protocol_version") != PROTOCOL_VERSION:
                _send(wfile, {"reason": "version"})
                return
            sensor_dim = int(hello["sensor_dim"])
            actuator_dim = int(hello["actuator_dim"])
            actions = list(hello["actions"])
            if sensor_dim < 1 or actuator_dim < 1 or not actions:
                _send(wfile, {"reason": "protocol error"})
                return
            if self.agent is None:
                self.agent = self.agent_factory(sensor_dim, actuator_dim, actions)
            _send(wfile, {"sensor_dim": sensor_dim, "actuator_dim": actuator_dim,
                          "actions": actions, "protocol_version": PROTOCOL_VERSION})
            action_values = self.agent.actions
            while True:
                try:
                    line = rfile.readline()
                except socket.timeout:
                    return
                if not line:
                    return
                try:
                    message = json.loads(line)
                    kind = classify(message)
                except (ValueError, ProtocolError):
                    _send(wfile, {"reason": "protocol error"})
                    return
                if kind == "bye":
                    return
                if kind != "obs":
                    _send(wfile, {"reason": "protocol error"})
                    return
                try:
                    sensor = _check_vector(message["sensor"], sensor_dim, "sensor")
                    actuator = _check_vector(message["actuator"], actuator_dim,
                                             "actuator")
                    reward = float(message["reward"])
                    done = bool(message["done"])
                    if not math.isfinite(reward):
                        raise ProtocolError("reward must be finite")
                except (KeyError, TypeError, ProtocolError):
                    _send(wfile, {"reason": "protocol error"})
                    return
                out = self.agent.step(StepInput(sensor, actuator, reward, done))
                _send(wfile, {"action_index": action_index_of(out.actuator,
                                                              action_values),
                              "actuator": list(out.actuator)})
        finally:
            try:
                wfile.close()
                rfile.close()
            except OSError:
                pass


def serve(agent_factory, *, host: str = "127.0.0.1", port: int = DEFAULT_PORT,
          sessions: Optional[int] = 1, snapshot_path=None,
          idle_timeout: float = IDLE_TIMEOUT,
          ready: Optional[threading.Event] = None,
          server_box: Optional[list] = None) -> None:
    """Bind and serve; ``ready`` is set once the socket is listening."""
    server = Server(agent_factory, host=host, port=port,
                    idle_timeout=idle_timeout, snapshot_path=snapshot_path)
    if server_box is not None:
        server_box.append(server)
    if ready is not None:
        ready.set()
    server.serve(sessions)


class Client:
    """Environment-side client: Hello handshake, then Obs -> Act lockstep."""

    def __init__(self, host: str, port: int, sensor_dim: int, actuator_dim: int,
                 actions: Sequence[int], timeout: float = IDLE_TIMEOUT):
        self.sensor_dim = sensor_dim
        self.actuator_dim = actuator_dim
        self.actions = list(actions)
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._rfile = self._sock.makefile("r", encoding="utf-8", newline="\n")
        self._wfile = self._sock.makefile("w", encoding="utf-8", newline="\n")
        self._step = 0
        _send(self._wfile, {"sensor_dim": sensor_dim, "actuator_dim": actuator_dim,
                            "actions": self.actions,
                            "protocol_version": PROTOCOL_VERSION})
        ack = self._read()
        if classify(ack) == "bye":
            raise ProtocolError(f"server refused session: {ack['reason']}")
        if classify(ack) != "hello":
            raise ProtocolError("expected Hello ack")

    def _read(self) -> dict:
        line = self._rfile.readline()
        if not line:
            raise ProtocolError("server disconnected")
        return json.loads(line)

    def send_obs(self, sensor, actuator, reward: float, done: bool) -> dict:
        """Send one observation and block for the matching Act."""
        _send(self._wfile, {"sensor": [float(x) for x in sensor],
                            "actuator": [float(x) for x in actuator],
                            "reward": float(reward), "done": bool(done),
                            "step": self._step})
        self._step += 1
        reply = self._read()
        kind = classify(reply)
        if kind == "bye":
            raise ProtocolError(f"server closed session: {reply['reason']}")
        if kind != "act":
            raise ProtocolError("expected Act")
        return reply

    def bye(self, reason: str = "done") -> None:
        try:
            _send(self._wfile, {"reason": reason})
        except OSError:
            pass

    def close(self) -> None:
        try:
            self._wfile.close()
            self._rfile.close()
        except OSError:
            pass
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.bye()
        self.close()


class RemoteStepper:
    """Adapter giving a netio Client the in-process stepping interface."""

    def __init__(self, client: Client):
        self.client = client

    def step(self, inp: StepInput) -> ActionOutput:
        reply = self.client.send_obs(inp.sensor, inp.actuator, inp.reward, inp.done)
        return ActionOutput([float(x) for x in reply["actuator"]], None, False, False)


def run_env_client(host: str, port: int, env, episodes: int, *,
                   record_actions: bool = False) -> list:
    """Drive a remote agent server with a local environment."""
    from .experiment import action_values_of, run_episode

    action_values = action_values_of(env)
    results = []
    with Client(host, port, env.OBSERVATION_DIM, 1,
                list(env.ACTIONS)) as client:
        stepper = RemoteStepper(client)
        for _ in range(episodes):
            results.append(run_episode(env, stepper, action_values,
                                       record_actions=record_actions))
    return results
