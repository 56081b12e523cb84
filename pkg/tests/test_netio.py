import json
import socket
import threading

import pytest

from hypercol import netio
from hypercol.agent import Agent, AgentConfig, Layer2Params, LayerParams, SurpriseParams
from hypercol.envs import make_env
from hypercol.errors import ProtocolError


def agent_factory(sensor_dim, actuator_dim, actions):
    config = AgentConfig(p=4, m=2, unique_limit=5, clusters=4,
                         layer1=LayerParams(threshold=10, decay=0.9, memory=4),
                         layer2=Layer2Params(threshold=2, decay=0.8, memory=6),
                         surprise=SurpriseParams(threshold=2.0),
                         epsilon=0.05, seed=5)
    return Agent(config, sensor_dim, actuator_dim, [[float(a)] for a in actions])


def start_server(**kw):
    ready = threading.Event()
    box = []
    thread = threading.Thread(
        target=netio.serve,
        kwargs=dict(agent_factory=agent_factory, port=0, ready=ready,
                    server_box=box, sessions=1, **kw),
        daemon=True)
    thread.start()
    assert ready.wait(5)
    return box[0], thread


def raw_lines(port, lines, timeout=5.0):
    """Send raw lines and collect replies until the server closes."""
    with socket.create_connection(("127.0.0.1", port), timeout=timeout) as sock:
        wfile = sock.makefile("w", encoding="utf-8", newline="\n")
        rfile = sock.makefile("r", encoding="utf-8", newline="\n")
        replies = []
        for line in lines:
            wfile.write(line + "\n")
            wfile.flush()
            reply = rfile.readline()
            if not reply:
                break
            replies.append(json.loads(reply))
        return replies


def hello_line(sensor_dim=8, actuator_dim=1, actions=(0, 1, 2), version=1):
    return json.dumps({"sensor_dim": sensor_dim, "actuator_dim": actuator_dim,
                       "actions": list(actions), "protocol_version": version})


def test_handshake_then_lockstep_acts():
    server, thread = start_server()
    obs = {"sensor": [3, 4, 0, 2, 7, 9, 0, 0], "actuator": [1], "reward": 0,
           "done": False, "step": 17}
    replies = raw_lines(server.port, [hello_line(), json.dumps(obs)])
    assert replies[0]["protocol_version"] == 1
    act = replies[1]
    assert act["action_index"] in (0, 1, 2)
    assert isinstance(act["actuator"], list) and len(act["actuator"]) == 1
    thread.join(5)


def test_thousand_obs_thousand_acts_in_order():
    server, thread = start_server()
    with netio.Client("127.0.0.1", server.port, 8, 1, [0, 1, 2]) as client:
        for step in range(1000):
            reply = client.send_obs([step % 7] * 8, [step % 3], 0.0, False)
            assert reply["action_index"] in (0, 1, 2)
    thread.join(5)


def test_garbage_line_gets_bye():
    server, thread = start_server()
    replies = raw_lines(server.port, [hello_line(), "xyz"])
    assert replies[-1] == {"reason": "protocol error"}
    thread.join(5)


def test_version_mismatch_gets_bye():
    server, thread = start_server()
    replies = raw_lines(server.port, [hello_line(version=99)])
    assert replies[-1] == {"reason": "version"}
    thread.join(5)


def test_dimension_mismatch_gets_bye():
    server, thread = start_server()
    obs = {"sensor": [1, 2, 3], "actuator": [1], "reward": 0,
           "done": False, "step": 0}
    replies = raw_lines(server.port, [hello_line(sensor_dim=8), json.dumps(obs)])
    assert replies[-1] == {"reason": "protocol error"}
    thread.join(5)


def test_nonfinite_numbers_rejected():
    server, thread = start_server()
    obs = '{"sensor": [1,2,3,4,5,6,7,NaN], "actuator": [1], "reward": 0, "done": false, "step": 0}'
    replies = raw_lines(server.port, [hello_line(), obs])
    assert replies[-1] == {"reason": "protocol error"}
    thread.join(5)


def test_obs_schema_roundtrip_exact():
    line = ('{"sensor":[3,4,0,2,7,9,0,0],"actuator":[1],"reward":0,'
            '"done":false,"step":17}')
    message = json.loads(line)
    assert netio.classify(message) == "obs"
    assert message["sensor"] == [3, 4, 0, 2, 7, 9, 0, 0]
    assert message["actuator"] == [1]
    assert message["reward"] == 0 and message["done"] is False
    assert message["step"] == 17


def test_client_reports_server_disconnect():
    server, thread = start_server()
    client = netio.Client("127.0.0.1", server.port, 8, 1, [0, 1, 2])
    server.close()  # kill the listener; active connection dies with the handler
    client.bye()
    client.close()
    thread.join(5)
    # a fresh connect must now fail
    with pytest.raises(OSError):
        netio.Client("127.0.0.1", server.port, 8, 1, [0, 1, 2])


def test_idle_timeout_closes_session():
    server, thread = start_server(idle_timeout=0.3)
    with socket.create_connection(("127.0.0.1", server.port), timeout=5) as sock:
        wfile = sock.makefile("w", encoding="utf-8", newline="\n")
        rfile = sock.makefile("r", encoding="utf-8", newline="\n")
        wfile.write(hello_line() + "\n")
        wfile.flush()
        assert rfile.readline()  # ack
        # stay idle; the server must hang up
        assert rfile.readline() == ""
    thread.join(5)


def test_run_env_client_roundtrip():
    server, thread = start_server()
    env = make_env("catch", seed=3)
    results = netio.run_env_client("127.0.0.1", server.port, env, 4,
                                   record_actions=True)
    assert len(results) == 4
    for r in results:
        assert r.steps == 5
        assert len(r.actions) == 5
    thread.join(5)


def test_transport_transparency_smoke():
    """Local run and loopback run must choose identical actions."""
    from hypercol.experiment import action_values_of, run_episode

    env_local = make_env("catch", seed=7)
    agent = agent_factory(env_local.OBSERVATION_DIM, 1, [0, 1, 2])
    local = [run_episode(env_local, agent, action_values_of(env_local),
                         record_actions=True) for _ in range(3)]

    server, thread = start_server()
    env_remote = make_env("catch", seed=7)
    remote = netio.run_env_client("127.0.0.1", server.port, env_remote, 3,
                                  record_actions=True)
    assert [r.actions for r in local] == [r.actions for r in remote]
    thread.join(5)
