"""Versioned binary snapshots of the full agent state.

Layout: 8-byte magic, little-endian u32 format version, u64 manifest length,
manifest JSON, then the concatenated sections in manifest order. Structured
state is JSON (sorted keys, compact separators, so bytes are reproducible);
centroid matrices are raw little-endian float64 sections. Every section
carries a CRC so truncation and corruption are detected on load.
"""

from __future__ import annotations

import io
import json
import struct
import zlib
from dataclasses import asdict
from typing import BinaryIO, Optional

import numpy as np

from . import basal
from .codebook import Codebook
from .errors import SnapshotError
from .hypercolumn import Layer1Column, Layer2Column
from .parser import Parser
from .thalamus import ActionCoder, SamplingPlan, Thalamus

MAGIC = b"HCOLSNAP"
VERSION = 1


def _json_bytes(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _centroid_section(codebook: Optional[Codebook]) -> tuple[Optional[bytes], Optional[dict]]:
    if codebook is None:
        return None, None
    data = np.ascontiguousarray(codebook.centroids, dtype="<f8").tobytes()
    meta = {"k": codebook.k, "dim": codebook.dim,
            "letter_base": codebook.letter_base, "seed": codebook.seed}
    return data, meta


def _centroids_from(data: bytes, meta: dict) -> Codebook:
    arr = np.frombuffer(data, dtype="<f8").reshape(meta["k"], meta["dim"])
    return Codebook(arr.astype(np.float64), letter_base=meta["letter_base"],
                    seed=meta["seed"])


def _coder_state(coder: ActionCoder) -> dict:
    _, cb_meta = _centroid_section(coder.codebook)
    return {"actuator_dim": coder.actuator_dim, "clusters": coder.clusters,
            "seed": coder.seed, "bootstrap": [list(v) for v in coder.bootstrap],
            "codebook": cb_meta}


def _l1_state(col: Layer1Column) -> dict:
    _, cb_meta = _centroid_section(col.codebook)
    out = None
    if col.last_output is not None:
        pred = col.last_output.prediction
        pred_s = None if pred is None else [pred.next, pred.reward_forecast,
                                            pred.fallback]
        out = {"letter": col.last_output.letter, "prediction": pred_s}
    pcfg = col.parser_config
    return {
        "col_id": col.col_id, "input_indices": list(col.input_indices),
        "unique_limit": col.unique_limit, "clusters": col.clusters,
        "seed": col.seed, "inhibit_unchanged": col.inhibit_unchanged,
        "letter_base": col.letter_base,
        "parser_config": {
            "max_word_len": pcfg.max_word_len, "max_vocab": pcfg.max_vocab,
            "threshold": pcfg.threshold, "decay": pcfg.decay,
            "memory": pcfg.memory, "mode": pcfg.mode,
            "open_alphabet": pcfg.open_alphabet,
        },
        "bootstrap": [list(v) for v in col.bootstrap],
        "codebook": cb_meta,
        "parser": col.parser.state_dict() if col.parser is not None else None,
        "last_letter": col.last_letter, "last_output": out,
    }


def _l2_state(col: Layer2Column) -> dict:
    out = None
    if col.last_output is not None:
        pred = col.last_output.prediction
        pred_s = None if pred is None else [pred.next, pred.reward_forecast,
                                            pred.fallback]
        out = {"prediction": pred_s,
               "feelings": dict(sorted(col.last_output.feelings.items()))}
    return {"col_id": col.col_id, "substrate": list(col.substrate),
            "inhibit_unchanged": col.inhibit_unchanged,
            "parser": col.parser.state_dict(),
            "last_composite": col.last_composite, "last_output": out}


def agent_state(agent) -> dict:
    """Full state as one JSON-able document (centroids inline); lossless."""
    sections = _sections_of(agent)
    doc = {}
    binaries = {}
    for name, payload in sections:
        if isinstance(payload, bytes):
            binaries[name] = payload
        else:
            doc[name] = payload
    # inline the centroid matrices for the text export
    for name, data in binaries.items():
        owner = name.rsplit(".", 1)[0]  # "l1.3.centroids" -> "l1.3"
        meta = doc[owner]["codebook"]
        arr = np.frombuffer(data, dtype="<f8").reshape(meta["k"], meta["dim"])
        meta["centroids"] = [[float(x) for x in row] for row in arr]
    return doc


def _sections_of(agent) -> list[tuple[str, object]]:
    from .agent import Agent  # local import to avoid a cycle

    assert isinstance(agent, Agent)
    meta = {
        "config": asdict(agent.config),
        "sensor_dim": agent.sensor_dim,
        "actuator_dim": agent.actuator_dim,
        "actions": agent.actions,
        "step_count": agent.step_count,
        "last_emitted": agent._last_emitted,
        "pending_inner": agent._pending_inner,
        "parser_order": agent._parser_order,
        "assigned": agent._assigned,
        "next_col_id": agent._next_col_id,
        "explore_rng": agent._explore_rng.bit_generator.state,
        "n_l1": len(agent.l1_columns),
        "n_l2": len(agent.l2_columns),
    }
    surprise = agent.surprise_state
    sections: list[tuple[str, object]] = [
        ("meta", meta),
        ("plan", {"subsets": [list(s) for s in agent.thalamus.plan.subsets],
                  "seed": agent.thalamus.plan.seed}),
        ("action_coder", _coder_state(agent.thalamus.action_coder)),
        ("surprise", {"threshold": surprise.threshold, "margin": surprise.margin,
                      "cooldown_steps": surprise.cooldown_steps,
                      "streak": surprise.streak,
                      "steps_since_inner": surprise.steps_since_inner,
                      "last_sb": surprise.last_sb,
                      "prev_surprised": sorted(surprise.prev_surprised)}),
    ]
    data, _ = _centroid_section(agent.thalamus.action_coder.codebook)
    if data is not None:
        sections.append(("action_coder.centroids", data))
    for i, col in enumerate(agent.l1_columns):
        sections.append((f"l1.{i}", _l1_state(col)))
        data, _ = _centroid_section(col.codebook)
        if data is not None:
            sections.append((f"l1.{i}.centroids", data))
    for i, col in enumerate(agent.l2_columns):
        sections.append((f"l2.{i}", _l2_state(col)))
    return sections


def write_snapshot(agent, sink) -> None:
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "wb") as fh:
            _write(agent, fh)
    else:
        _write(agent, sink)


def _write(agent, fh: BinaryIO) -> None:
    blobs: list[tuple[str, bytes]] = []
    for name, payload in _sections_of(agent):
        blobs.append((name, payload if isinstance(payload, bytes)
                      else _json_bytes(payload)))
    manifest = []
    offset = 0
    for name, data in blobs:
        manifest.append({"name": name, "offset": offset, "length": len(data),
                         "crc32": zlib.crc32(data)})
        offset += len(data)
    mbytes = _json_bytes(manifest)
    fh.write(MAGIC)
    fh.write(struct.pack("<I", VERSION))
    fh.write(struct.pack("<Q", len(mbytes)))
    fh.write(mbytes)
    for _, data in blobs:
        fh.write(data)
    fh.flush()


def read_snapshot(source):
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "rb") as fh:
            return _read(fh)
    return _read(source)


def _read_exact(fh: BinaryIO, n: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise SnapshotError("snapshot is truncated")
    return data


def _read(fh: BinaryIO):
    if _read_exact(fh, len(MAGIC)) != MAGIC:
        raise SnapshotError("not a snapshot file (bad magic)")
    (version,) = struct.unpack("<I", _read_exact(fh, 4))
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    (mlen,) = struct.unpack("<Q", _read_exact(fh, 8))
    try:
        manifest = json.loads(_read_exact(fh, mlen))
    except ValueError as exc:
        raise SnapshotError(f"corrupt manifest: {exc}") from None
    sections: dict[str, bytes] = {}
    for entry in manifest:
        data = _read_exact(fh, entry["length"])
        if zlib.crc32(data) != entry["crc32"]:
            raise SnapshotError(f"section {entry['name']!r} failed its checksum")
        sections[entry["name"]] = data
    return _rebuild(sections)


def _rebuild(sections: dict[str, bytes]):
    from .agent import Agent, AgentConfig, Layer2Params, LayerParams, SurpriseParams

    def jload(name: str) -> dict:
        if name not in sections:
            raise SnapshotError(f"snapshot is missing section {name!r}")
        return json.loads(sections[name])

    meta = jload("meta")
    cfg_d = meta["config"]
    config = AgentConfig(
        **{**cfg_d,
           "layer1": LayerParams(**cfg_d["layer1"]),
           "layer2": Layer2Params(**cfg_d["layer2"]),
           "surprise": SurpriseParams(**cfg_d["surprise"])})

    agent = Agent.__new__(Agent)
    agent.config = config
    agent.sensor_dim = meta["sensor_dim"]
    agent.actuator_dim = meta["actuator_dim"]
    agent.actions = [list(map(float, a)) for a in meta["actions"]]
    agent.step_count = meta["step_count"]
    agent._last_emitted = meta["last_emitted"]
    agent._pending_inner = meta["pending_inner"]
    agent._parser_order = list(meta["parser_order"])
    agent._assigned = meta["assigned"]
    agent._next_col_id = meta["next_col_id"]
    agent._frozen = False
    agent._finalized = False
    agent._explore_rng = np.random.default_rng()
    agent._explore_rng.bit_generator.state = meta["explore_rng"]

    plan_d = jload("plan")
    plan = SamplingPlan(tuple(tuple(int(i) for i in s) for s in plan_d["subsets"]),
                        plan_d["seed"])
    thalamus = Thalamus.__new__(Thalamus)
    thalamus.sensor_dim = agent.sensor_dim
    thalamus.actuator_dim = agent.actuator_dim
    thalamus.plan = plan
    thalamus._index_arrays = [np.asarray(s, dtype=np.intp) for s in plan.subsets]
    coder_d = jload("action_coder")
    coder = ActionCoder(coder_d["actuator_dim"], coder_d["clusters"], coder_d["seed"])
    for vec in coder_d["bootstrap"]:
        coder.collect(vec)
    if coder_d["codebook"] is not None:
        coder.codebook = _centroids_from(sections["action_coder.centroids"],
                                         coder_d["codebook"])
    thalamus.action_coder = coder
    agent.thalamus = thalamus

    agent.l1_columns = []
    for i in range(meta["n_l1"]):
        agent.l1_columns.append(_rebuild_l1(jload(f"l1.{i}"),
                                            sections.get(f"l1.{i}.centroids")))
    agent.l2_columns = []
    for i in range(meta["n_l2"]):
        agent.l2_columns.append(_rebuild_l2(jload(f"l2.{i}")))

    sur = jload("surprise")
    agent.surprise_state = basal.SurpriseState(
        threshold=sur["threshold"], margin=sur["margin"],
        cooldown_steps=sur["cooldown_steps"], streak=sur["streak"],
        steps_since_inner=sur["steps_since_inner"], last_sb=sur["last_sb"],
        prev_surprised=frozenset(sur["prev_surprised"]))
    return agent


def _rebuild_l1(state: dict, centroids: Optional[bytes]) -> Layer1Column:
    from .parser import ParserConfig, Prediction
    from .hypercolumn import L1Output
    from .parser import ParseEvent

    pcfg = ParserConfig(**state["parser_config"])
    col = Layer1Column(
        state["col_id"], state["input_indices"],
        unique_limit=state["unique_limit"], clusters=state["clusters"],
        seed=state["seed"], parser_config=pcfg,
        inhibit_unchanged=state["inhibit_unchanged"],
        letter_base=state["letter_base"])
    for vec in state["bootstrap"]:
        key = tuple(float(x) for x in vec)
        col.bootstrap.append(key)
        col._seen.add(key)
    if state["codebook"] is not None:
        col.codebook = _centroids_from(centroids, state["codebook"])
    if state["parser"] is not None:
        col.parser = Parser.from_state(state["parser"])
    col.last_letter = state["last_letter"]
    if state["last_output"] is not None:
        pred_s = state["last_output"]["prediction"]
        pred = (None if pred_s is None
                else Prediction(pred_s[0], pred_s[1], bool(pred_s[2])))
        col.last_output = L1Output(
            state["last_output"]["letter"],
            ParseEvent(None, (), None, 0.0, False), pred)
    return col


def _rebuild_l2(state: dict) -> Layer2Column:
    from .parser import ParserConfig, Prediction
    from .hypercolumn import L2Output
    from .parser import ParseEvent

    pcfg = ParserConfig(**state["parser"]["config"])
    col = Layer2Column(state["col_id"], state["substrate"], pcfg,
                       inhibit_unchanged=state["inhibit_unchanged"])
    col.parser = Parser.from_state(state["parser"])
    col.last_composite = state["last_composite"]
    if state["last_output"] is not None:
        pred_s = state["last_output"]["prediction"]
        pred = (None if pred_s is None
                else Prediction(pred_s[0], pred_s[1], bool(pred_s[2])))
        col.last_output = L2Output(
            ParseEvent(None, (), None, 0.0, False), pred,
            {k: int(v) for k, v in state["last_output"]["feelings"].items()})
    return col
