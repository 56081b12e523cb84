"""Experiment running: episode loop, per-episode CSV metrics, defaults.

One canonical loop drives every mode (training, frozen evaluation, the
random-policy baseline, and remote agents over the wire) so that the same
environment and seed always produce the same step sequence regardless of how
the agent is hosted.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .agent import (ActionOutput, Agent, AgentConfig, Layer2Params, LayerParams,
                    StepInput, SurpriseParams, action_index_of)
from .envs import make_env
from .errors import ConfigError

CSV_HEADER = ("episode,steps,agent_goals,opponent_goals,goal_diff,"
              "rolling30_diff,inner_rewards,l1_parsers,l2_vocab,wall_ms")


@dataclass
class EpisodeResult:
    steps: int
    agent_goals: int
    opponent_goals: int
    inner_rewards: int
    actions: Optional[list[int]] = None

    @property
    def goal_diff(self) -> int:
        return self.agent_goals - self.opponent_goals


class RandomStepper:
    """Uniform random policy presenting the agent stepping interface."""

    def __init__(self, action_values: Sequence[Sequence[float]], seed: int):
        self._actions = [list(map(float, a)) for a in action_values]
        self._rng = np.random.default_rng(seed)

    def step(self, inp: StepInput) -> ActionOutput:
        idx = int(self._rng.integers(len(self._actions)))
        return ActionOutput(list(self._actions[idx]), None, True, False)


def run_episode(env, stepper, action_values: Sequence[Sequence[float]], *,
                record_actions: bool = False) -> EpisodeResult:
    """Play one episode; the terminal observation is fed back with its reward."""
    state = env.reset()
    last_act = list(map(float, action_values[0]))
    inner = 0
    actions: Optional[list[int]] = [] if record_actions else None
    steps = 0
    while True:
        out = stepper.step(StepInput(state.observation, last_act,
                                     state.reward, state.done))
        if out.inner_reward_fired:
            inner += 1
        if state.done:
            break
        idx = action_index_of(out.actuator, action_values)
        if actions is not None:
            actions.append(idx)
        state = env.step(env.ACTIONS[idx])
        steps += 1
        last_act = [float(x) for x in out.actuator]
    return EpisodeResult(steps, state.score[0], state.score[1], inner, actions)


def _format_row(episode: int, result: EpisodeResult, rolling: float,
                l1_parsers: int, l2_vocab: int, wall_ms: int) -> str:
    return (f"{episode},{result.steps},{result.agent_goals},"
            f"{result.opponent_goals},{result.goal_diff},{rolling!r},"
            f"{result.inner_rewards},{l1_parsers},{l2_vocab},{wall_ms}")


@dataclass
class RunResult:
    records: list[dict]
    csv_text: str
    agent: Optional[Agent] = None


def _run_loop(env, stepper, action_values, episodes: int, *,
              metrics_fn: Optional[Callable[[], dict]] = None,
              time_fn: Callable[[], float] = time.perf_counter,
              csv_sink=None, progress: Optional[Callable[[int, dict], None]] = None,
              ) -> RunResult:
    lines = [CSV_HEADER]
    if csv_sink is not None:
        csv_sink.write(CSV_HEADER + "\n")
        csv_sink.flush()
    window: list[int] = []
    records = []
    for episode in range(1, episodes + 1):
        t0 = time_fn()
        result = run_episode(env, stepper, action_values)
        wall_ms = int(round((time_fn() - t0) * 1000))
        window.append(result.goal_diff)
        if len(window) > 30:
            window.pop(0)
        rolling = sum(window) / len(window)
        m = metrics_fn() if metrics_fn else {}
        row = _format_row(episode, result, rolling,
                          m.get("l1_parsers", 0), m.get("l2_vocab", 0), wall_ms)
        lines.append(row)
        if csv_sink is not None:
            csv_sink.write(row + "\n")
            csv_sink.flush()
        record = {"episode": episode, "steps": result.steps,
                  "agent_goals": result.agent_goals,
                  "opponent_goals": result.opponent_goals,
                  "goal_diff": result.goal_diff, "rolling30_diff": rolling,
                  "inner_rewards": result.inner_rewards,
                  "l1_parsers": m.get("l1_parsers", 0),
                  "l2_vocab": m.get("l2_vocab", 0), "wall_ms": wall_ms}
        records.append(record)
        if progress:
            progress(episode, record)
    return RunResult(records, "\n".join(lines) + "\n")


def action_values_of(env) -> list[list[float]]:
    return [[float(a)] for a in env.ACTIONS]


def default_agent_config(env_name: str) -> AgentConfig:
    """Per-environment defaults, tuned on the built-in environments."""
    if env_name == "catch":
        return AgentConfig(
            p=6, m=2, unique_limit=24, clusters=25,
            layer1=LayerParams(threshold=30, decay=0.9, memory=6),
            layer2=Layer2Params(threshold=200, decay=0.9, memory=6),
            surprise=SurpriseParams(threshold=2.0, margin=0.0, cooldown=10),
            epsilon=0.01, seed=3)
    if env_name == "minipong":
        return AgentConfig(
            p=8, m=2, unique_limit=60, clusters=24,
            layer1=LayerParams(threshold=40, decay=0.9, memory=10),
            layer2=Layer2Params(threshold=6, decay=0.8, memory=16),
            surprise=SurpriseParams(threshold=2.0, margin=0.0, cooldown=10),
            epsilon=0.05, seed=3)
    return AgentConfig()


def train_run(env_name: str, episodes: int, seed: Optional[int] = None, *,
              config: Optional[AgentConfig] = None, csv_path=None,
              snapshot_path=None, agent: Optional[Agent] = None,
              time_fn: Callable[[], float] = time.perf_counter,
              progress=None) -> RunResult:
    """Train an agent in-process and stream per-episode metrics to CSV."""
    config = config or default_agent_config(env_name)
    if seed is not None:
        config = replace(config, seed=seed)
    env = make_env(env_name, seed=config.seed)
    action_values = action_values_of(env)
    if agent is None:
        agent = Agent(config, env.OBSERVATION_DIM, 1, action_values)
    sink = open(csv_path, "w", encoding="utf-8") if csv_path else None
    try:
        result = _run_loop(env, agent, action_values, episodes,
                           metrics_fn=agent.metrics, time_fn=time_fn,
                           csv_sink=sink, progress=progress)
    finally:
        if sink is not None:
            sink.close()
    result.agent = agent
    if snapshot_path is not None:
        agent.save(snapshot_path)
    return result


def eval_run(agent: Agent, env_name: str, episodes: int,
             seed: Optional[int] = None, *,
             time_fn: Callable[[], float] = time.perf_counter) -> dict:
    """Frozen evaluation: no table growth, no inner rewards."""
    env = make_env(env_name, seed=agent.config.seed if seed is None else seed)
    action_values = action_values_of(env)
    was_frozen = agent.frozen
    agent.set_frozen(True)
    try:
        result = _run_loop(env, agent, action_values, episodes,
                           metrics_fn=agent.metrics, time_fn=time_fn)
    finally:
        agent.set_frozen(was_frozen)
    return summarize(result.records)


def baseline_run(env_name: str, episodes: int, seed: int = 0, *,
                 csv_path=None,
                 time_fn: Callable[[], float] = time.perf_counter) -> RunResult:
    """Random-policy oracle run; the reference distribution for learning tests."""
    env = make_env(env_name, seed=seed)
    action_values = action_values_of(env)
    stepper = RandomStepper(action_values, seed + 1)
    sink = open(csv_path, "w", encoding="utf-8") if csv_path else None
    try:
        result = _run_loop(env, stepper, action_values, episodes,
                           time_fn=time_fn, csv_sink=sink)
    finally:
        if sink is not None:
            sink.close()
    return result


def summarize(records: list[dict]) -> dict:
    """Mean and sample sd of per-episode score and goal difference."""
    if not records:
        return {"episodes": 0}
    diffs = np.array([r["goal_diff"] for r in records], dtype=np.float64)
    agent_goals = np.array([r["agent_goals"] for r in records], dtype=np.float64)
    opp_goals = np.array([r["opponent_goals"] for r in records], dtype=np.float64)
    sd = float(diffs.std(ddof=1)) if len(diffs) > 1 else 0.0
    return {
        "episodes": len(records),
        "mean_goal_diff": float(diffs.mean()),
        "sd_goal_diff": sd,
        "mean_agent_goals": float(agent_goals.mean()),
        "mean_opponent_goals": float(opp_goals.mean()),
    }


# --------------------------------------------------------------- config files

def load_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` text; '#' starts a comment."""
    items: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"malformed config line: {raw!r}")
        key, value = line.split("=", 1)
        items[key.strip()] = value.strip()
    return items


def _coerce(current, raw: str):
    if isinstance(current, bool):
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(raw)
    if isinstance(current, float):
        return float(raw)  # accepts "inf"
    if current is None:  # optional ints (action_clusters)
        return None if raw.lower() in ("none", "") else int(raw)
    return raw


def apply_config_items(config: AgentConfig, items: dict[str, str]) -> AgentConfig:
    """Apply dotted ``section.field`` overrides onto an AgentConfig."""
    groups: dict[str, dict[str, object]] = {}
    flat: dict[str, object] = {}
    for key, raw in items.items():
        if "." in key:
            section, fname = key.split(".", 1)
            sub = getattr(config, section, None)
            if sub is None or not dataclasses.is_dataclass(sub):
                raise ConfigError(f"unknown config section {section!r}")
            if not hasattr(sub, fname):
                raise ConfigError(f"unknown config key {key!r}")
            groups.setdefault(section, {})[fname] = _coerce(getattr(sub, fname), raw)
        else:
            if not hasattr(config, key):
                raise ConfigError(f"unknown config key {key!r}")
            flat[key] = _coerce(getattr(config, key), raw)
    for section, fields in groups.items():
        flat[section] = replace(getattr(config, section), **fields)
    config = replace(config, **flat)
    config.validate()
    return config
