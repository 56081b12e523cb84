"""The full perceive/decide/act cycle wiring thalamus, columns and striatum.

Each step: route the sensor vector to first-layer columns, parse their letter
streams, code the incoming actuator to an action letter, step second-layer
columns on composite symbols, tally column surprises into a possible inner
reward, vote on the next action, and decode it back to actuator terms.
Learned tables persist across episodes; segmentation buffers, histories and
pending predictions reset at episode end.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import basal
from .errors import ConfigError
from .hypercolumn import L1Output, L2Output, Layer1Column, Layer2Column
from .parser import ParserConfig
from .thalamus import Thalamus


@dataclass(frozen=True)
class LayerParams:
    threshold: int = 4
    decay: float = 0.8
    memory: int = 8


@dataclass(frozen=True)
class Layer2Params(LayerParams):
    threshold: int = 2
    max_word_len: int = 4
    max_vocab: int = 5000


@dataclass(frozen=True)
class SurpriseParams:
    threshold: float = 2.0
    margin: float = 0.0
    cooldown: int = 10
    streak: bool = False


@dataclass(frozen=True)
class AgentConfig:
    p: int = 6                      # sensor subsets / first-layer columns per copy
    m: int = 2                      # sensor indices per subset
    unique_limit: int = 60          # distinct vectors before a codebook is fitted
    clusters: int = 20              # sensor clusters per codebook
    action_clusters: Optional[int] = None  # default: number of env actions
    columns_per_subset: int = 1
    layer1: LayerParams = field(default_factory=LayerParams)
    layer2: Layer2Params = field(default_factory=Layer2Params)
    surprise: SurpriseParams = field(default_factory=SurpriseParams)
    inhibit_unchanged: bool = True
    disjoint_subsets: bool = False
    epsilon: float = 0.05           # exploration probability on decided steps
    defer_inner_reward: bool = False
    seed: int = 0

    def validate(self) -> None:
        if self.p < 3:
            raise ConfigError("p must be >= 3 (a second-layer column needs a triple)")
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.columns_per_subset < 1:
            raise ConfigError("columns_per_subset must be >= 1")
        if self.clusters < 1:
            raise ConfigError("clusters must be >= 1")
        if self.clusters > self.unique_limit + 1:
            raise ConfigError(
                f"clusters={self.clusters} exceeds the bootstrap size "
                f"(unique_limit={self.unique_limit} + 1)")
        # sensor letters start at 'A'; action letters at 'a'; ranges must not meet
        if ord("A") + self.clusters - 1 >= ord("a"):
            raise ConfigError(
                f"clusters={self.clusters} would collide sensor letters with action letters")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon must be in [0, 1]")
        if self.surprise.threshold < 0:
            raise ConfigError("surprise threshold must be >= 0")
        if self.surprise.margin < 0:
            raise ConfigError("surprise margin must be >= 0")
        if self.surprise.cooldown < 0:
            raise ConfigError("surprise cooldown must be >= 0")
        self.layer1_parser_config().validate()
        self.layer2_parser_config().validate()

    def layer1_parser_config(self) -> ParserConfig:
        return ParserConfig(max_word_len=1, max_vocab=max(self.clusters, 1),
                            threshold=self.layer1.threshold, decay=self.layer1.decay,
                            memory=self.layer1.memory, mode="situation")

    def layer2_parser_config(self) -> ParserConfig:
        return ParserConfig(max_word_len=self.layer2.max_word_len,
                            max_vocab=self.layer2.max_vocab,
                            threshold=self.layer2.threshold, decay=self.layer2.decay,
                            memory=self.layer2.memory, mode="value",
                            open_alphabet=True)


@dataclass
class StepInput:
    sensor: Sequence[float]
    actuator: Optional[Sequence[float]]  # action executed last step; None self-loops
    reward: float = 0.0
    done: bool = False


@dataclass
class ActionOutput:
    actuator: list[float]
    action_letter: Optional[str]
    exploratory: bool
    inner_reward_fired: bool


def action_index_of(actuator: Sequence[float], actions: Sequence[Sequence[float]]) -> int:
    """Index of the declared action vector nearest to ``actuator``."""
    a = np.asarray(actuator, dtype=np.float64)
    best, best_d = 0, None
    for i, cand in enumerate(actions):
        d = float(np.sum((np.asarray(cand, dtype=np.float64) - a) ** 2))
        if best_d is None or d < best_d:
            best, best_d = i, d
    return best


def _as_action_vectors(actions: Sequence, actuator_dim: int) -> list[list[float]]:
    out = []
    for a in actions:
        vec = [float(a)] if np.isscalar(a) else [float(x) for x in a]
        if len(vec) != actuator_dim:
            raise ConfigError(
                f"action {a!r} has dim {len(vec)}, expected {actuator_dim}")
        out.append(vec)
    if not out:
        raise ConfigError("action set must be nonempty")
    return out


class Agent:
    """Deterministic (config, seed, input stream) -> action stream learner."""

    def __init__(self, config: AgentConfig, sensor_dim: int, actuator_dim: int,
                 actions: Sequence):
        config.validate()
        if sensor_dim < 1 or actuator_dim < 1:
            raise ConfigError("sensor and actuator dims must be >= 1")
        if config.m > sensor_dim:
            raise ConfigError(f"m={config.m} exceeds sensor_dim={sensor_dim}")
        self.config = config
        self.sensor_dim = sensor_dim
        self.actuator_dim = actuator_dim
        self.actions = _as_action_vectors(actions, actuator_dim)
        k_action = config.action_clusters or len(self.actions)

        ss = np.random.SeedSequence(config.seed)
        n_l1 = config.p * config.columns_per_subset
        children = ss.spawn(3 + n_l1)
        plan_seed = int(children[0].generate_state(1)[0])
        action_seed = int(children[1].generate_state(1)[0])
        self._explore_rng = np.random.default_rng(children[2])

        self.thalamus = Thalamus(sensor_dim, actuator_dim, config.p, config.m,
                                 plan_seed, k_action,
                                 disjoint_subsets=config.disjoint_subsets,
                                 action_seed=action_seed)
        l1_cfg = config.layer1_parser_config()
        self.l1_columns: list[Layer1Column] = []
        for s in range(config.p):
            for c in range(config.columns_per_subset):
                cid = s * config.columns_per_subset + c
                self.l1_columns.append(Layer1Column(
                    cid, self.thalamus.plan.subsets[s],
                    unique_limit=config.unique_limit, clusters=config.clusters,
                    seed=int(children[3 + cid].generate_state(1)[0]),
                    parser_config=l1_cfg,
                    inhibit_unchanged=config.inhibit_unchanged))
        self.l2_columns: list[Layer2Column] = []
        self.surprise_state = basal.SurpriseState(
            threshold=config.surprise.threshold, margin=config.surprise.margin,
            cooldown_steps=config.surprise.cooldown, streak=config.surprise.streak)
        self._next_col_id = n_l1
        self._parser_order: list[int] = []   # l1 ids in parser-creation order
        self._assigned = 0                   # prefix of _parser_order used as substrate
        self._last_emitted: Optional[list[float]] = None
        self._pending_inner = 0.0
        self.step_count = 0
        self._frozen = False
        self._finalized = False

    # ------------------------------------------------------------- lifecycle

    def set_frozen(self, flag: bool) -> None:
        """Frozen agents act but never mutate tables, vocabularies or codebooks."""
        self._frozen = bool(flag)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def finalize(self) -> None:
        self._finalized = True

    # ------------------------------------------------------------------ step

    def step(self, inp: StepInput) -> ActionOutput:
        if self._finalized:
            raise RuntimeError("agent has been finalized")
        sensor = np.asarray(inp.sensor, dtype=np.float64)
        if sensor.shape != (self.sensor_dim,):
            raise ValueError(
                f"expected sensor dim {self.sensor_dim}, got shape {sensor.shape}")
        learn = not self._frozen
        reward = float(inp.reward)
        if learn and self._pending_inner:
            reward += self._pending_inner
            self._pending_inner = 0.0

        # 1-2. route the sensor and step first-layer columns
        parts = self.thalamus.route(sensor)
        l1_results: dict[int, Optional[L1Output]] = {}
        cps = self.config.columns_per_subset
        for col in self.l1_columns:
            l1_results[col.col_id] = col.step(parts[col.col_id // cps], reward,
                                              learn=learn)

        if learn:
            self._register_new_parsers()

        # 3. code the incoming actuator (the action executed last step)
        act_vec = inp.actuator if inp.actuator is not None else self._last_emitted
        act_letter = None
        coder = self.thalamus.action_coder
        if act_vec is not None:
            act_arr = [float(x) for x in act_vec]
            if len(act_arr) != self.actuator_dim:
                raise ValueError(
                    f"expected actuator dim {self.actuator_dim}, got {len(act_arr)}")
            if learn:
                coder.collect(act_arr)
                if not coder.ready and self._parser_order:
                    coder.try_fit()
            act_letter = coder.letter(act_arr)

        # 4. step second-layer columns on composite symbols
        l2_results: dict[int, L2Output] = {}
        action_letters = coder.letters()
        if act_letter is not None and action_letters:
            for col in self.l2_columns:
                letters = []
                for sid in col.substrate:
                    res = l1_results.get(sid)
                    letters.append(res.letter if res is not None else None)
                composite = self.thalamus.compose(act_letter, letters)
                if composite is None:
                    continue
                out = col.step(composite, reward, action_letters, learn=learn)
                if out is not None:
                    l2_results[col.col_id] = out

        # 5. basal surprise across every column that executed; maybe inner reward
        inner_fired = False
        if learn:
            surprises = {cid: res.event.surprise
                         for cid, res in l1_results.items() if res is not None}
            surprises.update((cid, out.event.surprise) for cid, out in l2_results.items())
            _, fired = basal.basal_surprise(self.surprise_state, surprises)
            if fired:
                inner_fired = True
                if self.config.defer_inner_reward:
                    self._pending_inner += 1.0
                else:
                    self._distribute_reward(1.0)

        # 6-7. vote, optionally explore, decode the action
        actuator, letter, exploratory = self._choose_action(l2_results, action_letters)

        out = ActionOutput(actuator, letter, exploratory, inner_fired)
        self._last_emitted = actuator
        self.step_count += 1
        if inp.done:
            self.reset_transient()
        return out

    def _choose_action(self, l2_results: dict[int, L2Output],
                       action_letters: list[str]) -> tuple[list[float], Optional[str], bool]:
        rng = self._explore_rng
        coder = self.thalamus.action_coder
        if l2_results and action_letters:
            columns = [(cid, out.feelings, out.prediction)
                       for cid, out in sorted(l2_results.items())]
            decision = basal.decide(columns, action_letters, rng)
            letter = decision.action
            exploratory = decision.exploratory
            if (not exploratory and self.config.epsilon > 0.0
                    and rng.random() < self.config.epsilon):
                letter = sorted(action_letters)[int(rng.integers(len(action_letters)))]
                exploratory = True
            return [float(x) for x in coder.decode(letter)], letter, exploratory
        if action_letters:
            letter = sorted(action_letters)[int(rng.integers(len(action_letters)))]
            return [float(x) for x in coder.decode(letter)], letter, True
        idx = int(rng.integers(len(self.actions)))
        return list(self.actions[idx]), None, True

    def _distribute_reward(self, reward: float) -> None:
        for col in self.l1_columns:
            if col.parser is not None:
                col.parser.apply_reward(reward)
        for col in self.l2_columns:
            col.parser.apply_reward(reward)

    def _register_new_parsers(self) -> None:
        known = set(self._parser_order)
        for col in self.l1_columns:
            if col.parser is not None and col.col_id not in known:
                self._parser_order.append(col.col_id)
        while len(self._parser_order) - self._assigned >= 3:
            substrate = self._parser_order[self._assigned:self._assigned + 3]
            self._assigned += 3
            self.l2_columns.append(Layer2Column(
                self._next_col_id, substrate, self.config.layer2_parser_config(),
                inhibit_unchanged=self.config.inhibit_unchanged))
            self._next_col_id += 1

    def reset_transient(self) -> None:
        """Episode boundary: drop sequence state, keep learned tables."""
        for col in self.l1_columns:
            col.reset_transient()
        for col in self.l2_columns:
            col.reset_transient()
        self._pending_inner = 0.0

    # --------------------------------------------------------------- metrics

    def metrics(self) -> dict:
        l2_vocab = sum(col.parser.vocab_size for col in self.l2_columns)
        per_column = []
        for col in self.l1_columns:
            entry = {"id": col.col_id, "layer": 1, "distinct": col.distinct_count}
            if col.parser is not None:
                c_n, r_n = col.parser.table_sizes()
                entry.update(vocab=col.parser.vocab_size, c_entries=c_n, r_entries=r_n)
            per_column.append(entry)
        for col in self.l2_columns:
            c_n, r_n = col.parser.table_sizes()
            per_column.append({"id": col.col_id, "layer": 2,
                               "alphabet": len(col.parser.alphabet),
                               "vocab": col.parser.vocab_size,
                               "c_entries": c_n, "r_entries": r_n})
        return {
            "l1_columns": len(self.l1_columns),
            "l1_parsers": len(self._parser_order),
            "l2_columns": len(self.l2_columns),
            "l2_vocab": l2_vocab,
            "action_coder_ready": self.thalamus.action_coder.ready,
            "columns": per_column,
        }

    # -------------------------------------------------------------- snapshot

    def save(self, sink) -> None:
        from . import snapshot
        snapshot.write_snapshot(self, sink)

    @classmethod
    def load(cls, source) -> "Agent":
        from . import snapshot
        return snapshot.read_snapshot(source)
