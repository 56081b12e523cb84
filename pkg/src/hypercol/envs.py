"""Desk-scale grid environments with RAM-like integer observations.

MiniPong: a 16x16 Pong variant with a scripted opponent on the left edge and
the agent paddle on the right; 500-step episodes, goals scored against either
side re-serve the ball. Catch: a 5x5 falling-object grid with 5-step
episodes. Both are deterministic given their seed and the action sequence,
and both expose small integer observation vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class EnvState:
    observation: np.ndarray
    reward: float
    done: bool
    score: tuple[int, int]  # (agent goals, opponent goals)


@dataclass
class MiniPongConfig:
    width: int = 16
    height: int = 16
    paddle_height: int = 3
    opponent_skill: float = 0.8  # probability the opponent tracks the ball each step
    max_steps: int = 500
    seed: int = 0
    freeze_steps_after_goal: int = 0  # fault injection: frozen observations

    def __post_init__(self):
        if self.paddle_height < 1 or self.paddle_height > self.height:
            raise ValueError("paddle must fit inside the field")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


class MiniPong:
    """Agent paddle on the right column, scripted opponent on the left.

    Actions: 0 stay, 1 up, 2 down. Reward +1 when the opponent misses, -1
    when the agent misses. Observation (all integers): ball_x, ball_y,
    vel_x+1, vel_y+1, paddle_y, opponent_y, agent_goals, opponent_goals.
    """

    ACTIONS = (0, 1, 2)
    OBSERVATION_DIM = 8

    def __init__(self, config: MiniPongConfig | None = None):
        self.config = config or MiniPongConfig()
        self._rng = np.random.default_rng(self.config.seed)
        self._needs_reset = True
        self._done = True

    def reset(self) -> EnvState:
        cfg = self.config
        self._steps = 0
        self._agent_goals = 0
        self._opponent_goals = 0
        self._paddle_y = (cfg.height - cfg.paddle_height) // 2
        self._opponent_y = (cfg.height - cfg.paddle_height) // 2
        self._freeze_left = 0
        self._frozen_obs: Optional[np.ndarray] = None
        self._serve()
        self._needs_reset = False
        self._done = False
        return EnvState(self._observe(), 0.0, False, (0, 0))

    def _serve(self) -> None:
        cfg = self.config
        self._ball_x = cfg.width // 2
        self._ball_y = cfg.height // 2
        self._vel_x = 1 if self._rng.integers(2) else -1
        self._vel_y = 1 if self._rng.integers(2) else -1

    def _observe(self) -> np.ndarray:
        return np.array([
            self._ball_x, self._ball_y, self._vel_x + 1, self._vel_y + 1,
            self._paddle_y, self._opponent_y,
            self._agent_goals, self._opponent_goals,
        ], dtype=np.int64)

    def step(self, action: int) -> EnvState:
        cfg = self.config
        if self._needs_reset or self._done:
            raise RuntimeError("step called on a finished episode; call reset()")
        if action not in self.ACTIONS:
            raise ValueError(f"invalid action {action!r}")

        self._steps += 1
        if self._freeze_left > 0:
            # emulator-stall fault injection: the world holds still
            self._freeze_left -= 1
            done = self._steps >= cfg.max_steps
            self._done = done
            return EnvState(np.array(self._frozen_obs), 0.0, done,
                            (self._agent_goals, self._opponent_goals))

        if action == 1:
            self._paddle_y = max(0, self._paddle_y - 1)
        elif action == 2:
            self._paddle_y = min(cfg.height - cfg.paddle_height, self._paddle_y + 1)

        # scripted opponent: usually tracks the ball, otherwise holds
        if self._rng.random() < cfg.opponent_skill:
            center = self._opponent_y + cfg.paddle_height // 2
            if self._ball_y > center:
                self._opponent_y = min(cfg.height - cfg.paddle_height,
                                       self._opponent_y + 1)
            elif self._ball_y < center:
                self._opponent_y = max(0, self._opponent_y - 1)

        # ball motion with wall reflection
        if (self._ball_y == 0 and self._vel_y < 0) or \
                (self._ball_y == cfg.height - 1 and self._vel_y > 0):
            self._vel_y = -self._vel_y
        self._ball_y += self._vel_y
        self._ball_x += self._vel_x

        reward = 0.0
        if self._ball_x <= 0:
            if self._opponent_y <= self._ball_y < self._opponent_y + cfg.paddle_height:
                self._ball_x = 1
                self._vel_x = 1
            else:
                reward = 1.0
                self._agent_goals += 1
                self._after_goal()
        elif self._ball_x >= cfg.width - 1:
            if self._paddle_y <= self._ball_y < self._paddle_y + cfg.paddle_height:
                self._ball_x = cfg.width - 2
                self._vel_x = -1
            else:
                reward = -1.0
                self._opponent_goals += 1
                self._after_goal()

        done = self._steps >= cfg.max_steps
        self._done = done
        return EnvState(self._observe(), reward, done,
                        (self._agent_goals, self._opponent_goals))

    def _after_goal(self) -> None:
        obs_before = self._observe()
        self._serve()
        if self.config.freeze_steps_after_goal > 0:
            self._freeze_left = self.config.freeze_steps_after_goal
            self._frozen_obs = obs_before


@dataclass
class CatchConfig:
    size: int = 5
    seed: int = 0


class Catch:
    """One object falls down a 5x5 grid; the bottom paddle must be under it.

    Actions: 0 left, 1 stay, 2 right. The object spawns on the top row and
    falls one row per step after the paddle moves; on the fifth step it sits
    on the bottom row and the catch resolves with reward +1 or -1.
    Observation (integers): object_x, object_y, paddle_x.
    """

    ACTIONS = (0, 1, 2)
    OBSERVATION_DIM = 3

    def __init__(self, config: CatchConfig | None = None):
        self.config = config or CatchConfig()
        self._rng = np.random.default_rng(self.config.seed)
        self._needs_reset = True
        self._done = True

    def reset(self) -> EnvState:
        size = self.config.size
        self._object_x = int(self._rng.integers(size))
        self._object_y = 0
        # random start column keeps every (row, paddle) pair reachable and the
        # object still always catchable within the episode's five moves
        self._paddle_x = int(self._rng.integers(size))
        self._caught = 0
        self._missed = 0
        self._needs_reset = False
        self._done = False
        return EnvState(self._observe(), 0.0, False, (0, 0))

    def _observe(self) -> np.ndarray:
        return np.array([self._object_x, self._object_y, self._paddle_x],
                        dtype=np.int64)

    def step(self, action: int) -> EnvState:
        size = self.config.size
        if self._needs_reset or self._done:
            raise RuntimeError("step called on a finished episode; call reset()")
        if action not in self.ACTIONS:
            raise ValueError(f"invalid action {action!r}")
        if action == 0:
            self._paddle_x = max(0, self._paddle_x - 1)
        elif action == 2:
            self._paddle_x = min(size - 1, self._paddle_x + 1)

        if self._object_y == size - 1:
            if self._paddle_x == self._object_x:
                reward = 1.0
                self._caught += 1
            else:
                reward = -1.0
                self._missed += 1
            self._done = True
            return EnvState(self._observe(), reward, True,
                            (self._caught, self._missed))
        self._object_y += 1
        return EnvState(self._observe(), 0.0, False, (self._caught, self._missed))


def make_env(name: str, seed: int = 0, **kwargs):
    if name == "minipong":
        return MiniPong(MiniPongConfig(seed=seed, **kwargs))
    if name == "catch":
        return Catch(CatchConfig(seed=seed, **kwargs))
    raise ValueError(f"unknown environment {name!r}")
