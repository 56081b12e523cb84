"""Action selection and surprise aggregation across columns.

The striatum-style vote counts, per action, how many second-layer columns
feel positively about it (indicator semantics: only the sign of a column's
per-action feeling matters), picks the best-supported action, and selects as
winner the column that predicted that action with the highest reward
forecast. Separately, column surprises are tallied into a basal surprise; a
tally above threshold releases a one-time unit inner reward, rate-limited by
a cooldown.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .parser import Prediction


@dataclass
class BasalDecision:
    fb: dict[str, int]
    action: str
    winner: Optional[int]
    per_action_best: dict[str, tuple[int, float]]
    winner_predicts_action: bool
    exploratory: bool


def decide(columns: Sequence[tuple[int, Mapping[str, int], Prediction]],
           actions: Sequence[str], rng: np.random.Generator) -> BasalDecision:
    """Vote over column feelings and pick the action and winner column.

    ``columns`` holds (column id, per-action feelings, prediction) triples.
    Ties break to the lowest action codepoint / lowest column id. When no
    column feels positive about anything, a uniformly random action is drawn
    from ``rng`` and the decision is flagged exploratory.
    """
    if not columns:
        raise ValueError("cannot decide over an empty column set")
    ordered_actions = sorted(actions)
    fb = {a: 0 for a in ordered_actions}
    for _, feelings, _ in columns:
        for a in ordered_actions:
            if feelings.get(a, 0) > 0:
                fb[a] += 1

    per_action_best: dict[str, tuple[int, float]] = {}
    for col_id, _, pred in sorted(columns, key=lambda c: c[0]):
        if pred is None:
            continue
        a = pred.next[0]
        if a not in fb:
            continue
        best = per_action_best.get(a)
        if best is None or pred.reward_forecast > best[1]:
            per_action_best[a] = (col_id, pred.reward_forecast)

    exploratory = False
    best_action = ordered_actions[0]
    best_votes = -1
    for a in ordered_actions:
        if fb[a] > best_votes:
            best_action, best_votes = a, fb[a]
    if best_votes <= 0:
        best_action = ordered_actions[int(rng.integers(len(ordered_actions)))]
        exploratory = True

    chosen_best = per_action_best.get(best_action)
    if chosen_best is not None:
        winner = chosen_best[0]
        winner_predicts = True
    else:
        winner = min(c[0] for c in columns)
        winner_predicts = False
    return BasalDecision(fb, best_action, winner, per_action_best,
                         winner_predicts, exploratory)


@dataclass
class SurpriseState:
    """Threshold, margin and cooldown bookkeeping for inner rewards."""

    threshold: float = 2.0      # basal surprise tally must exceed this to fire
    margin: float = 0.0         # a column counts as surprised when surprise > margin
    cooldown_steps: int = 10
    streak: bool = False        # count a column double if surprised twice in a row
    steps_since_inner: int = field(default=-1)  # -1: ready to fire immediately
    last_sb: int = 0
    prev_surprised: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.steps_since_inner < 0:
            self.steps_since_inner = self.cooldown_steps


def basal_surprise(state: SurpriseState,
                   column_surprises: Mapping[int, float]) -> tuple[int, int]:
    """Tally surprised columns; return (basal surprise, inner reward 0|1).

    The inner reward fires at most once per call ("one time") and only after
    the cooldown has elapsed since the previous one.
    """
    surprised = {cid for cid, s in column_surprises.items() if s > state.margin}
    sb = len(surprised)
    if state.streak:
        sb += len(surprised & state.prev_surprised)
    fired = 1 if (sb > state.threshold
                  and state.steps_since_inner >= state.cooldown_steps) else 0
    state.steps_since_inner = 0 if fired else state.steps_since_inner + 1
    state.last_sb = sb
    state.prev_surprised = frozenset(surprised)
    return sb, fired
