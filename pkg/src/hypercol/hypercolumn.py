"""Cortical hypercolumns: a coder/decoder paired with an online parser.

First-layer columns watch a fixed subset of sensor coordinates, collect
distinct vectors until they have enough variety to fit a codebook, and then
parse the resulting letter stream with situation (frequency) prediction.
Second-layer columns parse composite symbols built from one action letter and
three first-layer letters, with value (reward) prediction and per-action
feelings. Columns without new input are inhibited: they skip execution and
retain their previous output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import codebook as cb
from .errors import ConfigError
from .parser import ParseEvent, Parser, ParserConfig, Prediction


def _zero_event() -> ParseEvent:
    return ParseEvent(None, (), None, 0.0, False)


@dataclass
class L1Output:
    letter: str
    event: ParseEvent
    prediction: Optional[Prediction]


@dataclass
class L2Output:
    event: ParseEvent
    prediction: Optional[Prediction]  # None until a token completes this episode
    feelings: dict[str, int]


class Layer1Column:
    """Sensor-subset column: bootstrap, one-shot codebook fit, letter parsing."""

    def __init__(self, col_id: int, input_indices: Sequence[int], *,
                 unique_limit: int, clusters: int, seed: int,
                 parser_config: ParserConfig,
                 inhibit_unchanged: bool = True, letter_base: str = "A"):
        if unique_limit < 1:
            raise ConfigError("unique-vector limit must be >= 1")
        if clusters > unique_limit + 1:
            raise ConfigError(
                f"clusters={clusters} can exceed the bootstrap size (unique_limit={unique_limit})")
        self.col_id = col_id
        self.input_indices = tuple(int(i) for i in input_indices)
        self.unique_limit = unique_limit
        self.clusters = clusters
        self.seed = seed
        self.parser_config = parser_config
        self.inhibit_unchanged = inhibit_unchanged
        self.letter_base = letter_base
        self.codebook: Optional[cb.Codebook] = None
        self.parser: Optional[Parser] = None
        self.bootstrap: list[tuple[float, ...]] = []
        self._seen: set[tuple[float, ...]] = set()
        self.last_letter: Optional[str] = None
        self.last_output: Optional[L1Output] = None

    @property
    def distinct_count(self) -> int:
        return len(self._seen)

    def step(self, subvector: Sequence[float], reward: float, *,
             learn: bool = True) -> Optional[L1Output]:
        """Collect while bootstrapping (returning None); parse once fitted."""
        if len(subvector) != len(self.input_indices):
            raise ValueError(
                f"column {self.col_id} expects dim {len(self.input_indices)}, "
                f"got {len(subvector)}")
        if self.parser is None:
            if not learn:
                return None
            key = tuple(float(x) for x in subvector)
            if key not in self._seen:
                self._seen.add(key)
                self.bootstrap.append(key)
                if len(self._seen) > self.unique_limit:
                    self._fit()
            return None

        letter = self.codebook.encode_letter(np.asarray(subvector, dtype=np.float64))
        if (self.inhibit_unchanged and letter == self.last_letter
                and self.last_output is not None):
            out = L1Output(letter, _zero_event(), self.last_output.prediction)
            self.last_output = out
            return out
        event = self.parser.observe(letter, reward, learn=learn)
        prediction = (self.parser.predict_situation()
                      if self.parser.current_token is not None else None)
        out = L1Output(letter, event, prediction)
        self.last_letter = letter
        self.last_output = out
        return out

    def _fit(self) -> None:
        self.codebook = cb.fit(self.bootstrap, self.clusters, self.seed,
                               letter_base=self.letter_base)
        self.parser = Parser(self.codebook.letters, self.parser_config)

    def reset_transient(self) -> None:
        if self.parser is not None:
            self.parser.reset_transient()
        self.last_letter = None
        self.last_output = None


class Layer2Column:
    """Context column over composite symbols (action letter + substrate letters)."""

    def __init__(self, col_id: int, substrate: Sequence[int],
                 parser_config: ParserConfig, inhibit_unchanged: bool = True):
        if len(substrate) != 3:
            raise ConfigError("a second-layer column needs exactly 3 substrate columns")
        if parser_config.mode != "value" or not parser_config.open_alphabet:
            raise ConfigError("second-layer parsers must be value-mode with an open alphabet")
        self.col_id = col_id
        self.substrate = tuple(int(i) for i in substrate)
        self.inhibit_unchanged = inhibit_unchanged
        self.parser = Parser((), parser_config)
        self.last_composite: Optional[str] = None
        self.last_output: Optional[L2Output] = None

    def step(self, composite: str, reward: float, action_letters: Sequence[str], *,
             learn: bool = True) -> Optional[L2Output]:
        if len(composite) != 4:
            raise ValueError(f"malformed composite {composite!r}: expected 4 letters")
        if (self.inhibit_unchanged and composite == self.last_composite
                and self.last_output is not None):
            out = L2Output(_zero_event(), self.last_output.prediction,
                           self.last_output.feelings)
            self.last_output = out
            return out
        if not learn and composite not in self.parser.alphabet:
            # frozen mode cannot intern new composites; treat as no new input
            if self.last_output is None:
                return None
            return L2Output(_zero_event(), self.last_output.prediction,
                            self.last_output.feelings)
        event = self.parser.observe(composite, reward, learn=learn)
        if self.parser.current_token is None:
            # the composite buffered as a word prefix right after an episode
            # reset: nothing to predict from yet
            out = L2Output(event, None, {a: 0 for a in action_letters})
        else:
            prediction = self.parser.predict_value()
            feelings = self.parser.column_feeling(action_letters)
            out = L2Output(event, prediction, feelings)
        self.last_composite = composite
        self.last_output = out
        return out

    def reset_transient(self) -> None:
        self.parser.reset_transient()
        self.last_composite = None
        self.last_output = None
