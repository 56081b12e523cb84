"""Online symbolic stream learner.

A parser segments a stream of base symbols into vocabulary tokens by greedy
longest-match, counts token transitions in a correlation table C, accumulates
decayed rewards over recent transitions in a reward table R, and predicts the
next token either by transition frequency ("situation") or by accumulated
reward ("value"). A frequent transition is promoted into a new multi-part
vocabulary word once its count passes the formation threshold.

Tokens are tuples of base symbols. For first-layer parsers a base symbol is a
single letter; for second-layer parsers it is a whole composite string, so
word length is counted in composites, not characters.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import ConfigError, NoPredictionError

Parts = tuple[str, ...]


@dataclass(frozen=True)
class ParserConfig:
    max_word_len: int = 1
    max_vocab: int = 1000
    threshold: int = 2        # transition count that must be exceeded to form a word
    decay: float = 0.5        # per-transition reward decay, in (0, 1]
    memory: int = 8           # transitions retained for reward credit
    mode: str = "situation"   # "situation" or "value"
    open_alphabet: bool = False  # intern unseen base symbols on arrival

    def validate(self) -> None:
        if self.max_word_len < 1:
            raise ConfigError("max_word_len must be >= 1")
        if self.max_vocab < 1:
            raise ConfigError("max_vocab must be >= 1")
        if self.threshold < 1:
            raise ConfigError("word-formation threshold must be >= 1")
        if not 0.0 < self.decay <= 1.0:
            raise ConfigError("reward decay must be in (0, 1]")
        if self.memory < 1:
            raise ConfigError("reward memory depth must be >= 1")
        if self.mode not in ("situation", "value"):
            raise ConfigError(f"unknown prediction mode {self.mode!r}")


@dataclass(frozen=True)
class Prediction:
    """Next-token forecast: the token and the reward expected with it."""

    next: str
    reward_forecast: float
    fallback: bool = False  # true when the current token had no observed successors


@dataclass(slots=True)
class ParseEvent:
    """Outcome of one observe call.

    ``token`` is the last token completed during the call (None if the letter
    only extended the in-progress buffer); ``tokens`` lists every completion
    in order, since closing a long buffer can complete several tokens at once.
    """

    token: Optional[str]
    tokens: tuple[str, ...]
    new_word: Optional[str]
    surprise: float
    predicted_matched: bool


class Parser:
    """Single-writer symbolic stream learner over a letter alphabet."""

    __slots__ = (
        "config", "_alphabet", "_tokens", "_displays", "_ids", "C", "R",
        "history", "_buffer", "_prev", "_last_pred", "_last_pred_id",
        "_pending_parts", "_pending_id", "_proper_prefixes",
    )

    def __init__(self, alphabet: Iterable[str], config: ParserConfig | None = None):
        config = config or ParserConfig()
        config.validate()
        letters = sorted(set(alphabet))
        if not letters and not config.open_alphabet:
            raise ConfigError("alphabet must be nonempty")
        self.config = config
        self._alphabet: set[str] = set()
        self._tokens: list[Parts] = []        # id -> parts
        self._displays: list[str] = []        # id -> joined display string
        self._ids: dict[Parts, int] = {}      # parts -> id (segmentation-visible)
        self.C: dict[int, dict[int, int]] = {}
        self.R: dict[int, dict[int, float]] = {}
        self.history: deque[tuple[int, int]] = deque(maxlen=config.memory)
        self._buffer: list[str] = []
        self._prev: Optional[int] = None
        self._last_pred: Optional[Prediction] = None
        self._last_pred_id: Optional[int] = None
        self._pending_parts: Optional[Parts] = None
        self._pending_id: Optional[int] = None
        self._proper_prefixes: set[Parts] = set()
        for letter in letters:
            self._intern_letter(letter)

    # ---------------------------------------------------------------- basics

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset(self._alphabet)

    @property
    def vocab_size(self) -> int:
        return len(self._tokens)

    def vocabulary(self) -> list[str]:
        """Display strings of all tokens, in id order."""
        return list(self._displays)

    def token_str(self, token_id: int) -> str:
        return self._displays[token_id]

    @property
    def current_token(self) -> Optional[str]:
        return None if self._prev is None else self._displays[self._prev]

    @property
    def last_prediction(self) -> Optional[Prediction]:
        return self._last_pred

    def table_sizes(self) -> tuple[int, int]:
        """(number of C entries, number of R entries)."""
        return (sum(len(r) for r in self.C.values()),
                sum(len(r) for r in self.R.values()))

    def _intern_letter(self, letter: str) -> int:
        tid = len(self._tokens)
        parts = (letter,)
        self._tokens.append(parts)
        self._displays.append(letter)
        self._ids[parts] = tid
        self._alphabet.add(letter)
        return tid

    def _stage_word(self, parts: Parts) -> str:
        # the word gets an id now but only becomes visible to segmentation
        # after this observe call completes ("from the next letter")
        wid = len(self._tokens)
        self._tokens.append(parts)
        display = "".join(parts)
        self._displays.append(display)
        self._pending_parts = parts
        self._pending_id = wid
        return display

    def _flush_pending(self) -> None:
        if self._pending_parts is None:
            return
        parts = self._pending_parts
        self._ids[parts] = self._pending_id
        for cut in range(1, len(parts)):
            self._proper_prefixes.add(parts[:cut])
        self._pending_parts = None
        self._pending_id = None

    # --------------------------------------------------------------- observe

    def observe(self, letter: str, reward: float = 0.0, *, learn: bool = True) -> ParseEvent:
        """Feed one base symbol; update tables and return what completed."""
        if letter not in self._alphabet:
            if not self.config.open_alphabet:
                raise ValueError(f"symbol {letter!r} is not in the parser alphabet")
            if not learn:
                # frozen mode cannot grow the vocabulary; skip the symbol
                return ParseEvent(None, (), None, 0.0, False)
            self._intern_letter(letter)

        prev_at_pred = self._prev
        completed: list[int] = []
        new_word: Optional[str] = None
        cfg = self.config
        buf = self._buffer
        ids = self._ids
        prefixes = self._proper_prefixes
        buf.append(letter)
        while True:
            if tuple(buf) in prefixes:
                break  # may still extend into a longer word; wait for input
            # close the longest vocabulary token that prefixes the buffer
            for cut in range(len(buf), 0, -1):
                tid = ids.get(tuple(buf[:cut]))
                if tid is not None:
                    break
            del buf[:cut]
            completed.append(tid)
            prev = self._prev
            if learn and prev is not None:
                row = self.C.setdefault(prev, {})
                count = row.get(tid, 0) + 1
                row[tid] = count
                if new_word is None and count > cfg.threshold:
                    parts = self._tokens[prev] + self._tokens[tid]
                    if (len(parts) <= cfg.max_word_len
                            and len(self._tokens) < cfg.max_vocab
                            and parts not in ids):
                        new_word = self._stage_word(parts)
                self.history.append((prev, tid))
            self._prev = tid
            if not buf:
                break

        if learn and reward != 0.0:
            self.apply_reward(reward)

        surprise = 0.0
        matched = False
        if completed and self._last_pred_id is not None:
            first = completed[0]
            pred_id = self._last_pred_id
            if prev_at_pred is not None:
                rrow = self.R.get(prev_at_pred)
                if rrow:
                    surprise = rrow.get(first, 0.0) - rrow.get(pred_id, 0.0)
            matched = first == pred_id
            self._last_pred = None
            self._last_pred_id = None

        self._flush_pending()
        displays = self._displays
        return ParseEvent(
            displays[completed[-1]] if completed else None,
            tuple(displays[t] for t in completed),
            new_word,
            surprise,
            matched,
        )

    def apply_reward(self, reward: float) -> None:
        """Credit ``reward`` backward over the retained transition history.

        The j-th most recent transition receives reward * decay**j.
        """
        if reward == 0.0 or not self.history:
            return
        r = float(reward)
        k = self.config.decay
        R = self.R
        for x, y in reversed(self.history):
            row = R.setdefault(x, {})
            row[y] = row.get(y, 0.0) + r
            r *= k

    # ------------------------------------------------------------ prediction

    def _require_current(self) -> int:
        if self._prev is None:
            raise NoPredictionError("no prediction available: no token completed yet")
        return self._prev

    def _store_prediction(self, token_id: int, forecast: float, fallback: bool) -> Prediction:
        pred = Prediction(self._displays[token_id], forecast, fallback)
        self._last_pred = pred
        self._last_pred_id = token_id
        return pred

    def predict_situation(self) -> Prediction:
        """Most frequent successor of the current token (ties: lowest id)."""
        s_n = self._require_current()
        row = self.C.get(s_n)
        if not row:
            return self._store_prediction(s_n, 0.0, True)
        best_id = -1
        best_count = -1
        for tid, count in row.items():
            if count > best_count or (count == best_count and tid < best_id):
                best_id, best_count = tid, count
        forecast = self.R.get(s_n, {}).get(best_id, 0.0)
        return self._store_prediction(best_id, forecast, False)

    def predict_value(self) -> Prediction:
        """Highest-reward observed successor of the current token."""
        s_n = self._require_current()
        crow = self.C.get(s_n)
        if not crow:
            return self._store_prediction(s_n, 0.0, True)
        rrow = self.R.get(s_n, {})
        best_id = -1
        best_val = None
        for tid in crow:
            val = rrow.get(tid, 0.0)
            if best_val is None or val > best_val or (val == best_val and tid < best_id):
                best_id, best_val = tid, val
        return self._store_prediction(best_id, best_val, False)

    def column_feeling(self, actions: Iterable[str]) -> dict[str, int]:
        """Per-action count of positively rewarded successors of the current token.

        A successor counts toward action ``a`` when it has been observed
        (C > 0), carries strictly positive accumulated reward, and its display
        string starts with ``a``.
        """
        if self.config.mode != "value":
            raise ValueError("column feelings require a value-mode parser")
        s_n = self._require_current()
        counts = {a: 0 for a in actions}
        crow = self.C.get(s_n)
        if not crow:
            return counts
        rrow = self.R.get(s_n, {})
        displays = self._displays
        for tid, count in crow.items():
            if count > 0 and rrow.get(tid, 0.0) > 0.0:
                a = displays[tid][0]
                if a in counts:
                    counts[a] += 1
        return counts

    # ------------------------------------------------------------- lifecycle

    def reset_transient(self) -> None:
        """Drop per-episode state; learned tables and vocabulary persist."""
        self._buffer.clear()
        self.history.clear()
        self._prev = None
        self._last_pred = None
        self._last_pred_id = None

    # ---------------------------------------------------------- serialization

    def dump_tables(self) -> str:
        """One line per known transition: token<TAB>token<TAB>count<TAB>reward."""
        keys: set[tuple[int, int]] = set()
        for p, row in self.C.items():
            keys.update((p, s) for s in row)
        for p, row in self.R.items():
            keys.update((p, s) for s in row)
        displays = self._displays
        lines = []
        for p, s in sorted(keys, key=lambda ps: (displays[ps[0]], displays[ps[1]])):
            count = self.C.get(p, {}).get(s, 0)
            reward = self.R.get(p, {}).get(s, 0.0)
            lines.append(f"{displays[p]}\t{displays[s]}\t{count}\t{reward!r}")
        return "\n".join(lines)

    def state_dict(self) -> dict:
        pred = None
        if self._last_pred is not None:
            pred = [self._last_pred_id, self._last_pred.reward_forecast,
                    self._last_pred.fallback]
        return {
            "config": {
                "max_word_len": self.config.max_word_len,
                "max_vocab": self.config.max_vocab,
                "threshold": self.config.threshold,
                "decay": self.config.decay,
                "memory": self.config.memory,
                "mode": self.config.mode,
                "open_alphabet": self.config.open_alphabet,
            },
            "tokens": [list(parts) for parts in self._tokens],
            "C": [[p, s, c] for p in sorted(self.C) for s, c in sorted(self.C[p].items())],
            "R": [[p, s, r] for p in sorted(self.R) for s, r in sorted(self.R[p].items())],
            "history": [list(t) for t in self.history],
            "buffer": list(self._buffer),
            "prev": self._prev,
            "last_prediction": pred,
        }

    @classmethod
    def from_state(cls, state: dict) -> "Parser":
        config = ParserConfig(**state["config"])
        parser = cls.__new__(cls)
        parser.config = config
        parser._tokens = [tuple(parts) for parts in state["tokens"]]
        parser._displays = ["".join(parts) for parts in parser._tokens]
        parser._ids = {parts: tid for tid, parts in enumerate(parser._tokens)}
        parser._alphabet = {parts[0] for parts in parser._tokens if len(parts) == 1}
        parser._proper_prefixes = set()
        for parts in parser._tokens:
            for cut in range(1, len(parts)):
                parser._proper_prefixes.add(parts[:cut])
        parser.C = {}
        for p, s, c in state["C"]:
            parser.C.setdefault(p, {})[s] = c
        parser.R = {}
        for p, s, r in state["R"]:
            parser.R.setdefault(p, {})[s] = r
        parser.history = deque((tuple(t) for t in state["history"]), maxlen=config.memory)
        parser._buffer = list(state["buffer"])
        parser._prev = state["prev"]
        pred = state["last_prediction"]
        if pred is None:
            parser._last_pred = None
            parser._last_pred_id = None
        else:
            tid, forecast, fallback = pred
            parser._last_pred = Prediction(parser._displays[tid], forecast, bool(fallback))
            parser._last_pred_id = tid
        parser._pending_parts = None
        parser._pending_id = None
        return parser
