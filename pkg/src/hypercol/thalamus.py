"""Routing hub: fixed sensor sampling, action coding, composite building.

The thalamus draws a fixed random sampling plan at initialization (p index
subsets of size m over the sensor dimensions), routes each incoming sensor
vector to the matching subvectors, quantizes actuator vectors through a
dedicated action coder (lowercase letters, no parser attached), and builds
the 4-letter composite symbols consumed by second-layer columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import codebook as cb
from .errors import ConfigError


@dataclass(frozen=True)
class SamplingPlan:
    """Immutable index subsets over sensor dimensions."""

    subsets: tuple[tuple[int, ...], ...]
    seed: int

    def describe(self) -> str:
        return "\n".join(
            f"subset_{i}: [{', '.join(str(j) for j in s)}]"
            for i, s in enumerate(self.subsets))


def make_plan(sensor_dim: int, p: int, m: int, seed: int,
              disjoint: bool = False) -> SamplingPlan:
    """Draw p subsets of m distinct sensor indices (subsets may overlap)."""
    if m < 1 or m > sensor_dim:
        raise ConfigError(f"subset size m={m} must be in 1..sensor_dim={sensor_dim}")
    if p < 3:
        raise ConfigError("need p >= 3 subsets to form a second-layer triple")
    rng = np.random.default_rng(seed)
    if disjoint:
        if p * m > sensor_dim:
            raise ConfigError(
                f"disjoint subsets need p*m <= sensor_dim ({p}*{m} > {sensor_dim})")
        perm = rng.permutation(sensor_dim)
        subsets = tuple(tuple(int(i) for i in perm[k * m:(k + 1) * m]) for k in range(p))
    else:
        subsets = tuple(
            tuple(int(i) for i in rng.choice(sensor_dim, size=m, replace=False))
            for _ in range(p))
    return SamplingPlan(subsets, seed)


class ActionCoder:
    """Actuator-vector quantizer with no parser attached (letter base 'a')."""

    def __init__(self, actuator_dim: int, clusters: int, seed: int):
        if clusters < 1:
            raise ConfigError("action cluster count must be >= 1")
        self.actuator_dim = actuator_dim
        self.clusters = clusters
        self.seed = seed
        self.codebook: Optional[cb.Codebook] = None
        self.bootstrap: list[tuple[float, ...]] = []
        self._seen: set[tuple[float, ...]] = set()

    @property
    def ready(self) -> bool:
        return self.codebook is not None

    def collect(self, actuator: Sequence[float]) -> None:
        key = tuple(float(x) for x in actuator)
        if len(key) != self.actuator_dim:
            raise ValueError(f"expected actuator dim {self.actuator_dim}, got {len(key)}")
        if key not in self._seen:
            self._seen.add(key)
            self.bootstrap.append(key)

    def try_fit(self) -> bool:
        """Fit once enough distinct actuator vectors have been collected."""
        if self.codebook is None and len(self._seen) >= self.clusters:
            self.codebook = cb.fit(self.bootstrap, self.clusters, self.seed,
                                   letter_base="a")
            return True
        return False

    def letter(self, actuator: Sequence[float]) -> Optional[str]:
        if self.codebook is None:
            return None
        return self.codebook.encode_letter(np.asarray(actuator, dtype=np.float64))

    def letters(self) -> list[str]:
        if self.codebook is None:
            return []
        return self.codebook.letters

    def decode(self, letter: str) -> np.ndarray:
        if self.codebook is None:
            raise RuntimeError("action coder is not fitted yet")
        return self.codebook.decode(self.codebook.symbol_of(letter))


class Thalamus:
    """Owns the sampling plan and the action coder; routes and composes."""

    def __init__(self, sensor_dim: int, actuator_dim: int, p: int, m: int,
                 seed: int, action_clusters: int, *, disjoint_subsets: bool = False,
                 action_seed: Optional[int] = None):
        self.sensor_dim = sensor_dim
        self.actuator_dim = actuator_dim
        self.plan = make_plan(sensor_dim, p, m, seed, disjoint=disjoint_subsets)
        self._index_arrays = [np.asarray(s, dtype=np.intp) for s in self.plan.subsets]
        self.action_coder = ActionCoder(
            actuator_dim, action_clusters,
            seed if action_seed is None else action_seed)

    @property
    def p(self) -> int:
        return len(self.plan.subsets)

    def route(self, sensor: Sequence[float]) -> list[np.ndarray]:
        """Subvector per subset, in stored index order. Pure function of the plan."""
        sensor = np.asarray(sensor, dtype=np.float64)
        if sensor.shape != (self.sensor_dim,):
            raise ValueError(
                f"expected sensor dim {self.sensor_dim}, got shape {sensor.shape}")
        return [sensor[idx] for idx in self._index_arrays]

    def compose(self, action_letter: Optional[str],
                substrate_letters: Sequence[Optional[str]]) -> Optional[str]:
        """4-letter composite, or None while any contributor is missing."""
        if action_letter is None:
            return None
        if len(substrate_letters) != 3 or any(l is None for l in substrate_letters):
            return None
        return action_letter + "".join(substrate_letters)
