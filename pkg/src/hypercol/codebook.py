"""K-means coder/decoder: real vectors to letter symbols and back.

A fitted codebook is the sensory front end of a hypercolumn: it clusters a
bootstrap sample once, then maps every incoming vector to the symbol of its
nearest centroid and maps symbols back to their centroid vectors. Codebooks
are immutable after fitting and safe to share read-only.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError

MAX_ITERATIONS = 100


class Codebook:
    """K centroid vectors with a contiguous letter range from ``letter_base``.

    Symbol ids are 0..K-1 in centroid order; symbol s displays as the
    codepoint ``letter_base + s``.
    """

    __slots__ = ("centroids", "letter_base", "seed")

    def __init__(self, centroids: np.ndarray, letter_base: str = "A", seed: int = 0):
        centroids = np.array(centroids, dtype=np.float64)
        if centroids.ndim != 2 or centroids.shape[0] < 1 or centroids.shape[1] < 1:
            raise ConfigError("centroids must form a nonempty (K, dim) matrix")
        centroids.setflags(write=False)
        self.centroids = centroids
        self.letter_base = letter_base
        self.seed = seed

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    @property
    def letters(self) -> list[str]:
        base = ord(self.letter_base)
        return [chr(base + s) for s in range(self.k)]

    def encode(self, v: Sequence[float]) -> int:
        """Symbol of the nearest centroid (Euclidean, ties to lowest id)."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.dim,):
            raise ValueError(f"expected vector of dim {self.dim}, got shape {v.shape}")
        d = self.centroids - v
        return int(np.argmin(np.einsum("ij,ij->i", d, d)))

    def decode(self, s: int) -> np.ndarray:
        """Centroid of symbol ``s``, exactly."""
        if not 0 <= s < self.k:
            raise ValueError(f"symbol {s} out of range 0..{self.k - 1}")
        return np.array(self.centroids[s])

    def letter_of(self, s: int) -> str:
        if not 0 <= s < self.k:
            raise ValueError(f"symbol {s} out of range 0..{self.k - 1}")
        return chr(ord(self.letter_base) + s)

    def symbol_of(self, letter: str) -> int:
        if len(letter) != 1:
            raise ValueError(f"expected a single letter, got {letter!r}")
        s = ord(letter) - ord(self.letter_base)
        if not 0 <= s < self.k:
            raise ValueError(f"letter {letter!r} was not issued by this codebook")
        return s

    def encode_letter(self, v: Sequence[float]) -> str:
        return self.letter_of(self.encode(v))

    def __repr__(self) -> str:
        return f"Codebook(k={self.k}, dim={self.dim}, base={self.letter_base!r})"


def fit(dataset: Iterable[Sequence[float]], k: int, seed: int, letter_base: str = "A") -> Codebook:
    """Cluster ``dataset`` into ``k`` centroids and return the codebook.

    k-means++ initialization from ``seed``, Lloyd iterations until no
    assignment changes (or MAX_ITERATIONS), empty clusters re-seeded from the
    farthest point. Deterministic for a fixed seed.
    """
    X = _as_matrix(dataset)
    if k < 1:
        raise ConfigError("cluster count must be >= 1")
    n_distinct = len(np.unique(X, axis=0))
    if k > n_distinct:
        raise ConfigError(
            f"cluster count {k} exceeds the {n_distinct} distinct vectors in the dataset")
    rng = np.random.default_rng(seed)
    centroids, _ = _lloyd(X, k, rng)
    return Codebook(centroids, letter_base=letter_base, seed=seed)


def _as_matrix(dataset: Iterable[Sequence[float]]) -> np.ndarray:
    rows = list(dataset)
    if not rows:
        raise ConfigError("dataset is empty")
    try:
        X = np.asarray(rows, dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(f"dataset vectors have inconsistent dimensions: {exc}") from None
    if X.ndim != 2:
        raise ConfigError("dataset vectors have inconsistent dimensions")
    return X


def _sq_dists(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (n, k) squared Euclidean distances
    diff = X[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _plus_plus_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]), dtype=np.float64)
    centroids[0] = X[int(rng.integers(n))]
    d2 = ((X - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[j] = X[idx]
        d2 = np.minimum(d2, ((X - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _lloyd(X: np.ndarray, k: int, rng: np.random.Generator) -> tuple[np.ndarray, list[float]]:
    """Lloyd iterations; returns (centroids, per-iteration objective history)."""
    n = X.shape[0]
    centroids = _plus_plus_init(X, k, rng)
    assign = np.full(n, -1, dtype=np.int64)
    history: list[float] = []
    for _ in range(MAX_ITERATIONS):
        d2 = _sq_dists(X, centroids)
        new_assign = np.argmin(d2, axis=1)
        dmin = d2[np.arange(n), new_assign]
        # re-seed empty clusters from the currently farthest points
        counts = np.bincount(new_assign, minlength=k)
        for c in np.flatnonzero(counts == 0):
            far = int(np.argmax(dmin))
            new_assign[far] = c
            dmin = dmin.copy()
            dmin[far] = 0.0
        history.append(float(dmin.sum()))
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            members = X[assign == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
    return centroids, history
