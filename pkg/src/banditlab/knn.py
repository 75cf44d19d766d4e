"""Per-arm neighbor store and the variance-adaptive k-NN reward estimator."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import as_context


@dataclass(frozen=True)
class KnnScore:
    """Result of one k-NN query: mean neighbor reward plus uncertainty radius."""

    score: float
    k_used: int
    u_max: float
    applied: bool

    @staticmethod
    def not_applied() -> "KnnScore":
        return KnnScore(score=0.0, k_used=0, u_max=0.0, applied=False)


class NeighborStore:
    """Ordered (context, reward, round) history for one arm.

    Backed by preallocated arrays that double on growth; an optional capacity
    turns the store into a ring that evicts the oldest entry.  Rounds are
    strictly increasing, so entry order is insertion order.
    """

    def __init__(self, dim: int, capacity: Optional[int] = None):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if capacity is not None and capacity < 1:
            raise ValueError("capacity must be >= 1 when set")
        self.dim = int(dim)
        self.capacity = capacity
        size = capacity if capacity is not None else 16
        self._ctx = np.empty((size, dim))
        self._ctx_norm2 = np.empty(size)
        self._rewards = np.empty(size)
        self._rounds = np.empty(size, dtype=np.int64)
        self._n = 0
        self._last_round = -1
        self._version = 0
        self._var_cache: Optional[tuple] = None

    def __len__(self) -> int:
        return self._n

    def add(self, context, reward: float, round: int) -> None:
        x = as_context(context, self.dim)
        if not np.isfinite(reward):
            raise ValueError("reward must be finite")
        if round <= self._last_round:
            raise ValueError("rounds must be strictly increasing")
        self._last_round = int(round)
        if self.capacity is not None and self._n == self.capacity:
            # Ring eviction: drop the oldest entry.
            self._ctx[:-1] = self._ctx[1:]
            self._ctx_norm2[:-1] = self._ctx_norm2[1:]
            self._rewards[:-1] = self._rewards[1:]
            self._rounds[:-1] = self._rounds[1:]
            self._n -= 1
        elif self._n == self._ctx.shape[0]:
            grow = self._ctx.shape[0] * 2
            self._ctx = np.vstack([self._ctx, np.empty((grow - self._n, self.dim))])
            self._ctx_norm2 = np.append(self._ctx_norm2, np.empty(grow - self._n))
            self._rewards = np.append(self._rewards, np.empty(grow - self._n))
            self._rounds = np.append(self._rounds, np.empty(grow - self._n, dtype=np.int64))
        i = self._n
        self._ctx[i] = x
        self._ctx_norm2[i] = float(x @ x)
        self._rewards[i] = float(reward)
        self._rounds[i] = int(round)
        self._n += 1
        self._version += 1

    @property
    def version(self) -> int:
        """Counts mutations; lets callers cache derived quantities."""
        return self._version

    @property
    def contexts(self) -> np.ndarray:
        return self._ctx[: self._n]

    @property
    def rewards(self) -> np.ndarray:
        return self._rewards[: self._n]

    @property
    def rounds(self) -> np.ndarray:
        return self._rounds[: self._n]


def reward_variance(store: NeighborStore) -> float:
    """Population variance of stored rewards; 0 with fewer than 2 entries.

    Memoized against the store version so per-round re-queries are O(1).
    """
    cached = store._var_cache
    if cached is not None and cached[0] == store._version:
        return cached[1]
    n = len(store)
    if n < 2:
        v = 0.0
    else:
        r = store.rewards
        mean = float(r.mean())
        v = max(float((r * r).mean()) - mean * mean, 0.0)
    store._var_cache = (store._version, v)
    return v


def select_k(variance: float, theta_min: int, theta_max: int) -> int:
    """Interpolate k between theta_min and theta_max by (clamped) reward variance.

    Round-half-up to an integer, then clamp to [theta_min, theta_max].
    """
    theta_min = int(theta_min)
    theta_max = int(theta_max)
    if not 1 <= theta_min <= theta_max:
        raise ValueError("need 1 <= theta_min <= theta_max")
    if not (math.isfinite(variance) and variance >= 0):
        raise ValueError("variance must be finite and >= 0")
    v = min(max(float(variance), 0.0), 1.0)
    k = math.floor(theta_min + (theta_max - theta_min) * v + 0.5)
    return min(max(k, theta_min), theta_max)


def _select_neighbors(d2: np.ndarray, rounds: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest distances, ties broken by lower round.

    Returned in (distance, round) order so downstream float arithmetic is
    reproducible regardless of how candidates were found.
    """
    n = d2.shape[0]
    if n == k:
        cand = np.arange(n)
    else:
        part = np.argpartition(d2, k - 1)
        kth = d2[part[k - 1]]
        cand = np.flatnonzero(d2 <= kth)
    order = np.lexsort((rounds[cand], d2[cand]))
    return cand[order[:k]]


def _score_prechecked(store: NeighborStore, x: np.ndarray, xx: float,
                      k: int) -> KnnScore:
    """knn_score body for already-validated input; hot-path entry."""
    n = store._n
    if n < k:
        return KnnScore.not_applied()
    # ||c - x||^2 = ||c||^2 - 2 c.x + ||x||^2 with cached row norms.
    d2 = store._ctx[:n] @ x
    d2 *= -2.0
    d2 += store._ctx_norm2[:n]
    d2 += xx
    np.maximum(d2, 0.0, out=d2)
    sel = _select_neighbors(d2, store._rounds[:n], k)
    score = float(np.add.reduce(store._rewards[:n][sel]) / k)
    u_max = float(np.sqrt(d2[sel[-1]]))
    return KnnScore(score=score, k_used=k, u_max=u_max, applied=True)


def knn_score(store: NeighborStore, x, k: int) -> KnnScore:
    """Mean reward of the k nearest stored contexts (Euclidean distance).

    Applies only when the store holds at least k entries; ties at equal
    distance go to the lower round.  u_max is the largest selected distance.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    x = as_context(x, store.dim)
    return _score_prechecked(store, x, float(x @ x), k)


def knn_score_bruteforce(store: NeighborStore, x, k: int) -> KnnScore:
    """Full-sort oracle with the same contract as knn_score; test use only."""
    if k < 1:
        raise ValueError("k must be >= 1")
    x = as_context(x, store.dim)
    n = len(store)
    if n < k:
        return KnnScore.not_applied()
    d2 = store._ctx_norm2[:n] - 2.0 * (store.contexts @ x) + float(x @ x)
    np.maximum(d2, 0.0, out=d2)
    order = np.lexsort((store.rounds, d2))
    sel = order[:k]
    score = float(np.add.reduce(store.rewards[sel]) / k)
    u_max = float(np.sqrt(d2[sel[-1]]))
    return KnnScore(score=score, k_used=k, u_max=u_max, applied=True)
