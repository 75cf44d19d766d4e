"""Shared domain types, deterministic randomness, and the policy interface."""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

RNG_ALGORITHM = "pcg64"


def as_context(values, dim: Optional[int] = None) -> np.ndarray:
    """Validate and return a context vector as a float64 array.

    Raises ValueError on non-finite entries or on a dimension mismatch
    with ``dim`` when given.
    """
    if isinstance(values, np.ndarray) and values.dtype == np.float64:
        x = values
    else:
        x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"context must be 1-D, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("context contains non-finite entries")
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"context dimension {x.shape[0]} != expected {dim}")
    return x


@dataclass(frozen=True)
class RewardSample:
    """One observed reward and the round it arrived in."""

    value: float
    round: int

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError("reward must be finite")
        if self.round < 0:
            raise ValueError("round must be nonnegative")


@dataclass
class RoundRecord:
    """One interaction: context, chosen arm, realized reward, optional per-arm scores."""

    round: int
    context: np.ndarray
    chosen_arm: int
    reward: float
    per_arm_scores: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.round < 0:
            raise ValueError("round must be nonnegative")
        if not np.isfinite(self.reward):
            raise ValueError("reward must be finite")


@dataclass(frozen=True)
class RngState:
    """Seed plus generator identifier; same seed gives the same stream everywhere."""

    seed: int
    algorithm: str = RNG_ALGORITHM

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def round_rng(seed: int, round: int) -> np.random.Generator:
    """Generator keyed by (seed, round).

    Stochastic policies draw per-call randomness from here instead of a
    stored generator, so select() never mutates policy state and repeated
    calls with the same arguments return the same choice.
    """
    return np.random.default_rng([seed, round])


def argmax_tiebreak(
    scores: np.ndarray,
    tie_break: str = "lowest-index",
    rng: Optional[np.random.Generator] = None,
) -> int:
    """Argmax over a finite score vector with a deterministic tie rule.

    "lowest-index": first maximal entry wins. "seeded-random": a uniform
    draw from ``rng`` among the exactly-maximal entries.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("no arms to select from")
    if tie_break == "lowest-index":
        return int(np.argmax(scores))
    if tie_break == "seeded-random":
        if rng is None:
            raise ValueError("seeded-random tie-break needs an rng")
        ties = np.flatnonzero(scores == scores.max())
        return int(ties[rng.integers(len(ties))])
    raise ValueError(f"unknown tie_break {tie_break!r}")


class Policy(ABC):
    """Common interface for every bandit algorithm in this package.

    ``select`` is pure with respect to policy state; ``update`` mutates only
    the chosen arm's model plus the global reward statistics.
    """

    name: str = "policy"

    def __init__(self, n_arms: int, dim: int, seed: int = 0,
                 tie_break: str = "lowest-index"):
        if n_arms < 1:
            raise ValueError("need at least one arm")
        if dim < 1:
            raise ValueError("context dimension must be >= 1")
        self.n_arms = int(n_arms)
        self.dim = int(dim)
        self.seed = int(seed)
        self.tie_break = tie_break

    @abstractmethod
    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        """Per-arm selection scores for this context; pure."""

    @abstractmethod
    def update(self, arm: int, x: np.ndarray, reward: float) -> None:
        """Fold one observed (arm, context, reward) into the model."""

    def select(self, x: np.ndarray, round: int) -> int:
        x = as_context(x, self.dim)
        s = self.scores(x, round)
        rng = round_rng(self.seed, round) if self.tie_break == "seeded-random" else None
        return argmax_tiebreak(s, self.tie_break, rng)

    def _check_arm(self, arm: int) -> int:
        arm = int(arm)
        if not 0 <= arm < self.n_arms:
            raise ValueError(f"arm {arm} out of range [0, {self.n_arms})")
        return arm

    def describe(self) -> dict:
        """Parameter echo for run metadata."""
        return {"policy": self.name}
