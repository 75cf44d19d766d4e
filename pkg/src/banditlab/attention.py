"""Temporal attention exploration schedule and global/local reward statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AttentionParams:
    """Base exploration alpha0 and the global/local mixing weight kappa."""

    alpha0: float
    kappa: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha0) and self.alpha0 >= 0):
            raise ValueError("alpha0 must be >= 0")
        if not (np.isfinite(self.kappa) and 0.0 <= self.kappa <= 1.0):
            raise ValueError("kappa must be in [0, 1]")


class RewardStats:
    """Per-arm reward sums and pull counts; the source for g and n."""

    def __init__(self, n_arms: int):
        if n_arms < 1:
            raise ValueError("need at least one arm")
        self.n_arms = int(n_arms)
        self.per_arm_sum = np.zeros(self.n_arms)
        self.per_arm_count = np.zeros(self.n_arms, dtype=np.int64)

    def record(self, arm: int, reward: float) -> None:
        if not 0 <= arm < self.n_arms:
            raise ValueError(f"arm {arm} out of range")
        if not np.isfinite(reward):
            raise ValueError("reward must be finite")
        self.per_arm_sum[arm] += reward
        self.per_arm_count[arm] += 1

    def local_mean(self, arm: int) -> float:
        """Mean reward of one arm; 0 when the arm was never pulled."""
        if not 0 <= arm < self.n_arms:
            raise ValueError(f"arm {arm} out of range")
        c = self.per_arm_count[arm]
        return float(self.per_arm_sum[arm] / c) if c > 0 else 0.0

    def local_means(self) -> np.ndarray:
        out = np.zeros(self.n_arms)
        pulled = self.per_arm_count > 0
        out[pulled] = self.per_arm_sum[pulled] / self.per_arm_count[pulled]
        return out

    def global_mean(self) -> float:
        """Mean of the per-arm means; unpulled arms contribute 0."""
        return float(self.local_means().mean())


def exploration_rate(params: AttentionParams, N: int, g: float, n: float) -> float:
    """alpha0 / (N + 1) * (kappa*g + (1 - kappa)*n).

    Negative values (possible with negative rewards) pass through unmodified.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    return params.alpha0 / (N + 1) * (params.kappa * g + (1.0 - params.kappa) * n)


def exploration_rates(params: AttentionParams, counts: np.ndarray, g: float,
                      local: np.ndarray) -> np.ndarray:
    """Vectorized exploration_rate across arms."""
    return params.alpha0 / (counts + 1.0) * (params.kappa * g + (1.0 - params.kappa) * local)


def alpha_forward_difference(params: AttentionParams, N: int, g: float, n: float) -> float:
    """exploration_rate(N+1) - exploration_rate(N); negative when the mix is positive."""
    return exploration_rate(params, N + 1, g, n) - exploration_rate(params, N, g, n)


def softmax_attention(counts, gamma_sm: float) -> np.ndarray:
    """Softmax over -gamma_sm * counts, computed with max-subtraction.

    gamma_sm = 0 is accepted and gives exactly uniform weights.
    """
    if not (np.isfinite(gamma_sm) and gamma_sm >= 0):
        raise ValueError("gamma_sm must be >= 0")
    c = np.asarray(counts, dtype=np.float64)
    if c.size == 0:
        raise ValueError("counts must be nonempty")
    z = -gamma_sm * c
    z -= z.max()
    w = np.exp(z)
    return w / w.sum()
