"""LNUCB-TA and the baseline bandit algorithms behind one policy interface."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .attention import (AttentionParams, RewardStats, exploration_rates,
                        softmax_attention)
from .core import Policy, argmax_tiebreak, as_context, round_rng
from .knn import (KnnScore, NeighborStore, _score_prechecked, knn_score,
                  reward_variance, select_k)
from .linear import RidgeState


@dataclass
class PolicyConfig:
    """Tunables of the hybrid policy and its flag-constructible ablations.

    use_attention=False freezes the exploration factor at alpha0;
    use_knn=False drops the neighbor estimator entirely; adaptive_k=False
    pins k at theta_max.
    """

    lam: float = 1.0
    alpha0: float = 1.0
    kappa: float = 0.5
    theta_min: int = 1
    theta_max: int = 5
    gamma_cov: float = 0.0
    variance_scale: float = 1.0
    floor_alpha_at_zero: bool = False
    tie_break: str = "lowest-index"
    store_capacity: Optional[int] = None
    use_attention: bool = True
    use_knn: bool = True
    adaptive_k: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError("lam must be positive")
        if not (np.isfinite(self.alpha0) and self.alpha0 >= 0):
            raise ValueError("alpha0 must be >= 0")
        if not (np.isfinite(self.kappa) and 0.0 <= self.kappa <= 1.0):
            raise ValueError("kappa must be in [0, 1]")
        if not 1 <= int(self.theta_min) <= int(self.theta_max):
            raise ValueError("need 1 <= theta_min <= theta_max")
        if not (np.isfinite(self.gamma_cov) and self.gamma_cov >= 0):
            raise ValueError("gamma_cov must be >= 0")
        if not (np.isfinite(self.variance_scale) and self.variance_scale > 0):
            raise ValueError("variance_scale must be positive")
        if self.tie_break not in ("lowest-index", "seeded-random"):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")


@dataclass(frozen=True)
class ScoreBreakdown:
    """One arm's score decomposition: ucb = linear + knn + alpha*width."""

    linear: float
    knn: float
    alpha: float
    width: float
    ucb: float


@dataclass
class ScoreTable:
    """Per-arm score components for one round; rows align with arm indices."""

    linear: np.ndarray
    knn: np.ndarray
    alpha: np.ndarray
    width: np.ndarray
    ucb: np.ndarray

    def row(self, arm: int) -> ScoreBreakdown:
        return ScoreBreakdown(
            linear=float(self.linear[arm]),
            knn=float(self.knn[arm]),
            alpha=float(self.alpha[arm]),
            width=float(self.width[arm]),
            ucb=float(self.ucb[arm]),
        )


@dataclass
class ArmModel:
    """Per-arm state bundle: ridge regression, neighbor store, pull count."""

    ridge: RidgeState
    neighbors: NeighborStore
    pulls: int = 0


def _zero_table(scores: np.ndarray) -> ScoreTable:
    z = np.zeros_like(scores)
    return ScoreTable(linear=z, knn=z.copy(), alpha=z.copy(), width=z.copy(),
                      ucb=scores)


class TablePolicy(Policy):
    """Policy whose scores come with a component breakdown."""

    def score_table(self, x: np.ndarray, round: int) -> ScoreTable:
        return _zero_table(self.scores(x, round))


class LNUCBTA(TablePolicy):
    """Hybrid linear + adaptive k-NN policy with temporal-attention exploration.

    Per-arm disjoint ridge regression fits the residual reward minus the k-NN
    score; the selection rule is ucb = linear + knn + alpha * width with
    alpha = alpha0/(N+1) * (kappa*g + (1-kappa)*n) when attention is enabled.
    """

    name = "lnucb-ta"

    def __init__(self, n_arms: int, dim: int, config: Optional[PolicyConfig] = None,
                 seed: int = 0):
        config = config if config is not None else PolicyConfig()
        super().__init__(n_arms, dim, seed, config.tie_break)
        self.config = config
        self.arms = [
            ArmModel(
                ridge=RidgeState(dim, config.lam, config.gamma_cov),
                neighbors=NeighborStore(dim, config.store_capacity),
            )
            for _ in range(n_arms)
        ]
        self.stats = RewardStats(n_arms)
        self._attention = AttentionParams(config.alpha0, config.kappa)
        self._mu_stack = np.zeros((n_arms, dim))
        self._inv_stack = np.stack([a.ridge.sigma_inv.copy() for a in self.arms])
        self._round_counter = 0
        # (store versions, context, per-arm KnnScore) from the last scoring
        # pass; update() reuses it when still valid instead of re-querying.
        self._knn_memo = None

    def _k_for_arm(self, arm: int) -> int:
        cfg = self.config
        if not cfg.adaptive_k:
            return cfg.theta_max
        v = reward_variance(self.arms[arm].neighbors) * cfg.variance_scale
        return select_k(v, cfg.theta_min, cfg.theta_max)

    def _knn_for_arm(self, arm: int, x: np.ndarray,
                     xx: Optional[float] = None) -> KnnScore:
        if not self.config.use_knn:
            return KnnScore.not_applied()
        if xx is None:
            xx = float(x @ x)
        return _score_prechecked(self.arms[arm].neighbors, x, xx,
                                 self._k_for_arm(arm))

    def _store_versions(self) -> tuple:
        return tuple(a.neighbors.version for a in self.arms)

    def score_table(self, x: np.ndarray, round: int) -> ScoreTable:
        x = as_context(x, self.dim)
        cfg = self.config
        linear = self._mu_stack @ x
        w2 = np.maximum((self._inv_stack @ x) @ x, 0.0)
        width = np.sqrt(w2)
        knn = np.zeros(self.n_arms)
        if cfg.use_knn:
            xx = float(x @ x)
            per_arm = [self._knn_for_arm(a, x, xx) for a in range(self.n_arms)]
            for a, sc in enumerate(per_arm):
                if sc.applied:
                    knn[a] = sc.score
            self._knn_memo = (self._store_versions(), x.copy(), per_arm)
        if cfg.use_attention:
            local = self.stats.local_means()
            g = float(local.mean())
            counts = self.stats.per_arm_count.astype(np.float64)
            alpha = exploration_rates(self._attention, counts, g, local)
            if cfg.floor_alpha_at_zero:
                np.maximum(alpha, 0.0, out=alpha)
        else:
            alpha = np.full(self.n_arms, cfg.alpha0)
        ucb = linear + knn + alpha * width
        return ScoreTable(linear=linear, knn=knn, alpha=alpha, width=width, ucb=ucb)

    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        return self.score_table(x, round).ucb

    def update(self, arm: int, x: np.ndarray, reward: float) -> None:
        arm = self._check_arm(arm)
        x = as_context(x, self.dim)
        if not np.isfinite(reward):
            raise ValueError("reward must be finite")
        model = self.arms[arm]
        # The residual target is frozen at the selection-round k-NN score.
        # The stores have not changed since then, so the memoized value (when
        # still valid) is exactly what a fresh query would return.
        memo = self._knn_memo
        if (memo is not None and memo[0] == self._store_versions()
                and np.array_equal(memo[1], x)):
            sc = memo[2][arm]
        else:
            sc = self._knn_for_arm(arm, x)
        residual = reward - sc.score
        model.ridge.update(x, residual, sc.u_max * sc.u_max)
        self._mu_stack[arm] = model.ridge.mu_hat
        self._inv_stack[arm] = model.ridge.sigma_inv
        if self.config.use_knn:
            model.neighbors.add(x, reward, self._round_counter)
        model.pulls += 1
        self.stats.record(arm, reward)
        self._round_counter += 1

    def describe(self) -> dict:
        cfg = self.config
        return {
            "policy": self.name, "lam": cfg.lam, "alpha0": cfg.alpha0,
            "kappa": cfg.kappa, "theta_min": cfg.theta_min,
            "theta_max": cfg.theta_max, "gamma_cov": cfg.gamma_cov,
            "variance_scale": cfg.variance_scale,
            "floor_alpha_at_zero": cfg.floor_alpha_at_zero,
            "tie_break": cfg.tie_break, "store_capacity": cfg.store_capacity,
            "use_attention": cfg.use_attention, "use_knn": cfg.use_knn,
            "adaptive_k": cfg.adaptive_k,
        }


def linucb(n_arms: int, dim: int, alpha: float = 1.0, lam: float = 1.0,
           seed: int = 0, **kw) -> LNUCBTA:
    """Disjoint LinUCB: the hybrid rule with a fixed alpha and no k-NN term."""
    cfg = PolicyConfig(lam=lam, alpha0=alpha, use_attention=False,
                       use_knn=False, adaptive_k=False, **kw)
    p = LNUCBTA(n_arms, dim, cfg, seed)
    p.name = "linucb"
    return p


def lin_knn_ucb(n_arms: int, dim: int, alpha: float = 1.0, lam: float = 1.0,
                theta_max: int = 5, seed: int = 0, **kw) -> LNUCBTA:
    """Plain linear + k-NN combination: fixed alpha, fixed k = theta_max."""
    cfg = PolicyConfig(lam=lam, alpha0=alpha, theta_max=theta_max,
                       use_attention=False, use_knn=True, adaptive_k=False, **kw)
    p = LNUCBTA(n_arms, dim, cfg, seed)
    p.name = "lin-knn-ucb"
    return p


class _MeanTracker:
    """Empirical per-arm means with unpulled arms read as 0."""

    def __init__(self, n_arms: int):
        self.stats = RewardStats(n_arms)

    @property
    def counts(self) -> np.ndarray:
        return self.stats.per_arm_count

    def means(self) -> np.ndarray:
        return self.stats.local_means()

    def record(self, arm: int, reward: float) -> None:
        self.stats.record(arm, reward)


class UCB(TablePolicy):
    """Classic UCB on empirical means with bonus rho * sqrt(ln t / N)."""

    name = "ucb"

    def __init__(self, n_arms: int, dim: int = 1, rho: float = 1.0, seed: int = 0,
                 tie_break: str = "lowest-index"):
        super().__init__(n_arms, dim, seed, tie_break)
        if not (np.isfinite(rho) and rho >= 0):
            raise ValueError("rho must be >= 0")
        self.rho = float(rho)
        self._tracker = _MeanTracker(n_arms)

    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        counts = self._tracker.counts
        out = np.full(self.n_arms, np.inf)
        pulled = counts > 0
        if pulled.any():
            lt = math.log(max(round + 1, 1))
            out[pulled] = self._tracker.means()[pulled] + self.rho * np.sqrt(
                lt / counts[pulled])
        return out

    def update(self, arm: int, x: np.ndarray, reward: float) -> None:
        self._tracker.record(self._check_arm(arm), reward)

    def describe(self) -> dict:
        return {"policy": self.name, "rho": self.rho}


def bernoulli_kl(p: float, q: float) -> float:
    """KL(Ber(p) || Ber(q)) with the 0 log 0 = 0 convention."""
    eps = 1e-15
    q = min(max(q, eps), 1.0 - eps)
    out = 0.0
    if p > 0:
        out += p * math.log(p / q)
    if p < 1:
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return out


def klucb_upper(p: float, budget: float, tol: float = 1e-9,
                max_iter: int = 64) -> float:
    """Largest q in [p, 1] with KL(p, q) <= budget, by bisection."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    p = min(max(p, 0.0), 1.0)
    lo, hi = p, 1.0
    for _ in range(max_iter):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        if bernoulli_kl(p, mid) <= budget:
            lo = mid
        else:
            hi = mid
    return lo


class KLUCB(TablePolicy):
    """KL-UCB for [0, 1] rewards: index from the Bernoulli-KL upper bound."""

    name = "kl-ucb"

    def __init__(self, n_arms: int, dim: int = 1, c: float = 1.0, seed: int = 0,
                 tie_break: str = "lowest-index"):
        super().__init__(n_arms, dim, seed, tie_break)
        if not (np.isfinite(c) and c >= 0):
            raise ValueError("c must be >= 0")
        self.c = float(c)
        self._tracker = _MeanTracker(n_arms)

    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        counts = self._tracker.counts
        means = self._tracker.means()
        lt = math.log(max(round + 1, 1))
        out = np.full(self.n_arms, np.inf)
        for a in range(self.n_arms):
            if counts[a] > 0:
                out[a] = klucb_upper(means[a], self.c * lt / counts[a])
        return out

    def update(self, arm: int, x: np.ndarray, reward: float) -> None:
        self._tracker.record(self._check_arm(arm), reward)

    def describe(self) -> dict:
        return {"policy": self.name, "c": self.c}


class EpsilonGreedy(TablePolicy):
    """Greedy on empirical means; explores uniformly with probability eps."""

    name = "eps-greedy"

    def __init__(self, n_arms: int, dim: int = 1, eps: float = 0.1, seed: int = 0,
                 tie_break: str = "lowest-index"):
        super().__init__(n_arms, dim, seed, tie_break)
        if not (np.isfinite(eps) and 0.0 <= eps <= 1.0):
            raise ValueError("eps must be in [0, 1]")
        self.eps = float(eps)
        self._tracker = _MeanTracker(n_arms)

    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        return self._tracker.means()

    def select(self, x: np.ndarray, round: int) -> int:
        x = as_context(x, self.dim)
        rng = round_rng(self.seed, round)
        if self.eps > 0.0 and rng.uniform() < self.eps:
            return int(rng.integers(self.n_arms))
        return argmax_tiebreak(self.scores(x, round), self.tie_break, rng)

    def update(self, arm: int, x: np.ndarray, reward: float) -> None:
        self._tracker.record(self._check_arm(arm), reward)

    def describe(self) -> dict:
        return {"policy": self.name, "eps": self.eps}


class BetaThompson(TablePolicy):
    """Beta-Bernoulli Thompson sampling; rewards are clipped into [0, 1]."""

    name = "beta-thompson"

    def __init__(self, n_arms: int, dim: int = 1, prior_a: float = 1.0,
                 prior_b: float = 1.0, seed: int = 0,
                 tie_break: str = "lowest-index"):
        super().__init__(n_arms, dim, seed, tie_break)
        if prior_a <= 0 or prior_b <= 0:
            raise ValueError("Beta prior parameters must be positive")
        self.prior_a = float(prior_a)
        self.prior_b = float(prior_b)
        self._succ = np.zeros(n_arms)
        self._fail = np.zeros(n_arms)

    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        rng = round_rng(self.seed, round)
        return rng.beta(self.prior_a + self._succ, self.prior_b + self._fail)

    def update(self, arm: int, x: np.ndarray, reward: float) -> None:
        arm = self._check_arm(arm)
        r = min(max(float(reward), 0.0), 1.0)
        self._succ[arm] += r
        self._fail[arm] += 1.0 - r

    def describe(self) -> dict:
        return {"policy": self.name, "prior_a": self.prior_a,
                "prior_b": self.prior_b}


class LinThompson(TablePolicy):
    """Disjoint linear Thompson sampling: score x . mu_tilde, mu_tilde ~ N(mu_hat, v^2 Sigma^-1)."""

    name = "linthompson"

    def __init__(self, n_arms: int, dim: int, v: float = 1.0, lam: float = 1.0,
                 seed: int = 0, tie_break: str = "lowest-index"):
        super().__init__(n_arms, dim, seed, tie_break)
        if not (np.isfinite(v) and v >= 0):
            raise ValueError("v must be >= 0")
        self.v = float(v)
        self.ridge = [RidgeState(dim, lam) for _ in range(n_arms)]
        self._chol = [None] * n_arms

    def _chol_inv(self, arm: int) -> np.ndarray:
        if self._chol[arm] is None:
            self._chol[arm] = np.linalg.cholesky(self.ridge[arm].sigma_inv)
        return self._chol[arm]

    def _sampled_mus(self, round: int) -> np.ndarray:
        rng = round_rng(self.seed, round)
        out = np.empty((self.n_arms, self.dim))
        for a in range(self.n_arms):
            z = rng.standard_normal(self.dim)
            out[a] = self.ridge[a].mu_hat + self.v * (self._chol_inv(a) @ z)
        return out

    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        x = as_context(x, self.dim)
        return self._sampled_mus(round) @ x

    def update(self, arm: int, x: np.ndarray, reward: float) -> None:
        arm = self._check_arm(arm)
        if not np.isfinite(reward):
            raise ValueError("reward must be finite")
        self.ridge[arm].update(x, float(reward), 0.0)
        self._chol[arm] = None

    def describe(self) -> dict:
        return {"policy": self.name, "v": self.v, "lam": self.ridge[0].lam}


class _KnnBank:
    """Per-arm neighbor stores with the variance-adaptive k of the hybrid rule."""

    def __init__(self, n_arms: int, dim: int, theta_min: int = 1,
                 theta_max: int = 5, variance_scale: float = 1.0,
                 store_capacity: Optional[int] = None):
        if not 1 <= int(theta_min) <= int(theta_max):
            raise ValueError("need 1 <= theta_min <= theta_max")
        if not (np.isfinite(variance_scale) and variance_scale > 0):
            raise ValueError("variance_scale must be positive")
        self.theta_min = int(theta_min)
        self.theta_max = int(theta_max)
        self.variance_scale = float(variance_scale)
        self.stores = [NeighborStore(dim, store_capacity) for _ in range(n_arms)]
        self._counter = 0

    def k_for(self, arm: int) -> int:
        v = reward_variance(self.stores[arm]) * self.variance_scale
        return select_k(v, self.theta_min, self.theta_max)

    def query(self, arm: int, x: np.ndarray, strict_gate: bool = True,
              xx: Optional[float] = None) -> KnnScore:
        k = self.k_for(arm)
        store = self.stores[arm]
        if not strict_gate:
            # Baselines fall back to all available entries instead of gating.
            k = min(k, max(len(store), 1))
        if xx is None:
            xx = float(x @ x)
        return _score_prechecked(store, x, xx, k)

    def add(self, arm: int, x: np.ndarray, reward: float) -> None:
        self.stores[arm].add(x, reward, self._counter)
        self._counter += 1


class KnnUCB(TablePolicy):
    """Neighbor-mean estimate plus a distance-scaled bonus rho * u_k.

    Stand-in for the nonparametric UCB baseline family: the adaptive k of the
    hybrid rule supplies the neighborhood, and the largest selected distance
    acts as the uncertainty scale.  Unpulled arms score +inf.
    """

    name = "knn-ucb"

    def __init__(self, n_arms: int, dim: int, rho: float = 1.0, theta_min: int = 1,
                 theta_max: int = 5, variance_scale: float = 1.0,
                 store_capacity: Optional[int] = None, seed: int = 0,
                 tie_break: str = "lowest-index"):
        super().__init__(n_arms, dim, seed, tie_break)
        if not (np.isfinite(rho) and rho >= 0):
            raise ValueError("rho must be >= 0")
        self.rho = float(rho)
        self.bank = _KnnBank(n_arms, dim, theta_min, theta_max, variance_scale,
                             store_capacity)

    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        x = as_context(x, self.dim)
        xx = float(x @ x)
        out = np.full(self.n_arms, np.inf)
        for a in range(self.n_arms):
            if len(self.bank.stores[a]) == 0:
                continue
            sc = self.bank.query(a, x, strict_gate=False, xx=xx)
            out[a] = sc.score + self.rho * sc.u_max
        return out

    def update(self, arm: int, x: np.ndarray, reward: float) -> None:
        arm = self._check_arm(arm)
        self.bank.add(arm, as_context(x, self.dim), float(reward))

    def describe(self) -> dict:
        return {"policy": self.name, "rho": self.rho,
                "theta_min": self.bank.theta_min,
                "theta_max": self.bank.theta_max}


class KnnKLUCB(KnnUCB):
    """Neighbor-mean KL-UCB: Bernoulli-KL upper bound with the neighbor count as evidence."""

    name = "knn-kl-ucb"

    def __init__(self, n_arms: int, dim: int, c: float = 1.0, **kw):
        super().__init__(n_arms, dim, rho=0.0, **kw)
        if not (np.isfinite(c) and c >= 0):
            raise ValueError("c must be >= 0")
        self.c = float(c)

    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        x = as_context(x, self.dim)
        xx = float(x @ x)
        lt = math.log(max(round + 1, 1))
        out = np.full(self.n_arms, np.inf)
        for a in range(self.n_arms):
            if len(self.bank.stores[a]) == 0:
                continue
            sc = self.bank.query(a, x, strict_gate=False, xx=xx)
            out[a] = klucb_upper(sc.score, self.c * lt / sc.k_used)
        return out

    def describe(self) -> dict:
        return {"policy": self.name, "c": self.c,
                "theta_min": self.bank.theta_min,
                "theta_max": self.bank.theta_max}


class RandomPolicy(TablePolicy):
    """Uniform-random arm choice; the sanity anchor for regret diagnostics."""

    name = "random"

    def __init__(self, n_arms: int, dim: int = 1, seed: int = 0):
        super().__init__(n_arms, dim, seed)

    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        return round_rng(self.seed, round).uniform(size=self.n_arms)

    def update(self, arm: int, x: np.ndarray, reward: float) -> None:
        self._check_arm(arm)

    def describe(self) -> dict:
        return {"policy": self.name}


class _EnhancedBase(TablePolicy):
    """Shared plumbing for the attention-and-knn augmented baselines.

    Value estimates gain the adaptive k-NN score; the base policy's
    exploration knob is scaled by the softmax attention weight of the arm
    (fewer pulls mean more weight).
    """

    def __init__(self, n_arms: int, dim: int, gamma_sm: float = 1.0,
                 theta_min: int = 1, theta_max: int = 5,
                 variance_scale: float = 1.0,
                 store_capacity: Optional[int] = None, seed: int = 0,
                 tie_break: str = "lowest-index"):
        super().__init__(n_arms, dim, seed, tie_break)
        if not (np.isfinite(gamma_sm) and gamma_sm >= 0):
            raise ValueError("gamma_sm must be >= 0")
        self.gamma_sm = float(gamma_sm)
        self.bank = _KnnBank(n_arms, dim, theta_min, theta_max, variance_scale,
                             store_capacity)
        self.stats = RewardStats(n_arms)

    def attention_weights(self) -> np.ndarray:
        return softmax_attention(self.stats.per_arm_count, self.gamma_sm)

    def knn_vector(self, x: np.ndarray) -> np.ndarray:
        xx = float(x @ x)
        out = np.zeros(self.n_arms)
        for a in range(self.n_arms):
            sc = self.bank.query(a, x, strict_gate=True, xx=xx)
            if sc.applied:
                out[a] = sc.score
        return out

    def _record(self, arm: int, x: np.ndarray, reward: float) -> None:
        self.bank.add(arm, x, reward)
        self.stats.record(arm, reward)


class EnhancedEpsilonGreedy(_EnhancedBase):
    """Epsilon-greedy over knn-augmented means with attention-scaled epsilon.

    The explore probability becomes eps times the attention weight of the
    greedy arm, so a heavily pulled favorite damps exploration.
    """

    name = "enhanced-eps-greedy"

    def __init__(self, n_arms: int, dim: int, eps: float = 0.1, **kw):
        super().__init__(n_arms, dim, **kw)
        if not (np.isfinite(eps) and 0.0 <= eps <= 1.0):
            raise ValueError("eps must be in [0, 1]")
        self.eps = float(eps)

    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        x = as_context(x, self.dim)
        return self.stats.local_means() + self.knn_vector(x)

    def select(self, x: np.ndarray, round: int) -> int:
        x = as_context(x, self.dim)
        rng = round_rng(self.seed, round)
        s = self.scores(x, round)
        greedy = argmax_tiebreak(s, "lowest-index")
        eps_eff = self.eps * float(self.attention_weights()[greedy])
        if eps_eff > 0.0 and rng.uniform() < eps_eff:
            return int(rng.integers(self.n_arms))
        if self.tie_break == "seeded-random":
            return argmax_tiebreak(s, self.tie_break, rng)
        return greedy

    def update(self, arm: int, x: np.ndarray, reward: float) -> None:
        arm = self._check_arm(arm)
        self._record(arm, as_context(x, self.dim), float(reward))

    def describe(self) -> dict:
        return {"policy": self.name, "eps": self.eps, "gamma_sm": self.gamma_sm}


class EnhancedBetaThompson(_EnhancedBase):
    """Thompson sampling whose posterior draw is attention-scaled and knn-shifted.

    Score = posterior mean + (draw - posterior mean) * weight + knn score;
    uniform pull counts leave the draw untouched.
    """

    name = "enhanced-beta-thompson"

    def __init__(self, n_arms: int, dim: int, prior_a: float = 1.0,
                 prior_b: float = 1.0, **kw):
        super().__init__(n_arms, dim, **kw)
        if prior_a <= 0 or prior_b <= 0:
            raise ValueError("Beta prior parameters must be positive")
        self.prior_a = float(prior_a)
        self.prior_b = float(prior_b)
        self._succ = np.zeros(n_arms)
        self._fail = np.zeros(n_arms)

    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        x = as_context(x, self.dim)
        rng = round_rng(self.seed, round)
        a = self.prior_a + self._succ
        b = self.prior_b + self._fail
        draw = rng.beta(a, b)
        post_mean = a / (a + b)
        w = self.attention_weights() * self.n_arms
        return post_mean + (draw - post_mean) * w + self.knn_vector(x)

    def update(self, arm: int, x: np.ndarray, reward: float) -> None:
        arm = self._check_arm(arm)
        r = min(max(float(reward), 0.0), 1.0)
        self._succ[arm] += r
        self._fail[arm] += 1.0 - r
        self._record(arm, as_context(x, self.dim), float(reward))

    def describe(self) -> dict:
        return {"policy": self.name, "prior_a": self.prior_a,
                "prior_b": self.prior_b, "gamma_sm": self.gamma_sm}


class EnhancedLinThompson(_EnhancedBase):
    """Linear Thompson sampling with attention-scaled draws and knn shift."""

    name = "enhanced-linthompson"

    def __init__(self, n_arms: int, dim: int, v: float = 1.0, lam: float = 1.0,
                 **kw):
        super().__init__(n_arms, dim, **kw)
        if not (np.isfinite(v) and v >= 0):
            raise ValueError("v must be >= 0")
        self.v = float(v)
        self.ridge = [RidgeState(dim, lam) for _ in range(n_arms)]
        self._chol = [None] * n_arms

    def scores(self, x: np.ndarray, round: int) -> np.ndarray:
        x = as_context(x, self.dim)
        rng = round_rng(self.seed, round)
        w = self.attention_weights() * self.n_arms
        out = np.empty(self.n_arms)
        for a in range(self.n_arms):
            if self._chol[a] is None:
                self._chol[a] = np.linalg.cholesky(self.ridge[a].sigma_inv)
            z = rng.standard_normal(self.dim)
            mean = self.ridge[a].predict(x)
            draw = mean + self.v * float(x @ (self._chol[a] @ z))
            out[a] = mean + (draw - mean) * w[a]
        return out + self.knn_vector(x)

    def update(self, arm: int, x: np.ndarray, reward: float) -> None:
        arm = self._check_arm(arm)
        x = as_context(x, self.dim)
        self.ridge[arm].update(x, float(reward), 0.0)
        self._chol[arm] = None
        self._record(arm, x, float(reward))

    def describe(self) -> dict:
        return {"policy": self.name, "v": self.v, "gamma_sm": self.gamma_sm}


def enhanced_variant(base: str, n_arms: int, dim: int, seed: int = 0, **params):
    """Construct an attention-and-knn augmented baseline by base id."""
    table = {
        "beta-thompson": EnhancedBetaThompson,
        "eps-greedy": EnhancedEpsilonGreedy,
        "linthompson": EnhancedLinThompson,
    }
    if base not in table:
        raise ValueError(f"unknown enhanced base {base!r}")
    return table[base](n_arms, dim, seed=seed, **params)


_CONFIG_KEYS = ("lam", "alpha0", "kappa", "theta_min", "theta_max", "gamma_cov",
                "variance_scale", "floor_alpha_at_zero", "tie_break",
                "store_capacity", "use_attention", "use_knn", "adaptive_k")


def make_policy(policy_id: str, n_arms: int, dim: int, seed: int = 0,
                **params) -> Policy:
    """Build a policy by its canonical id with keyword parameters."""
    pid = policy_id.lower()
    if pid == "lnucb-ta":
        unknown = set(params) - set(_CONFIG_KEYS)
        if unknown:
            raise ValueError(f"unknown lnucb-ta parameters: {sorted(unknown)}")
        return LNUCBTA(n_arms, dim, PolicyConfig(**params), seed)
    if pid == "linucb":
        return linucb(n_arms, dim, seed=seed, **params)
    if pid == "lin-knn-ucb":
        return lin_knn_ucb(n_arms, dim, seed=seed, **params)
    if pid == "ucb":
        return UCB(n_arms, dim, seed=seed, **params)
    if pid == "kl-ucb":
        return KLUCB(n_arms, dim, seed=seed, **params)
    if pid == "eps-greedy":
        return EpsilonGreedy(n_arms, dim, seed=seed, **params)
    if pid == "beta-thompson":
        return BetaThompson(n_arms, dim, seed=seed, **params)
    if pid == "linthompson":
        return LinThompson(n_arms, dim, seed=seed, **params)
    if pid == "knn-ucb":
        return KnnUCB(n_arms, dim, seed=seed, **params)
    if pid == "knn-kl-ucb":
        return KnnKLUCB(n_arms, dim, seed=seed, **params)
    if pid == "random":
        return RandomPolicy(n_arms, dim, seed=seed)
    if pid.startswith("enhanced-"):
        return enhanced_variant(pid[len("enhanced-"):], n_arms, dim, seed=seed,
                                **params)
    raise ValueError(f"unknown policy id {policy_id!r}")
