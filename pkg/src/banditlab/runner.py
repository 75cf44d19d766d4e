"""Experiment orchestration: single runs, parallel cells, canonical merging."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import Policy
from .env import (ClassificationBanditEnv, ReplayLogEnv, SyntheticHybridEnv,
                  load_classification_csv, load_news_csv, replay_step,
                  synthetic_hybrid)
from .metrics import RunResult
from .policies import make_policy

ENV_STREAM_SALT = 1  # entropy tag for the per-run context/noise stream


@dataclass(frozen=True)
class EnvSpec:
    """Declarative environment description; hashable so workers can cache."""

    kind: str  # synthetic | classification | news
    path: Optional[str] = None
    label_column: int = -1
    has_header: bool = False
    shuffle_seed: int = 0
    env_seed: int = 0
    d: int = 10
    n_arms: int = 5
    bump_count: int = 3
    noise_sigma: float = 0.05
    radius: float = 0.7

    def build(self):
        if self.kind == "synthetic":
            return synthetic_hybrid(self.env_seed, self.d, self.n_arms,
                                    self.bump_count, self.noise_sigma,
                                    self.radius)
        if self.kind == "classification":
            if not self.path:
                raise ValueError("classification env needs a data path")
            return load_classification_csv(self.path, self.label_column,
                                           self.shuffle_seed, self.has_header)
        if self.kind == "news":
            if not self.path:
                raise ValueError("news env needs a data path")
            return load_news_csv(self.path)
        raise ValueError(f"unknown env kind {self.kind!r}")


_ENV_CACHE: Dict[EnvSpec, object] = {}


def build_env(spec: EnvSpec):
    env = _ENV_CACHE.get(spec)
    if env is None:
        env = spec.build()
        _ENV_CACHE[spec] = env
    return env


def param_slug(params: Dict) -> str:
    """Canonical, filename-safe rendering of a parameter dict."""
    if not params:
        return "default"
    parts = []
    for k in sorted(params):
        v = params[k]
        if isinstance(v, bool):
            s = str(v).lower()
        elif isinstance(v, float):
            s = repr(v)
        else:
            s = str(v)
        parts.append(f"{k}={s}")
    return ",".join(parts)


@dataclass(frozen=True)
class Cell:
    """One run to execute: a policy setting at one seed."""

    policy_id: str
    params: tuple  # sorted (key, value) pairs
    T: int
    seed: int

    @staticmethod
    def make(policy_id: str, params: Dict, T: int, seed: int) -> "Cell":
        return Cell(policy_id=policy_id,
                    params=tuple(sorted(params.items())), T=int(T),
                    seed=int(seed))

    @property
    def params_dict(self) -> Dict:
        return dict(self.params)

    @property
    def slug(self) -> str:
        return param_slug(self.params_dict)

    def sort_key(self) -> tuple:
        return (self.policy_id, self.slug, self.seed)


@dataclass
class TraceRow:
    round: int
    chosen_arm: int
    linear: float
    knn: float
    alpha: float
    width: float
    ucb: float


def run_policy(env, policy: Policy, T: int, seed: int, trace: bool = False,
               params_label: str = "default"):
    """Drive one policy through one environment for up to T rounds.

    Returns (RunResult, trace_rows); trace_rows is None unless requested.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    t0 = time.perf_counter()
    rewards: List[float] = []
    oracle: Optional[List[float]] = None
    trace_rows: Optional[List[TraceRow]] = [] if trace else None

    def note_trace(t: int, x, arm: int) -> None:
        table = policy.score_table(x, t)
        row = table.row(arm)
        trace_rows.append(TraceRow(round=t, chosen_arm=arm, linear=row.linear,
                                   knn=row.knn, alpha=row.alpha,
                                   width=row.width, ucb=row.ucb))

    if isinstance(env, SyntheticHybridEnv):
        oracle = []
        rng = np.random.default_rng([seed, ENV_STREAM_SALT])
        stream = env.play_batch(rng, T)
        for t in range(T):
            x = stream.contexts[t]
            arm = policy.select(x, t)
            if trace:
                note_trace(t, x, arm)
            r = float(stream.realized[t, arm])
            policy.update(arm, x, r)
            rewards.append(r)
            oracle.append(float(stream.realized[t, stream.oracle_arm[t]]))
        matched = T
    elif isinstance(env, ClassificationBanditEnv):
        oracle = []
        horizon = min(T, len(env))
        for t in range(horizon):
            x = env.context(t)
            arm = policy.select(x, t)
            if trace:
                note_trace(t, x, arm)
            fb = env.feedback(t, arm)
            policy.update(arm, x, fb.reward)
            rewards.append(fb.reward)
            oracle.append(fb.oracle_reward)
        matched = horizon
    elif isinstance(env, ReplayLogEnv):
        cursor = 0
        t = 0
        while t < T and cursor < len(env):
            x = env.contexts[cursor]
            arm = policy.select(x, t)
            fb, cursor = replay_step(env, arm, cursor)
            if not fb.step_consumed:
                break
            if trace:
                note_trace(t, x, arm)
            policy.update(arm, x, fb.reward)
            rewards.append(fb.reward)
            t += 1
        matched = t
    else:
        raise TypeError(f"unsupported environment {type(env).__name__}")

    if not rewards:
        raise RuntimeError("no rounds executed (no replay matches?)")
    runtime = time.perf_counter() - t0
    result = RunResult.from_rewards(policy.name, params_label, seed, rewards,
                                    oracle_rewards=oracle,
                                    matched_steps=matched, runtime_s=runtime)
    return result, trace_rows


def run_cell(env_spec: EnvSpec, cell: Cell, trace: bool = False):
    env = build_env(env_spec)
    policy = make_policy(cell.policy_id, env.n_arms, env.dim, seed=cell.seed,
                         **cell.params_dict)
    return run_policy(env, policy, cell.T, cell.seed, trace=trace,
                      params_label=cell.slug)


def _worker(args) -> Tuple[Cell, RunResult]:
    env_spec, cell = args
    result, _ = run_cell(env_spec, cell)
    return cell, result


def execute_cells(env_spec: EnvSpec, cells: Sequence[Cell],
                  jobs: int = 1) -> List[Tuple[Cell, RunResult]]:
    """Run all cells and return them merged in canonical order.

    Parallelism never changes results: each cell owns its state and the merge
    sorts by (policy, params, seed).
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    ordered = sorted(cells, key=Cell.sort_key)
    if jobs == 1 or len(ordered) <= 1:
        out = [(_worker((env_spec, c))) for c in ordered]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_worker, [(env_spec, c) for c in ordered]))
    out.sort(key=lambda pair: pair[0].sort_key())
    return out
