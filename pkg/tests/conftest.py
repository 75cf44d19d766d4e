"""Shared benchmark fixtures: the synthetic suite every ordering test reuses."""
import time
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
import pytest

from banditlab.runner import Cell, EnvSpec, execute_cells

# One benchmark setting shared by the ordering, robustness, and ablation
# tests.  Everything here is frozen: the tests below compare policies on
# byte-identical reward streams, so their margins are reproducible.
SUITE_SPEC = EnvSpec(kind="synthetic", d=10, n_arms=5, bump_count=3,
                     noise_sigma=0.06, env_seed=0, radius=0.7)
SUITE_T = 2000
SUITE_SEEDS = tuple(range(20))

# Hybrid-policy settings used across the suite (alpha0 varies per run).
HYBRID_PARAMS = {
    "variance_scale": 50.0,
    "theta_min": 4,
    "kappa": 1.0,
    "floor_alpha_at_zero": True,
    "lam": 0.1,
    "gamma_cov": 0.05,
}
ALPHA0_GRID = (0.1, 1.0, 10.0)

# Baseline parameter grids; each baseline competes at its best grid point.
ALPHA_GRID = (0.01, 0.05, 0.1, 0.5, 1.0, 10.0)
RHO_GRID = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
EPS_GRID = (0.01, 0.05, 0.1, 0.2, 0.25, 0.5)


@dataclass
class SuiteData:
    """Final rewards per (policy, slug, seed) plus the wall time of the run."""

    finals: Dict[Tuple[str, str], np.ndarray] = field(default_factory=dict)
    mean_rewards: Dict[Tuple[str, str], np.ndarray] = field(default_factory=dict)
    wall_s: float = 0.0

    def keys_for(self, policy_id: str):
        return [k for k in self.finals if k[0] == policy_id]

    def grid_means(self, policy_id: str) -> Dict[str, float]:
        return {k[1]: float(self.finals[k].mean())
                for k in self.keys_for(policy_id)}

    def best_key(self, policy_id: str) -> Tuple[str, str]:
        return max(self.keys_for(policy_id),
                   key=lambda k: self.finals[k].mean())


def _suite_cells():
    cells = []
    for a0 in ALPHA0_GRID:
        params = dict(alpha0=a0, **HYBRID_PARAMS)
        cells += [Cell.make("lnucb-ta", params, SUITE_T, s) for s in SUITE_SEEDS]
    for a in ALPHA_GRID:
        cells += [Cell.make("linucb", {"alpha": a}, SUITE_T, s)
                  for s in SUITE_SEEDS]
        cells += [Cell.make("lin-knn-ucb",
                            {"alpha": a, "variance_scale": 50.0}, SUITE_T, s)
                  for s in SUITE_SEEDS]
    for rho in RHO_GRID:
        cells += [Cell.make("knn-ucb", {"rho": rho, "variance_scale": 50.0},
                            SUITE_T, s)
                  for s in SUITE_SEEDS]
    return cells


@pytest.fixture(scope="session")
def synthetic_suite() -> SuiteData:
    """Run the full benchmark once per session; ~420 runs, about 1.5 min."""
    t0 = time.perf_counter()
    pairs = execute_cells(SUITE_SPEC, _suite_cells(), jobs=1)
    wall = time.perf_counter() - t0
    by_key: Dict[Tuple[str, str], Dict[int, Tuple[float, float]]] = {}
    for cell, result in pairs:
        by_key.setdefault((cell.policy_id, cell.slug), {})[cell.seed] = (
            result.final_cumulative_reward(), result.final_mean_reward())
    data = SuiteData(wall_s=wall)
    for key, per_seed in by_key.items():
        data.finals[key] = np.array([per_seed[s][0] for s in SUITE_SEEDS])
        data.mean_rewards[key] = np.array([per_seed[s][1] for s in SUITE_SEEDS])
    return data


def alpha0_of(slug: str) -> float:
    for part in slug.split(","):
        k, _, v = part.partition("=")
        if k == "alpha0":
            return float(v)
    raise KeyError(f"no alpha0 in {slug!r}")
