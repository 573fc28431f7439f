"""Brute-force machinery for certifying the fast paths.

Everything here favors transparency over speed: full cross-sum enumeration,
regular-grid covering checks, pairwise neighbor LPs, and seeded random model
generation for sweeps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import lp as _lp
from .model import PomdpModel
from .neighbors import NeighborGraph
from .pruning import lark_prune
from .vectorset import AlphaVector, VectorSet, value_at


@dataclass(frozen=True)
class RandomModelSpec:
    num_states: int
    num_actions: int
    num_observations: int
    reward_low: float = -1.0
    reward_high: float = 1.0
    sparsity: float = 0.0
    seed: int = 0
    discount: float = 0.9
    shared_observation_pair: bool = False

    def __post_init__(self):
        if min(self.num_states, self.num_actions, self.num_observations) < 1:
            raise ValueError("counts must be >= 1")
        if not 0.0 <= self.sparsity <= 1.0:
            raise ValueError("sparsity must be in [0, 1]")


def random_pomdp(spec: RandomModelSpec) -> PomdpModel:
    """Seeded random model; rows are symmetric-Dirichlet, optionally sparsified."""
    rng = np.random.default_rng(spec.seed)
    n, na, no = spec.num_states, spec.num_actions, spec.num_observations

    def random_rows(shape_rows, width):
        rows = rng.dirichlet(np.ones(width), size=shape_rows)
        if spec.sparsity > 0.0 and width > 1:
            mask = rng.random(rows.shape) < spec.sparsity
            # never zero a row's largest entry, so every row stays stochastic
            argmax = rows.argmax(axis=-1)
            np.put_along_axis(mask, argmax[..., None], False, axis=-1)
            rows = np.where(mask, 0.0, rows)
            rows /= rows.sum(axis=-1, keepdims=True)
        return rows

    T = random_rows((na, n), n)
    O = random_rows((na, n), no)
    if spec.shared_observation_pair and na >= 2:
        O[1] = O[0]
    R = rng.uniform(spec.reward_low, spec.reward_high, size=(na, n))
    names = tuple(f"s{i}" for i in range(n))
    anames = tuple(f"a{i}" for i in range(na))
    onames = tuple(f"o{i}" for i in range(no))
    return PomdpModel(names, anames, onames, T, O, R, spec.discount)


def exhaustive_dp_update(V: VectorSet, model: PomdpModel,
                         cap: int = 20000) -> VectorSet:
    """Ground-truth DP update: build the whole candidate set, then filter once."""
    n = model.num_states
    total = model.num_actions * len(V) ** model.num_observations
    if total > cap:
        raise ValueError(f"exhaustive update would build {total} vectors (cap {cap})")
    members: list[AlphaVector] = []
    lam = model.discount
    for a in range(model.num_actions):
        per_obs = []
        for o1 in range(model.num_observations):
            # beta(s) = lam * sum_s1 alpha(s1) P(o1|s1,a) P(s1|s,a), by direct sums
            vecs = []
            for m in V:
                beta = np.zeros(n)
                for s in range(n):
                    beta[s] = lam * sum(
                        m.values[s1] * model.observation[a, s1, o1]
                        * model.transition[a, s, s1] for s1 in range(n))
                vecs.append(beta)
            per_obs.append(vecs)
        for combo in itertools.product(*per_obs):
            members.append(AlphaVector(model.reward[a] + sum(combo), action=a))
    result, _ = lark_prune(VectorSet(members))
    return result


def simplex_grid(n: int, resolution: int) -> np.ndarray:
    """All beliefs with entries that are multiples of 1/resolution."""
    points = []
    for combo in itertools.combinations_with_replacement(range(n), resolution):
        counts = np.bincount(combo, minlength=n)
        points.append(counts / resolution)
    return np.array(points)


def grid_covering_check(full: VectorSet, candidate: VectorSet,
                        resolution: int = 50, tol: float = 1e-6) -> bool:
    """Sampled necessary condition: candidate matches full's upper envelope on
    the regular simplex grid."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    grid = simplex_grid(full.dim, resolution)
    full_vals = (full.matrix() @ grid.T).max(axis=0)
    cand_vals = (candidate.matrix() @ grid.T).max(axis=0)
    return bool(np.all(cand_vals >= full_vals - tol))


def brute_force_neighbors(W: VectorSet, limit: int = 30) -> NeighborGraph:
    """Exact neighbor graph by one tie LP per pair.

    Pair (i, j) are neighbors iff some belief ties them strictly above every
    other member of the set.
    """
    k = len(W)
    if k > limit:
        raise ValueError(f"brute force limited to {limit} vectors, got {k}")
    vals = W.matrix() if k else np.zeros((0, 0))
    graph = NeighborGraph(k, exact=True)
    for i in range(k):
        for j in range(i + 1, k):
            others = [vals[p] for p in range(k) if p not in (i, j)]
            program = _lp.make_program(
                W.dim,
                ineq_rows=[(vals[i] - c, 1) for c in others],
                eq_rows=[(vals[i] - vals[j], 0.0)],
            )
            out = _lp.solve_lp(program)
            if out.status == _lp.INFEASIBLE:
                graph.mark_non_neighbor(i, j)
            elif out.status == _lp.OPTIMAL and out.objective_value <= _lp.POS_TOL:
                graph.mark_non_neighbor(i, j)
            # unbounded (k == 2): tie hyperplane crosses the simplex, neighbors
    return graph
