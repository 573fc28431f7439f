"""Value iteration, stopping on the exact Bellman residual, plus policy tools."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lp as _lp
from .dp import DpConfig, DpStats, dp_update
from .model import PomdpModel, belief_update, observation_prob
from .neighbors import full_graph
from .vectorset import AlphaVector, VectorSet, WITNESS, value_at


@dataclass
class SolveConfig:
    epsilon: float = 0.01
    max_iterations: int = 1000
    dp: DpConfig = field(default_factory=DpConfig)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class SolveResult:
    value_function: VectorSet
    iterations_run: int
    converged: bool
    residual_history: list[float]
    per_iteration_stats: list[DpStats]


def _one_sided_gap(A: VectorSet, B: VectorSet) -> float:
    """max over beliefs of (max_A alpha.b - max_B beta.b), one LP per alpha."""
    gap = -np.inf
    b_vals = B.matrix()
    for m in A:
        program = _lp.make_program(
            A.dim, ineq_rows=[(m.values - row, 1) for row in b_vals])
        out = _lp.solve_lp(program)
        if out.status != _lp.OPTIMAL:
            raise _lp.LpError(f"residual LP returned {out.status}")
        gap = max(gap, out.objective_value)
    return gap


def bellman_residual(V_t: VectorSet, V_prev: VectorSet) -> float:
    """Exact sup-norm distance between the two represented functions."""
    if len(V_t) == 0 or len(V_prev) == 0 or V_t.dim != V_prev.dim:
        raise ValueError("residual needs two nonempty same-dimension sets")
    return max(_one_sided_gap(V_t, V_prev), _one_sided_gap(V_prev, V_t), 0.0)


def initial_value_function(model: PomdpModel) -> VectorSet:
    """V0 = 0, with a witness point and trivial exact graph for bootstrapping."""
    n = model.num_states
    zero = AlphaVector(np.zeros(n),
                       support_point=np.full(n, 1.0 / n),
                       support_kind=WITNESS)
    V = VectorSet([zero])
    V.graph = full_graph(1)
    V.graph.exact = True
    return V


def value_iterate(model: PomdpModel, cfg: SolveConfig) -> SolveResult:
    V = initial_value_function(model)
    residuals: list[float] = []
    all_stats: list[DpStats] = []
    converged = False
    iterations = 0
    for _ in range(cfg.max_iterations):
        V_next, stats = dp_update(V, model, cfg.dp)
        iterations += 1
        all_stats.append(stats)
        residual = bellman_residual(V_next, V)
        residuals.append(residual)
        V = V_next
        if residual < cfg.epsilon:
            converged = True
            break
    return SolveResult(V, iterations, converged, residuals, all_stats)


def lookahead_values(V: VectorSet, model: PomdpModel, b: np.ndarray) -> np.ndarray:
    """One-step lookahead value of each action at belief b."""
    values = np.zeros(model.num_actions)
    for a in range(model.num_actions):
        total = float(model.reward[a] @ b)
        for o1 in range(model.num_observations):
            p = observation_prob(model, b, a, o1)
            if p <= 0.0:
                continue
            b1 = belief_update(model, b, a, o1)
            total += model.discount * p * value_at(V, b1)[0]
        values[a] = total
    return values


def extract_policy_action(V: VectorSet, model: PomdpModel, b: np.ndarray) -> int:
    """Greedy one-step-lookahead action; ties go to the lowest action index."""
    values = lookahead_values(V, model, b)
    return int(np.argmax(values))


def simulate(model: PomdpModel, V: VectorSet, b0: np.ndarray, horizon: int,
             seed: int) -> tuple[list[tuple[int, int, int, float]], float]:
    """Roll out the greedy policy; returns (trajectory, discounted return).

    Trajectory entries are (state, action, observation, reward).  Deterministic
    for a given seed.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    rng = np.random.default_rng(seed)
    b = np.asarray(b0, dtype=float)
    s = int(rng.choice(model.num_states, p=b))
    trajectory = []
    ret = 0.0
    disc = 1.0
    for _ in range(horizon):
        a = extract_policy_action(V, model, b)
        r = float(model.reward[a, s])
        ret += disc * r
        disc *= model.discount
        s1 = int(rng.choice(model.num_states, p=model.transition[a, s]))
        o1 = int(rng.choice(model.num_observations, p=model.observation[a, s1]))
        trajectory.append((s, a, o1, r))
        b_next = belief_update(model, b, a, o1)
        if b_next is None:
            # sampled observation is impossible from the tracked belief only
            # through numerical underflow; stop the episode
            break
        b = b_next
        s = s1
    return trajectory, ret
