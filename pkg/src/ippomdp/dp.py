"""One dynamic-programming update on alpha-vector sets.

Variants:
  exhaustive_oracle    full cross sums, one final filtering pass (ground truth)
  plain_ip             incremental pruning with full-constraint pair LPs
  restricted_region_ip incremental pruning with the witness-point shortcut
  improved             observation-factored sets shared across actions with
                       equal observation tables, neighbor-guided pruning,
                       support-point seeding, and exact neighbor detection
                       for the next iteration
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import lp as _lp
from .model import PomdpModel
from .neighbors import (DetectionStats, NeighborGraph, detect_neighbors_in_union,
                        full_graph, inherit_affine, inherit_scaling)
from .pruning import (CspCallRecord, PruneStats, csp_neighbor, csp_plain,
                      csp_restricted_region, incremental_prune, lark_prune)
from .vectorset import (AlphaVector, VectorSet, BOUNDARY, WITNESS, TIE_TOL,
                        canonical_order, deduplicate, matrix_multiply,
                        pointwise_dominance_prune, value_at)

VARIANTS = ("exhaustive_oracle", "plain_ip", "restricted_region_ip", "improved")
LP_MODES = ("full", "reduced", "reformulated")

# observation tables must agree exactly (to this tolerance) for actions to
# share one IP computation; a missed merge only costs time, a wrong one
# changes results
GROUP_TOL = 1e-12


@dataclass
class DpConfig:
    variant: str = "improved"
    lp_mode: str = "reformulated"
    use_ip_reduction: bool = True
    use_pointwise_preprune: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.lp_mode not in LP_MODES:
            raise ValueError(f"unknown lp_mode {self.lp_mode!r}")


@dataclass
class DpStats:
    csp: PruneStats = field(default_factory=PruneStats)
    final_prune: PruneStats = field(default_factory=PruneStats)
    csp_calls: list[CspCallRecord] = field(default_factory=list)
    ip_call_count: int = 0
    neighbor_step1_lps: int = 0
    neighbor_step2_lps: int = 0
    wall_time: float = 0.0
    vectors_in: int = 0
    vectors_out: int = 0

    @property
    def csp_lp_count(self) -> int:
        return self.csp.lp_count

    @property
    def total_lp_count(self) -> int:
        return (self.csp.lp_count + self.final_prune.lp_count
                + self.neighbor_step1_lps + self.neighbor_step2_lps)


def build_voa(V: VectorSet, model: PomdpModel, a: int, o1: int,
              preprune: bool = False) -> VectorSet:
    """lambda * V * P(o1, s1 | s, a): the per-(action, observation) DP set."""
    # M[s1, s] = P(o1 | s1, a) P(s1 | s, a)
    M = model.transition[a].T * model.observation[a, :, o1][:, None]
    members = [AlphaVector(model.discount * (m.values @ M)) for m in V]
    out, _ = deduplicate(VectorSet(members))
    if preprune:
        out, _ = pointwise_dominance_prune(out)
    return out


def build_voa_prime(V: VectorSet, model: PomdpModel, a: int, o1: int
                    ) -> tuple[VectorSet, list[list[int]]]:
    """Observation-factored set: beta(s1) = lambda * alpha(s1) * P(o1|s1,a).

    Returns the deduplicated set and per-member source indices into V.
    """
    diag = model.observation[a, :, o1]
    members = [AlphaVector(model.discount * m.values * diag) for m in V]
    return deduplicate(VectorSet(members))


def group_actions_by_observation_model(model: PomdpModel) -> list[list[int]]:
    """Partition actions by exact equality of their observation tables."""
    groups: list[list[int]] = []
    for a in range(model.num_actions):
        for group in groups:
            if np.max(np.abs(model.observation[a] - model.observation[group[0]])) \
                    <= GROUP_TOL:
                group.append(a)
                break
        else:
            groups.append([a])
    return groups


def seed_support_points(V: VectorSet, model: PomdpModel, a: int, o1: int,
                        V1: VectorSet, sources: list[list[int]],
                        stats: PruneStats) -> tuple[VectorSet, list[list[int]]]:
    """Attach witness/boundary points to the observation-factored set V1.

    Each source support point b maps to b'(s1) proportional to
    b(s1)/P(o1|s1,a) on the positive observation entries.  Where the
    observation column has zeros, members whose mapped point fails to weakly
    maximize are resolved by a zero-restricted LP with neighbor constraints;
    non-positive outcomes prune the member.  Returns the (possibly reduced)
    set and updated source lists.
    """
    diag = model.observation[a, :, o1]
    positive = diag > 0.0
    vals = V1.matrix()
    graph = V1.graph if V1.graph is not None else full_graph(len(V1))

    def mapped_point(b: np.ndarray) -> np.ndarray | None:
        bp = np.zeros_like(b)
        bp[positive] = b[positive] / diag[positive]
        mass = bp.sum()
        if mass <= 0.0:
            return None
        return bp / mass

    kept: list[int] = []
    for j, beta in enumerate(V1):
        assigned = False
        for src in sources[j]:
            b = V[src].support_point
            if b is None:
                raise ValueError("seed_support_points requires support points on V")
            bp = mapped_point(b)
            if bp is None:
                continue
            if positive.all():
                beta.support_point = bp
                assigned = True
                break
            products = vals @ bp
            if products[j] >= products.max() - TIE_TOL:
                beta.support_point = bp
                assigned = True
                break
        if assigned:
            kept.append(j)
            continue
        # zero-restricted LP over neighbor constraints
        rows = [(beta.values - vals[p], 1) for p in graph.neighbors_of(j)]
        zero_vars = tuple(int(s) for s in np.flatnonzero(~positive))
        program = _lp.make_program(V1.dim, ineq_rows=rows, fixed_zero=zero_vars)
        stats.lp_count += 1
        stats.total_constraint_rows += program.row_count
        out = _lp.solve_lp(program)
        if out.status == _lp.UNBOUNDED:
            beta.support_point = mapped_point(np.full(V1.dim, 1.0 / V1.dim))
            kept.append(j)
        elif out.status == _lp.OPTIMAL and out.objective_value > _lp.POS_TOL:
            beta.support_point = out.maximizer
            kept.append(j)
        # else: witness region empty, member pruned

    if not kept:
        raise RuntimeError("seeding pruned every member; covering lost")
    result = VectorSet([V1[j] for j in kept])
    result.graph = inherit_scaling(graph, [[j] for j in kept]) if len(kept) != len(V1) \
        else graph
    # classify kinds against the surviving set
    rvals = result.matrix()
    for idx, m in enumerate(result):
        products = rvals @ m.support_point
        others = np.delete(products, idx)
        m.support_kind = WITNESS if others.size == 0 or \
            products[idx] > others.max() + TIE_TOL else BOUNDARY
    return result, [sources[j] for j in kept]


def _zero_vector_set(n: int) -> VectorSet:
    return VectorSet([AlphaVector(np.zeros(n))])


def _is_zero_set(W: VectorSet) -> bool:
    return len(W) == 1 and np.max(np.abs(W[0].values)) == 0.0


def _exhaustive_union(V: VectorSet, model: PomdpModel) -> VectorSet:
    """The full DP candidate set with no intermediate pruning."""
    n = model.num_states
    members: list[AlphaVector] = []
    for a in range(model.num_actions):
        partial = [np.zeros(n)]
        for o1 in range(model.num_observations):
            voa = build_voa(V, model, a, o1)
            partial = [p + m.values for p in partial for m in voa]
        for p in partial:
            members.append(AlphaVector(model.reward[a] + p, action=a))
    return VectorSet(members)


def dp_update(V: VectorSet, model: PomdpModel, cfg: DpConfig
              ) -> tuple[VectorSet, DpStats]:
    """One DP update: returns the parsimonious next-stage set and statistics.

    All variants return the same value-vector set.  The improved variant
    additionally attaches an exact neighbor graph for the next iteration.
    """
    start = time.perf_counter()
    stats = DpStats(vectors_in=len(V))
    if len(V) == 0:
        raise ValueError("dp_update on empty value function")

    if cfg.variant == "exhaustive_oracle":
        union = _exhaustive_union(V, model)
        result, fstats = lark_prune(union)
        stats.final_prune.merge(fstats)
    elif cfg.variant in ("plain_ip", "restricted_region_ip"):
        result, stats = _dp_update_enumeration(V, model, cfg, stats)
    else:
        result, stats = _dp_update_improved(V, model, cfg, stats)

    if len(result) == 0:
        raise RuntimeError("internal error: empty parsimonious covering")
    stats.vectors_out = len(result)
    stats.wall_time = time.perf_counter() - start
    return result, stats


def _dp_update_enumeration(V, model, cfg, stats):
    variant = "plain" if cfg.variant == "plain_ip" else "restricted_region"
    union_members: list[AlphaVector] = []
    for a in range(model.num_actions):
        sets = []
        for o1 in range(model.num_observations):
            voa = build_voa(V, model, a, o1, preprune=cfg.use_pointwise_preprune)
            if _is_zero_set(voa):
                continue  # cross-sum identity
            sets.append(voa)
        if not sets:
            sets = [_zero_vector_set(model.num_states)]
        stats.ip_call_count += 1
        W_a, pstats, records = incremental_prune(sets, variant=variant)
        stats.csp.merge(pstats)
        stats.csp_calls.extend(records)
        for m in W_a:
            union_members.append(
                AlphaVector(model.reward[a] + m.values, action=a))
    result, fstats = lark_prune(VectorSet(union_members))
    stats.final_prune.merge(fstats)
    return result, stats


def _dp_update_improved(V, model, cfg, stats):
    n = model.num_states
    base_graph = V.graph if V.graph is not None else full_graph(len(V))

    if cfg.use_ip_reduction:
        groups = group_actions_by_observation_model(model)
    else:
        groups = [[a] for a in range(model.num_actions)]

    union_members: list[AlphaVector] = []
    union_provenance: list[tuple[int, int]] = []
    action_graphs: dict[int, NeighborGraph] = {}

    for group in groups:
        rep = group[0]
        sets = []
        for o1 in range(model.num_observations):
            V1, sources = build_voa_prime(V, model, rep, o1)
            if _is_zero_set(V1):
                continue
            if cfg.use_pointwise_preprune:
                V1, kept = pointwise_dominance_prune(V1)
                sources = [sources[kk] for kk in kept]
            V1.graph = inherit_scaling(base_graph, sources)
            V1, sources = seed_support_points(
                V, model, rep, o1, V1, sources, stats.csp)
            sets.append(V1)
        if not sets:
            sets = [_zero_vector_set(n)]
            sets[0][0].support_point = np.full(n, 1.0 / n)
            sets[0][0].support_kind = WITNESS
            sets[0].graph = full_graph(1)
        stats.ip_call_count += 1
        pc_vprime, pstats, records = incremental_prune(
            sets, variant="neighbor", lp_mode=cfg.lp_mode)
        stats.csp.merge(pstats)
        stats.csp_calls.extend(records)
        group_graph = pc_vprime.graph if pc_vprime.graph is not None \
            else full_graph(len(pc_vprime))

        for a in group:
            # matrix_multiply expects f(s1, s) = P(s1 | s, a)
            transformed = matrix_multiply(pc_vprime, model.transition[a].T)
            for idx, m in enumerate(transformed):
                union_members.append(AlphaVector(
                    model.reward[a] + m.values, action=a))
                union_provenance.append((a, idx))
            action_graphs[a] = inherit_affine(
                group_graph, [[idx] for idx in range(len(transformed))])

    union = VectorSet(union_members)
    result, fstats = lark_prune(union)
    stats.final_prune.merge(fstats)

    # recover provenance of survivors for neighbor detection
    memberships = _match_provenance(result, union, union_provenance, model)
    graph, dstats = detect_neighbors_in_union(result, memberships, action_graphs)
    result.graph = graph
    stats.neighbor_step1_lps = dstats.step1_lps
    stats.neighbor_step2_lps = dstats.step2_lps
    return result, stats


def _match_provenance(result, union, union_provenance, model):
    """Map each surviving vector back to every (action, pre-union index) that
    produced an identical value vector."""
    uvals = union.matrix()
    memberships: list[list[tuple[int, int]]] = []
    for m in result:
        hits = np.flatnonzero(np.max(np.abs(uvals - m.values), axis=1) <= 1e-9)
        memberships.append([union_provenance[int(h)] for h in hits])
    return memberships
