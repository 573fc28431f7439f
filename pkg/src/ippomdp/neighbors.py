"""Neighbor bookkeeping over witness regions.

A NeighborGraph records pairs that are *provably* not neighbors; any pair not
marked is treated as possibly neighboring.  That over-approximation is always
safe: the pruning shortcuts only ever use non-neighbor marks to drop
constraints or skip work, never to add vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lp as _lp
from .vectorset import VectorSet, WITNESS, value_at

# alpha - alpha' = c (beta - beta') is accepted when the least-squares residual
# max-norm is below this, relative to the scale of alpha - alpha'.
COLLINEAR_TOL = 1e-7

# Source vectors closer than this (relative to their magnitude) are treated as
# one source when deciding the collinearity veto: the veto's derivation needs
# two well-separated tie hyperplanes, and a noise-scale difference vector does
# not define one.  Erring on the large side only keeps more pairs possible.
NEAR_DUP_TOL = 1e-6


@dataclass
class NeighborGraph:
    """Certain-non-neighbor knowledge over an indexed vector set."""

    size: int
    non_neighbor_pairs: set[frozenset[int]] = field(default_factory=set)
    exact: bool = False

    def mark_non_neighbor(self, i: int, j: int) -> None:
        if i == j:
            raise ValueError("no self-pairs")
        self.non_neighbor_pairs.add(frozenset((i, j)))

    def possibly_neighbors(self, i: int, j: int) -> bool:
        return i != j and frozenset((i, j)) not in self.non_neighbor_pairs

    def neighbors_of(self, i: int) -> list[int]:
        if not 0 <= i < self.size:
            raise IndexError(i)
        return [j for j in range(self.size) if self.possibly_neighbors(i, j)]

    def copy(self) -> "NeighborGraph":
        return NeighborGraph(self.size, set(self.non_neighbor_pairs), self.exact)

    def dump(self) -> str:
        lines = []
        for i in range(self.size):
            lines.append(f"{i}: " + " ".join(str(j) for j in self.neighbors_of(i)))
        return "\n".join(lines)


def full_graph(size: int) -> NeighborGraph:
    """No knowledge: every pair possibly neighbors."""
    return NeighborGraph(size)


def neighbors_of(g: NeighborGraph, i: int) -> list[int]:
    return g.neighbors_of(i)


def inherit_scaling(g_src: NeighborGraph, source_map: list[list[int]]) -> NeighborGraph:
    """Carry non-neighbor marks through an elementwise scaling of the set.

    source_map[i] lists the source indices merged (by deduplication) into
    output member i.  A pair is marked only when every cross pair of sources
    is marked in the source graph.
    """
    out = NeighborGraph(len(source_map))
    for i in range(len(source_map)):
        for j in range(i + 1, len(source_map)):
            if all(not g_src.possibly_neighbors(u, v)
                   for u in source_map[i] for v in source_map[j]):
                out.mark_non_neighbor(i, j)
    return out


# An affine transform (matrix multiply then adding a constant reward vector)
# preserves the rule exactly the same way.
inherit_affine = inherit_scaling


def _collinear(d1: np.ndarray, d2: np.ndarray) -> bool:
    denom = float(d2 @ d2)
    scale = 1.0 + float(np.max(np.abs(d1)))
    if denom <= (COLLINEAR_TOL * scale) ** 2:
        # d2 ~ 0: collinear only if d1 ~ 0 too (excluded upstream by dedup)
        return float(np.max(np.abs(d1))) <= COLLINEAR_TOL * scale
    c = float(d1 @ d2) / denom
    residual = d1 - c * d2
    return float(np.max(np.abs(residual))) <= COLLINEAR_TOL * scale


def inherit_cross_sum(g_w: NeighborGraph, g_x: NeighborGraph,
                      members: list[tuple[list[tuple[int, int]], None]] | list,
                      w_values: np.ndarray, x_values: np.ndarray) -> NeighborGraph:
    """Non-neighbor marks for the accepted members of a cross-sum pruning.

    `members[p]` is the list of (i in W, j in X) source pairs merged into
    output member p.  A pair (p, q) is marked when, for every combination of
    their source pairs, the sources are non-neighbors in W or in X, or the
    difference vectors fail the collinearity condition.  The collinearity veto
    only applies when both source pairs are genuinely distinct (difference
    above NEAR_DUP_TOL); near-duplicate sources behave like a shared source.
    """
    def distinct(values, u, v):
        diff = float(np.max(np.abs(values[u] - values[v])))
        scale = 1.0 + max(float(np.max(np.abs(values[u]))),
                          float(np.max(np.abs(values[v]))))
        return diff > NEAR_DUP_TOL * scale

    out = NeighborGraph(len(members))
    for p in range(len(members)):
        for q in range(p + 1, len(members)):
            provable = True
            for (iw, ix) in members[p]:
                for (jw, jx) in members[q]:
                    if iw != jw and not g_w.possibly_neighbors(iw, jw):
                        continue
                    if ix != jx and not g_x.possibly_neighbors(ix, jx):
                        continue
                    if (iw != jw and ix != jx
                            and distinct(w_values, iw, jw)
                            and distinct(x_values, ix, jx)
                            and not _collinear(
                                w_values[iw] - w_values[jw],
                                x_values[ix] - x_values[jx])):
                        continue
                    provable = False
                    break
                if not provable:
                    break
            if provable:
                out.mark_non_neighbor(p, q)
    return out


@dataclass
class DetectionStats:
    step1_lps: int = 0
    step2_lps: int = 0
    shortcut1_pairs: int = 0
    shortcut2_pairs: int = 0


def _tie_lp(alpha_vals: np.ndarray, beta_vals: np.ndarray,
            constraint_vals: list[np.ndarray]) -> _lp.LpOutcome:
    """maximize x s.t. alpha.b = beta.b, alpha.b >= x + c.b for each c, simplex."""
    program = _lp.make_program(
        alpha_vals.size,
        ineq_rows=[(alpha_vals - c, 1) for c in constraint_vals],
        eq_rows=[(alpha_vals - beta_vals, 0.0)],
    )
    return _lp.solve_lp(program)


def detect_neighbors_in_union(pruned: VectorSet,
                              memberships: list[list[tuple[int, int]]],
                              action_graphs: dict[int, NeighborGraph],
                              ) -> tuple[NeighborGraph, DetectionStats]:
    """Exact neighbor relation on the final pruned union.

    `memberships[i]` lists (action, index within that action's pre-union set)
    provenance pairs for vector i; `action_graphs[a]` is the (sound,
    inherited) graph over action a's pre-union set.  Every vector must carry a
    support point.

    Two-step procedure per vector: a tie LP per undecided pair filters
    potential neighbors (at most k(k-1)/2 such LPs in total), then each
    potential neighbor is confirmed by a strict-separation check or one more
    tie LP with the constraint set narrowed to the potential-neighbor list.
    """
    k = len(pruned)
    vals = pruned.matrix()
    stats = DetectionStats()

    NEI, NON = 1, -1
    decided = np.zeros((k, k), dtype=int)

    def decide(i, j, verdict):
        decided[i, j] = verdict
        decided[j, i] = verdict

    # shortcut 1: pairs sharing a pre-union set where they are marked non-neighbors
    member_lookup: dict[int, dict[int, int]] = {a: {} for a in action_graphs}
    for i, prov in enumerate(memberships):
        for (a, idx) in prov:
            member_lookup[a][idx] = i
    for i in range(k):
        for j in range(i + 1, k):
            shared = False
            marked = False
            for (a, ia) in memberships[i]:
                for (b, jb) in memberships[j]:
                    if a == b:
                        shared = True
                        if not action_graphs[a].possibly_neighbors(ia, jb):
                            marked = True
            if shared and marked:
                decide(i, j, NON)
                stats.shortcut1_pairs += 1

    # shortcut 2: weak maximizers at a strict witness point are neighbors
    for i in range(k):
        m = pruned[i]
        if m.support_point is None:
            raise ValueError("detect_neighbors_in_union requires support points")
        if m.support_kind != WITNESS or k < 2:
            continue
        b = m.support_point
        others = [j for j in range(k) if j != i]
        products = vals[others] @ b
        best = products.max()
        for idx, j in enumerate(others):
            if products[idx] >= best - 1e-9 and decided[i, j] == 0:
                decide(i, j, NEI)
                stats.shortcut2_pairs += 1

    exact = NeighborGraph(k, exact=True)
    order = list(range(k))  # pruned is already canonically sorted by callers

    for i in order:
        # potential-neighbor constraint pool: same-set survivors not ruled out,
        # plus already-confirmed neighbors of i
        n_a: set[int] = set()
        for (a, ia) in memberships[i]:
            g = action_graphs[a]
            for idx2, j in member_lookup[a].items():
                if j != i and g.possibly_neighbors(ia, idx2):
                    n_a.add(j)
        potential: list[int] = [j for j in range(k) if j != i and decided[i, j] == NEI]
        tie_points: dict[int, np.ndarray] = {}

        step1_this = 0
        for j in order:
            if j == i or decided[i, j] != 0:
                continue
            constraints = sorted(n_a | set(potential))
            out = _tie_lp(vals[i], vals[j],
                          [vals[c] for c in constraints if c != j])
            stats.step1_lps += 1
            step1_this += 1
            if out.status == _lp.INFEASIBLE or (
                    out.status == _lp.OPTIMAL and out.objective_value <= _lp.POS_TOL):
                decide(i, j, NON)
            elif out.status == _lp.UNBOUNDED:
                # no constraints at all (k == 2 with empty pools): the tie set
                # is the whole hyperplane section, a genuine potential neighbor
                b_mid = np.full(vals.shape[1], 1.0 / vals.shape[1])
                potential.append(j)
                tie_points[j] = b_mid
            else:
                potential.append(j)
                tie_points[j] = out.maximizer

        # step 2: confirm each still-undecided potential neighbor
        for j in list(potential):
            if decided[i, j] != 0:
                continue
            candidates = [c for c in potential if c != j and decided[i, c] != NON]
            b = tie_points[j]
            strict = all(vals[j] @ b > vals[c] @ b + 1e-9 for c in candidates)
            if strict:
                decide(i, j, NEI)
                continue
            out = _tie_lp(vals[i], vals[j], [vals[c] for c in candidates])
            stats.step2_lps += 1
            if out.status == _lp.OPTIMAL and out.objective_value > _lp.POS_TOL:
                decide(i, j, NEI)
            elif out.status == _lp.UNBOUNDED:
                decide(i, j, NEI)
            else:
                decide(i, j, NON)

        assert step1_this <= k - 1

    assert stats.step1_lps <= k * (k - 1) // 2, "step-1 LP bound violated"

    for i in range(k):
        for j in range(i + 1, k):
            if decided[i, j] == NON:
                exact.mark_non_neighbor(i, j)
            elif decided[i, j] == 0:
                raise AssertionError("pair left undecided by neighbor detection")
    return exact, stats
