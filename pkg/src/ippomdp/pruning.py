"""Parsimonious coverings: Lark-style filtering and cross-sum pruning variants.

All variants compute the same set; they differ in how many LPs they solve and
how large those LPs are.  `csp_plain` tests every pair with full constraint
sets, `csp_restricted_region` skips pairs settled by witness-point
coincidence, and `csp_neighbor` walks the neighbor graph of the second set,
optionally with neighbor-only constraints and the reformulated LP whose
by-products settle further pairs for free.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lp as _lp
from .neighbors import NeighborGraph, full_graph, inherit_cross_sum
from .vectorset import (AlphaVector, VectorSet, BOUNDARY, WITNESS, TIE_TOL,
                        canonical_order, deduplicate)


@dataclass
class PruneStats:
    lp_count: int = 0
    total_constraint_rows: int = 0
    vectors_in: int = 0
    vectors_out: int = 0
    lps_saved_by_shortcut: int = 0
    harvested_without_lp: int = 0

    def merge(self, other: "PruneStats") -> "PruneStats":
        self.lp_count += other.lp_count
        self.total_constraint_rows += other.total_constraint_rows
        self.vectors_in += other.vectors_in
        self.vectors_out += other.vectors_out
        self.lps_saved_by_shortcut += other.lps_saved_by_shortcut
        self.harvested_without_lp += other.harvested_without_lp
        return self


@dataclass
class CspCallRecord:
    """Per-CSP-call accounting used by the instrumentation reports."""

    size_w: int = 0
    size_x: int = 0
    belief_dim: int = 0
    lp_count: int = 0
    constraint_rows: int = 0

    @property
    def full_formula_rows(self) -> int:
        """Row count of one full-constraint pair LP: |W| + |X| + n - 1."""
        return self.size_w + self.size_x + self.belief_dim - 1


def _solve(program: _lp.LinearProgram, stats: PruneStats,
           record: CspCallRecord | None = None) -> _lp.LpOutcome:
    stats.lp_count += 1
    stats.total_constraint_rows += program.row_count
    if record is not None:
        record.lp_count += 1
        record.constraint_rows += program.row_count
    return _lp.solve_lp(program)


def _classify_support(result: VectorSet) -> None:
    """Set support kinds by re-evaluating each point against the final set."""
    vals = result.matrix()
    for i, m in enumerate(result):
        if m.support_point is None:
            continue
        products = vals @ m.support_point
        own = products[i]
        others = np.delete(products, i)
        if others.size == 0 or own > others.max() + TIE_TOL:
            m.support_kind = WITNESS
        else:
            m.support_kind = BOUNDARY


def lark_prune(W: VectorSet) -> tuple[VectorSet, PruneStats]:
    """Parsimonious covering of W with a support point on every survivor.

    Accepted set is seeded with the lexicographically largest vector (its
    maximality at the first-coordinate corner is structural).  Each further LP
    either discards the probed candidate or promotes the best pool vector at
    the LP's maximizer, so the covering costs one LP per decision.
    """
    if len(W) == 0:
        raise ValueError("lark_prune on empty set")
    stats = PruneStats(vectors_in=len(W))
    deduped, _ = deduplicate(W)
    n = deduped.dim

    if len(deduped) == 1:
        keep = deduped[0]
        keep.support_point = np.full(n, 1.0 / n)
        keep.support_kind = WITNESS
        stats.vectors_out = 1
        return VectorSet([keep]), stats

    order = canonical_order(deduped)
    seed = order[-1]  # lexicographically largest
    corner = np.zeros(n)
    corner[0] = 1.0
    deduped[seed].support_point = corner
    accepted = [seed]
    pending = [i for i in order if i != seed]

    vals = deduped.matrix()
    while pending:
        cand = pending[0]
        program = _lp.make_program(
            n, ineq_rows=[(vals[cand] - vals[a], 1) for a in accepted])
        out = _solve(program, stats)
        if out.status != _lp.OPTIMAL:
            raise _lp.LpError(f"unexpected LP status {out.status} in filtering")
        if out.objective_value <= _lp.POS_TOL:
            pending.pop(0)
            continue
        b = out.maximizer
        products = vals[pending] @ b
        best = products.max()
        tied = [pending[t] for t in np.flatnonzero(products >= best - TIE_TOL)]
        # tie-break: lexicographically largest vector
        winner = max(tied, key=lambda i: tuple(vals[i]))
        deduped[winner].support_point = b
        accepted.append(winner)
        pending.remove(winner)

    accepted_sorted = sorted(accepted, key=lambda i: tuple(vals[i]))
    result = VectorSet([deduped[i] for i in accepted_sorted])
    _classify_support(result)
    stats.vectors_out = len(result)
    return result, stats


def _finalize_pairs(W: VectorSet, X: VectorSet,
                    accepted: dict[tuple[int, int], tuple[np.ndarray, str]],
                    g_w: NeighborGraph | None, g_x: NeighborGraph | None,
                    stats: PruneStats) -> VectorSet:
    """Assemble the output set from accepted (i, j) pairs, dedup, sort, and
    attach the inherited neighbor graph."""
    raw_members: list[AlphaVector] = []
    raw_pairs: list[tuple[int, int]] = []
    for (i, j), (point, kind) in accepted.items():
        m = AlphaVector(W[i].values + X[j].values, parents={0: i, 1: j},
                        support_point=point, support_kind=kind)
        raw_members.append(m)
        raw_pairs.append((i, j))
    raw = VectorSet(raw_members)
    deduped, groups = deduplicate(raw)
    order = canonical_order(deduped)
    result = VectorSet([deduped[i] for i in order])
    pair_groups = [[raw_pairs[g] for g in groups[i]] for i in order]
    result.pair_provenance = pair_groups
    if g_w is not None and g_x is not None:
        result.graph = inherit_cross_sum(g_w, g_x, pair_groups,
                                         W.matrix(), X.matrix())
    _classify_support(result)
    stats.vectors_out = len(result)
    return result


def csp_plain(W: VectorSet, X: VectorSet) -> tuple[VectorSet, PruneStats, CspCallRecord]:
    """PC(W + X) with one full-constraint intersection LP per pair."""
    W, _ = deduplicate(W)
    X, _ = deduplicate(X)
    stats = PruneStats(vectors_in=len(W) * len(X))
    record = CspCallRecord(size_w=len(W), size_x=len(X), belief_dim=W.dim)
    accepted: dict[tuple[int, int], tuple[np.ndarray, str]] = {}
    for i, alpha in enumerate(W):
        w_others = [W[p] for p in range(len(W)) if p != i]
        for j, beta in enumerate(X):
            x_others = [X[q] for q in range(len(X)) if q != j]
            program = _lp.build_intersection_lp(alpha, w_others, beta, x_others)
            if _lp.is_trivially_intersecting(program):
                accepted[(i, j)] = (np.full(W.dim, 1.0 / W.dim), WITNESS)
                continue
            out = _solve(program, stats, record)
            if out.status == _lp.UNBOUNDED or (
                    out.status == _lp.OPTIMAL and out.objective_value > _lp.POS_TOL):
                point = out.maximizer if out.status == _lp.OPTIMAL else \
                    np.full(W.dim, 1.0 / W.dim)
                accepted[(i, j)] = (point, WITNESS)
    result = _finalize_pairs(W, X, accepted, None, None, stats)
    return result, stats, record


def csp_restricted_region(W: VectorSet, X: VectorSet
                          ) -> tuple[VectorSet, PruneStats, CspCallRecord]:
    """Like csp_plain, but pairs whose intersection is certified by a shared
    witness point are accepted without an LP."""
    W, _ = deduplicate(W)
    X, _ = deduplicate(X)
    stats = PruneStats(vectors_in=len(W) * len(X))
    record = CspCallRecord(size_w=len(W), size_x=len(X), belief_dim=W.dim)
    x_vals = X.matrix()
    accepted: dict[tuple[int, int], tuple[np.ndarray, str]] = {}
    for i, alpha in enumerate(W):
        if alpha.support_point is None:
            raise ValueError("csp_restricted_region requires support points on W")
        shortcut_j = None
        if alpha.support_kind == WITNESS and len(X) > 1:
            products = x_vals @ alpha.support_point
            order = np.argsort(products)
            if products[order[-1]] > products[order[-2]] + TIE_TOL:
                shortcut_j = int(order[-1])
        elif alpha.support_kind == WITNESS and len(X) == 1:
            shortcut_j = 0
        if shortcut_j is not None:
            accepted[(i, shortcut_j)] = (alpha.support_point, WITNESS)
            stats.lps_saved_by_shortcut += 1
        w_others = [W[p] for p in range(len(W)) if p != i]
        for j, beta in enumerate(X):
            if j == shortcut_j:
                continue
            x_others = [X[q] for q in range(len(X)) if q != j]
            program = _lp.build_intersection_lp(alpha, w_others, beta, x_others)
            if _lp.is_trivially_intersecting(program):
                accepted[(i, j)] = (np.full(W.dim, 1.0 / W.dim), WITNESS)
                continue
            out = _solve(program, stats, record)
            if out.status == _lp.UNBOUNDED or (
                    out.status == _lp.OPTIMAL and out.objective_value > _lp.POS_TOL):
                point = out.maximizer if out.status == _lp.OPTIMAL else \
                    np.full(W.dim, 1.0 / W.dim)
                accepted[(i, j)] = (point, WITNESS)
    result = _finalize_pairs(W, X, accepted, None, None, stats)
    return result, stats, record


def csp_neighbor(W: VectorSet, X: VectorSet, lp_mode: str = "reformulated"
                 ) -> tuple[VectorSet, PruneStats, CspCallRecord]:
    """Neighbor-guided PC(W + X).

    For each alpha in W, candidate betas start from the argmax set at alpha's
    support point and expand breadth-first through X's neighbor graph; betas
    never enqueued are never tested.  lp_mode selects the pair test:

      full          intersection LP over the full constraint sets
      reduced       intersection LP over neighbor constraints only
      reformulated  x-free beta rows; infeasibility prunes beta from X and
                    boundary ties settle extra pairs without further LPs
    """
    if lp_mode not in ("full", "reduced", "reformulated"):
        raise ValueError(f"unknown lp_mode {lp_mode!r}")
    W, _ = deduplicate(W)
    X, _ = deduplicate(X)
    g_w = W.graph if W.graph is not None else full_graph(len(W))
    g_x = X.graph if X.graph is not None else full_graph(len(X))
    if g_w.size != len(W) or g_x.size != len(X):
        raise ValueError("neighbor graph size mismatch")
    stats = PruneStats(vectors_in=len(W) * len(X))
    record = CspCallRecord(size_w=len(W), size_x=len(X), belief_dim=W.dim)
    n = W.dim
    w_vals, x_vals = W.matrix(), X.matrix()

    accepted: dict[tuple[int, int], tuple[np.ndarray, str]] = {}
    non_intersecting: set[tuple[int, int]] = set()
    pruned_x: set[int] = set()
    # open witness region of X[j] known nonempty
    region_nonempty = np.array(
        [m.support_kind == WITNESS for m in X], dtype=bool)

    def constraint_vectors(idx, vals, graph, exclude_pruned=False):
        if lp_mode == "full":
            others = [p for p in range(vals.shape[0]) if p != idx]
        else:
            others = graph.neighbors_of(idx)
        if exclude_pruned:
            others = [p for p in others if p not in pruned_x]
        return [vals[p] for p in others]

    def harvest(pair, point):
        if pair not in accepted and pair not in non_intersecting \
                and pair[1] not in pruned_x:
            accepted[pair] = (point, BOUNDARY)
            region_nonempty[pair[1]] = True
            stats.harvested_without_lp += 1

    for i, alpha in enumerate(W):
        if alpha.support_point is None:
            raise ValueError("csp_neighbor requires support points on W")
        b0 = alpha.support_point
        live = [j for j in range(len(X)) if j not in pruned_x]
        if not live:
            break
        products = x_vals[live] @ b0
        best = products.max()
        seeds = [live[t] for t in np.flatnonzero(products >= best - TIE_TOL)]

        # witness-coincidence shortcut: unique strict maximizer at a strict
        # witness point intersects without an LP
        if (alpha.support_kind == WITNESS and len(seeds) == 1
                and (i, seeds[0]) not in accepted):
            j = seeds[0]
            accepted[(i, j)] = (b0, WITNESS)
            region_nonempty[j] = True
            stats.lps_saved_by_shortcut += 1

        queue = list(seeds)
        visited = set(seeds)

        while queue:
            j = queue.pop(0)
            if j in pruned_x:
                continue
            pair = (i, j)
            if pair in non_intersecting:
                continue
            if pair in accepted:
                # settled earlier (shortcut or harvest): expand the frontier
                for nb in sorted(g_x.neighbors_of(j)):
                    if nb not in visited and nb not in pruned_x:
                        visited.add(nb)
                        queue.append(nb)
                continue

            alpha_rows = constraint_vectors(i, w_vals, g_w)
            beta_rows = constraint_vectors(j, x_vals, g_x, exclude_pruned=True)

            if lp_mode in ("full", "reduced"):
                program = _lp.build_intersection_lp(
                    alpha, alpha_rows, X[j], beta_rows)
                if _lp.is_trivially_intersecting(program):
                    accepted[pair] = (np.full(n, 1.0 / n), WITNESS)
                    region_nonempty[j] = True
                    expand = True
                else:
                    out = _solve(program, stats, record)
                    intersects = out.status == _lp.UNBOUNDED or (
                        out.status == _lp.OPTIMAL
                        and out.objective_value > _lp.POS_TOL)
                    # keep walking through regions that merely touch alpha's
                    # (x* ~ 0): the intersecting set lies beyond such
                    # boundary slivers, and stopping there would hide it
                    expand = out.status == _lp.UNBOUNDED or (
                        out.status == _lp.OPTIMAL
                        and out.objective_value > -_lp.POS_TOL)
                    if intersects:
                        point = out.maximizer if out.status == _lp.OPTIMAL \
                            else np.full(n, 1.0 / n)
                        accepted[pair] = (point, WITNESS)
                        region_nonempty[j] = True
                    else:
                        non_intersecting.add(pair)
            else:
                program = _lp.build_reformulated_lp(
                    alpha, alpha_rows, X[j], beta_rows)
                out = _solve(program, stats, record)
                if out.status == _lp.INFEASIBLE:
                    # closed witness region of X[j] empty: drop it for good
                    pruned_x.add(j)
                    continue
                if out.status == _lp.UNBOUNDED:
                    # no alpha rows: R(alpha, W) is the whole simplex
                    accepted[pair] = (np.full(n, 1.0 / n), WITNESS)
                    region_nonempty[j] = True
                    expand = True
                elif out.objective_value > _lp.POS_TOL:
                    point = out.maximizer
                    tight = [g for g in g_x.neighbors_of(j)
                             if g not in pruned_x and abs(
                                 float((x_vals[g] - x_vals[j]) @ point)) <= _lp.POS_TOL]
                    kind = BOUNDARY if tight else WITNESS
                    accepted[pair] = (point, kind)
                    region_nonempty[j] = True
                    for g in tight:
                        if region_nonempty[g]:
                            harvest((i, g), point)
                    expand = True
                else:
                    # non-positive: maximizer is a boundary point of X[j];
                    # a strict W-maximizer there pairs with X[j] and its ties
                    non_intersecting.add(pair)
                    # touching regions (x* ~ 0) still carry the walk onward
                    expand = out.objective_value > -_lp.POS_TOL
                    point = out.maximizer
                    w_products = w_vals @ point
                    w_best = int(np.argmax(w_products))
                    strict = all(w_products[w_best] > w_products[p] + TIE_TOL
                                 for p in range(len(W)) if p != w_best)
                    if strict and w_best != i:
                        if region_nonempty[j]:
                            harvest((w_best, j), point)
                        tight = [g for g in g_x.neighbors_of(j)
                                 if g not in pruned_x and abs(
                                     float((x_vals[g] - x_vals[j]) @ point))
                                 <= _lp.POS_TOL]
                        for g in tight:
                            if region_nonempty[g]:
                                harvest((w_best, g), point)

            if expand:
                for nb in sorted(g_x.neighbors_of(j)):
                    if nb not in visited and nb not in pruned_x:
                        visited.add(nb)
                        queue.append(nb)

    accepted = {pair: v for pair, v in accepted.items() if pair[1] not in pruned_x}
    result = _finalize_pairs(W, X, accepted, g_w, g_x, stats)
    result.pruned_from_x = sorted(pruned_x)
    return result, stats, record


def incremental_prune(sets: list[VectorSet], variant: str = "plain",
                      lp_mode: str = "reformulated"
                      ) -> tuple[VectorSet, PruneStats, list[CspCallRecord]]:
    """Left fold of a CSP variant over a list of vector sets.

    variant: "plain", "restricted_region", or "neighbor".  For
    "restricted_region" the first set is pruned up front to obtain support
    points; for "neighbor" the caller must supply sets that already carry
    support points and neighbor graphs.
    """
    if not sets:
        raise ValueError("incremental_prune on empty list")
    agg = PruneStats()
    records: list[CspCallRecord] = []

    if len(sets) == 1:
        result, stats = lark_prune(sets[0])
        agg.merge(stats)
        return result, agg, records

    if variant == "plain":
        Y, _ = deduplicate(sets[0])
    elif variant == "restricted_region":
        Y, stats0 = lark_prune(sets[0])
        agg.merge(stats0)
    elif variant == "neighbor":
        Y = sets[0]
    else:
        raise ValueError(f"unknown variant {variant!r}")

    for X in sets[1:]:
        if variant == "plain":
            Y, stats, record = csp_plain(Y, X)
        elif variant == "restricted_region":
            Y, stats, record = csp_restricted_region(Y, X)
        else:
            Y, stats, record = csp_neighbor(Y, X, lp_mode=lp_mode)
        agg.merge(stats)
        records.append(record)
    return Y, agg, records
