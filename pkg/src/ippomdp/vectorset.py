"""Alpha-vector sets: cross sums, linear transforms, evaluation, cheap pruning."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

# Two vectors are duplicates when their max-norm difference is at most this.
DUP_TOL = 1e-9
# Tie tolerance for argmax / weak-maximization checks.
TIE_TOL = 1e-9

WITNESS = "witness"
BOUNDARY = "boundary"


@dataclass
class AlphaVector:
    """A linear value function over states, with provenance and support point.

    `parents` maps an observation index to the index of the source vector in
    the per-observation set that this vector was cross-summed from.
    `support_point` is a belief where this vector is maximal within its owning
    set: strictly for kind "witness", weakly for kind "boundary".
    """

    values: np.ndarray
    action: int | None = None
    parents: dict[int, int] | None = None
    support_point: np.ndarray | None = None
    support_kind: str | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    @property
    def dim(self) -> int:
        return self.values.size

    def dot(self, b: np.ndarray) -> float:
        return float(self.values @ b)

    def copy(self) -> "AlphaVector":
        return replace(self, values=self.values.copy())


class VectorSet:
    """An ordered collection of AlphaVectors with an optional neighbor graph."""

    def __init__(self, members: list[AlphaVector] | None = None, graph=None):
        self.members: list[AlphaVector] = list(members) if members else []
        self.graph = graph  # NeighborGraph or None

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i: int) -> AlphaVector:
        return self.members[i]

    @property
    def dim(self) -> int:
        if not self.members:
            raise ValueError("empty vector set has no dimension")
        return self.members[0].dim

    def matrix(self) -> np.ndarray:
        """Member values stacked as a (len, dim) array."""
        return np.array([m.values for m in self.members], dtype=float)

    def __repr__(self):
        return f"VectorSet({len(self.members)} vectors)"


def _check_same_dim(W: VectorSet, X: VectorSet) -> None:
    if W.dim != X.dim:
        raise ValueError(f"dimension mismatch: {W.dim} vs {X.dim}")


def cross_sum(W: VectorSet, X: VectorSet) -> VectorSet:
    """All |W|*|X| componentwise sums, with pair provenance in `parents`.

    Pair (i, j) is recorded as parents={0: i, 1: j}; callers re-key by
    observation when building per-observation folds.
    """
    _check_same_dim(W, X)
    out = []
    for i, alpha in enumerate(W):
        for j, beta in enumerate(X):
            out.append(AlphaVector(alpha.values + beta.values, parents={0: i, 1: j}))
    return VectorSet(out)


def matrix_multiply(W: VectorSet, f: np.ndarray) -> VectorSet:
    """Transform each alpha to beta(s) = sum_s1 alpha(s1) f(s1, s)."""
    f = np.asarray(f, dtype=float)
    n = W.dim
    if f.shape != (n, n):
        raise ValueError(f"matrix shape {f.shape} != {(n, n)}")
    return VectorSet([AlphaVector(m.values @ f, action=m.action) for m in W])


def scale(lam: float, W: VectorSet) -> VectorSet:
    return VectorSet([AlphaVector(lam * m.values, action=m.action) for m in W])


def value_at(W: VectorSet, b: np.ndarray) -> tuple[float, list[int]]:
    """Maximum inner product over the set and all indices attaining it."""
    if len(W) == 0:
        raise ValueError("value_at on empty vector set")
    products = W.matrix() @ np.asarray(b, dtype=float)
    best = float(products.max())
    ties = [int(i) for i in np.flatnonzero(products >= best - TIE_TOL)]
    return best, ties


def deduplicate(W: VectorSet) -> tuple[VectorSet, list[list[int]]]:
    """Remove duplicate vectors (max-norm <= DUP_TOL), keeping first occurrences.

    Returns the deduplicated set and, per kept member, the list of input
    indices merged into it.
    """
    kept: list[AlphaVector] = []
    groups: list[list[int]] = []
    for idx, m in enumerate(W):
        for k, existing in enumerate(kept):
            if np.max(np.abs(existing.values - m.values)) <= DUP_TOL:
                groups[k].append(idx)
                break
        else:
            kept.append(m)
            groups.append([idx])
    return VectorSet(kept, graph=W.graph if len(kept) == len(W) else None), groups


def canonical_order(W: VectorSet) -> list[int]:
    """Indices that sort members lexicographically by their value entries."""
    return sorted(range(len(W)), key=lambda i: tuple(W[i].values))


def canonical_sort(W: VectorSet) -> tuple[VectorSet, list[int]]:
    order = canonical_order(W)
    return VectorSet([W[i] for i in order]), order


def pointwise_dominance_prune(W: VectorSet) -> tuple[VectorSet, list[int]]:
    """Drop vectors pointwise dominated by another member (earlier index wins ties).

    Returns the pruned set and the kept input indices.
    """
    vals = W.matrix() if len(W) else np.zeros((0, 0))
    k = len(W)
    kept_mask = np.ones(k, dtype=bool)
    for i in range(k):
        for j in range(k):
            if i == j or not np.all(vals[j] >= vals[i]):
                continue
            if np.all(vals[i] >= vals[j]):
                # equal vectors: keep the earlier index
                if j < i:
                    kept_mask[i] = False
                    break
            else:
                kept_mask[i] = False
                break
    kept = [int(i) for i in np.flatnonzero(kept_mask)]
    return VectorSet([W[i] for i in kept]), kept


# ---------------------------------------------------------------------------
# Alpha-vector file format: action index line, values line, blank line.
# ---------------------------------------------------------------------------


def write_alpha_file(W: VectorSet, path) -> None:
    with open(path, "w") as fh:
        for m in W:
            fh.write(f"{m.action if m.action is not None else -1}\n")
            fh.write(" ".join(repr(float(v)) for v in m.values) + "\n\n")


def read_alpha_file(path) -> VectorSet:
    members = []
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    i = 0
    while i < len(lines):
        if not lines[i]:
            i += 1
            continue
        action = int(lines[i])
        values = np.array([float(tok) for tok in lines[i + 1].split()])
        members.append(AlphaVector(values, action=None if action < 0 else action))
        i += 2
    return VectorSet(members)
