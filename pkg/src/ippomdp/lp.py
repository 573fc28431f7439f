"""Dense two-phase simplex for the small belief-space LPs the pruner generates.

All programs share one shape: belief variables b(s) >= 0 on the probability
simplex, an optional free slack variable x, inequality rows of the form
d.b >= sigma*x (sigma in {0, 1}), and extra equality rows over b.  Pivoting
uses largest-reduced-cost entering with a switch to Bland's smallest-index
rule, so outcomes are deterministic and cycling-free.  Float solves whose
final basis turns out primal-infeasible are redone, ultimately in exact
rational arithmetic, so every status and sign decision is reliable even on
degenerate programs with near-duplicate rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .vectorset import AlphaVector

# x* above this counts as "positive" (witness regions intersect);
# |x*| at or below it is the boundary case.  Solved objectives are polished
# to near machine precision, so this can sit well below the region margins
# that occur in practice while staying far above solver noise.
POS_TOL = 1e-9
# pivot / feasibility tolerance inside the simplex tableau
_EPS = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LpError(RuntimeError):
    """Numerical failure in the LP engine (pivot budget exhausted)."""


@dataclass
class LinearProgram:
    """maximize x (or objective.b) subject to

        ineq[i].b >= ineq_slack[i] * x        for each inequality row
        eq[j].b == eq_rhs[j]                  (always includes sum b = 1)
        b(s) == 0 for s in fixed_zero
        b >= 0
    """

    belief_dim: int
    has_slack: bool
    ineq: np.ndarray          # (k, n)
    ineq_slack: np.ndarray    # (k,) entries in {0, 1}
    eq: np.ndarray            # (q, n)
    eq_rhs: np.ndarray        # (q,)
    objective: np.ndarray | None = None
    fixed_zero: tuple[int, ...] = ()

    @property
    def row_count(self) -> int:
        """Constraint rows: inequalities + equalities + nonnegativity bounds."""
        return int(self.ineq.shape[0] + self.eq.shape[0] + len(self.fixed_zero)
                   + self.belief_dim)

    def dump(self) -> str:
        """Plain-text inequality listing for debugging."""
        lines = [f"maximize {'x' if self.has_slack else self.objective}"]
        for row, sig in zip(self.ineq, self.ineq_slack):
            lines.append(f"  {row} . b >= {'x' if sig else 0}")
        for row, rhs in zip(self.eq, self.eq_rhs):
            lines.append(f"  {row} . b == {rhs}")
        for s in self.fixed_zero:
            lines.append(f"  b[{s}] == 0")
        lines.append("  b >= 0, sum constraints as listed")
        return "\n".join(lines)


@dataclass
class LpOutcome:
    status: str
    objective_value: float | None = None
    maximizer: np.ndarray | None = None


def make_program(belief_dim: int,
                 ineq_rows: list[tuple[np.ndarray, int]] | None = None,
                 eq_rows: list[tuple[np.ndarray, float]] | None = None,
                 has_slack: bool = True,
                 objective: np.ndarray | None = None,
                 fixed_zero: tuple[int, ...] = ()) -> LinearProgram:
    """Assemble a LinearProgram; the simplex equality sum b = 1 is added here."""
    n = belief_dim
    ineq_rows = ineq_rows or []
    eq_rows = eq_rows or []
    ineq = np.array([r for r, _ in ineq_rows], dtype=float).reshape(len(ineq_rows), n)
    slack = np.array([s for _, s in ineq_rows], dtype=float)
    eq = np.vstack([np.ones((1, n))] + [np.asarray(r, dtype=float).reshape(1, n)
                                        for r, _ in eq_rows])
    eq_rhs = np.array([1.0] + [rhs for _, rhs in eq_rows], dtype=float)
    return LinearProgram(n, has_slack, ineq, slack, eq, eq_rhs,
                         objective=objective, fixed_zero=tuple(fixed_zero))


def _vals(v) -> np.ndarray:
    return v.values if isinstance(v, AlphaVector) else np.asarray(v, dtype=float)


def build_intersection_lp(alpha, constraint_set_w,
                          beta, constraint_set_x) -> LinearProgram:
    """Witness-region intersection test: maximize x with x on both row groups.

    x* > 0 iff the witness regions of alpha (w.r.t. constraint_set_w) and beta
    (w.r.t. constraint_set_x) intersect.  The constraint sets must exclude
    alpha and beta themselves.  Members may be AlphaVectors or raw arrays.
    """
    av, bv = _vals(alpha), _vals(beta)
    rows = [(av - _vals(other), 1) for other in constraint_set_w]
    rows += [(bv - _vals(other), 1) for other in constraint_set_x]
    return make_program(av.size, ineq_rows=rows)


def build_reformulated_lp(alpha, neighbors_alpha,
                          beta, neighbors_beta) -> LinearProgram:
    """Intersection test with x only on the alpha rows.

    Infeasible iff the closed witness region of beta (w.r.t. its neighbor
    constraints) is empty.
    """
    av, bv = _vals(alpha), _vals(beta)
    rows = [(av - _vals(other), 1) for other in neighbors_alpha]
    rows += [(bv - _vals(other), 0) for other in neighbors_beta]
    return make_program(av.size, ineq_rows=rows)


def is_trivially_intersecting(lp: LinearProgram) -> bool:
    """No slack rows at all: the tested regions are the whole simplex."""
    return lp.has_slack and lp.ineq.shape[0] == 0


def _bland_enter(reduced: np.ndarray, allowed: np.ndarray, tol: float) -> int:
    candidates = np.flatnonzero(allowed & (reduced > tol))
    return int(candidates[0]) if candidates.size else -1


def _dantzig_enter(reduced: np.ndarray, allowed: np.ndarray, tol: float) -> int:
    masked = np.where(allowed, reduced, -np.inf)
    j = int(np.argmax(masked))  # argmax takes the smallest index on ties
    return j if masked[j] > tol else -1


def _bland_leave(column: np.ndarray, rhs: np.ndarray, basis: list[int],
                 tol: float, prefer_large_pivot: bool) -> int:
    pos = column > tol
    if not pos.any():
        return -1
    ratios = np.where(pos, rhs / np.where(pos, column, 1.0), np.inf)
    ties = np.flatnonzero(ratios <= ratios.min() + _EPS)
    if prefer_large_pivot:
        return int(ties[np.argmax(column[ties])])
    basis_vars = np.asarray(basis)[ties]
    return int(ties[np.argmin(basis_vars)])


def _run_simplex(A: np.ndarray, rhs: np.ndarray, c: np.ndarray,
                 basis: list[int], allowed: np.ndarray,
                 max_pivots: int, stabilized: bool = False) -> str:
    """Maximize c.v in place on the tableau (A, rhs); returns 'optimal' or 'unbounded'.

    The stabilized mode trades Bland's anti-cycling guarantee for numerical
    robustness on ill-conditioned tableaus: larger pivot tolerances and
    largest-coefficient ratio tie-breaking.  The pivot budget backstops any
    cycling it could introduce.
    """
    enter_tol = 1e-7 if stabilized else _EPS
    leave_tol = 1e-7 if stabilized else _EPS
    # steepest-reduced-cost entering is much faster in practice; fall back to
    # Bland's rule (provably cycle-free) if the run drags on, so termination
    # stays guaranteed while both rules remain deterministic
    bland_after = 50 + 4 * A.shape[0]
    for pivot in range(max_pivots):
        # reduced costs r_j = c_j - c_B . A_j  (A holds B^-1 A throughout)
        cb = c[basis]
        reduced = c - cb @ A
        if pivot < bland_after:
            j = _dantzig_enter(reduced, allowed, enter_tol)
        else:
            j = _bland_enter(reduced, allowed, enter_tol)
        if j < 0:
            return OPTIMAL
        i = _bland_leave(A[:, j], rhs, basis, leave_tol, stabilized)
        if i < 0 and stabilized:
            # no usable pivot above the stabilized tolerance; fall back to any
            # positive entry before declaring the direction unbounded
            i = _bland_leave(A[:, j], rhs, basis, _EPS, True)
        if i < 0:
            return UNBOUNDED
        piv = A[i, j]
        A[i] /= piv
        rhs[i] /= piv
        col = A[:, j].copy()
        col[i] = 0.0
        A -= np.outer(col, A[i])
        rhs -= col * rhs[i]
        rhs[(rhs < 0) & (rhs > -_EPS)] = 0.0
        basis[i] = j
    raise LpError("pivot budget exhausted; LP appears ill-conditioned")


def _can_be_unbounded(lp: LinearProgram) -> bool:
    """Only the free slack variable x can diverge, and any slack inequality
    row d.b >= x caps it (b lives on the simplex, so d.b is bounded)."""
    return lp.has_slack and not bool(np.any(lp.ineq_slack > 0.5))


def solve_lp(lp: LinearProgram, max_pivots: int = 20000) -> LpOutcome:
    """Two-phase dense simplex; vertex-optimal and deterministic.

    Solves with Bland's rule first; if roundoff corrupts that run (phase-1
    "unbounded", a bounded program reported unbounded, or a final basis whose
    exact basic solution is infeasible), retries once in a stabilized mode
    with coarser pivot tolerances, and as a last resort re-solves the program
    in exact rational arithmetic.
    """
    try:
        outcome = _solve_once(lp, max_pivots, stabilized=False)
    except LpError:
        outcome = None
    if outcome is None:
        try:
            outcome = _solve_once(lp, max_pivots, stabilized=True)
        except LpError:
            outcome = None
    if outcome is None:
        outcome = _solve_exact(lp, max_pivots)
    return outcome


def _solve_once(lp: LinearProgram, max_pivots: int,
                stabilized: bool) -> LpOutcome | None:
    """One two-phase solve; returns None when roundoff produced an outcome
    that is impossible for this program, so the caller can retry stabilized.

    Variables: b (n, >= 0), x = xp - xm if has_slack, one surplus per
    inequality row.
    """
    n = lp.belief_dim
    k = lp.ineq.shape[0]
    nslack = 2 if lp.has_slack else 0
    ncols = n + nslack + k

    rows = []
    rhs = []
    # inequality rows: d.b - sigma*xp + sigma*xm - surplus = 0
    for i in range(k):
        row = np.zeros(ncols)
        row[:n] = lp.ineq[i]
        if lp.has_slack:
            row[n] = -lp.ineq_slack[i]
            row[n + 1] = lp.ineq_slack[i]
        row[n + nslack + i] = -1.0
        rows.append(row)
        rhs.append(0.0)
    # equality rows over b
    for i in range(lp.eq.shape[0]):
        row = np.zeros(ncols)
        row[:n] = lp.eq[i]
        rows.append(row)
        rhs.append(float(lp.eq_rhs[i]))
    for s in lp.fixed_zero:
        row = np.zeros(ncols)
        row[s] = 1.0
        rows.append(row)
        rhs.append(0.0)

    A = np.array(rows, dtype=float)
    rhs = np.array(rhs, dtype=float)
    m = A.shape[0]
    flip = rhs < 0
    A[flip] *= -1
    rhs[flip] *= -1
    A_orig = A.copy()
    rhs_orig = rhs.copy()

    # Phase 1: artificial variable per row, maximize -sum(artificials).
    full = np.hstack([A, np.eye(m)])
    c1 = np.zeros(ncols + m)
    c1[ncols:] = -1.0
    basis = list(range(ncols, ncols + m))
    allowed = np.ones(ncols + m, dtype=bool)
    allowed[ncols:] = False  # artificials never re-enter
    status = _run_simplex(full, rhs, c1, basis, allowed, max_pivots, stabilized)
    infeasibility = -(c1[basis] @ rhs)
    if status != OPTIMAL and infeasibility > 1e-7:
        # phase 1 is never truly unbounded; this run is numerically corrupted
        return None
    if infeasibility > 1e-7:
        return LpOutcome(INFEASIBLE)

    # Drive any artificial still in the basis out, or drop its (redundant) row.
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= ncols:
            pivot_col = -1
            for j in range(ncols):
                if abs(full[i, j]) > 1e-8:
                    pivot_col = j
                    break
            if pivot_col < 0:
                keep[i] = False
                continue
            piv = full[i, pivot_col]
            full[i] /= piv
            rhs[i] /= piv
            for r in range(m):
                if r != i and abs(full[r, pivot_col]) > 0.0:
                    factor = full[r, pivot_col]
                    full[r] -= factor * full[i]
                    rhs[r] -= factor * rhs[i]
            basis[i] = pivot_col
    full = full[keep][:, :ncols]
    rhs = rhs[keep]
    basis = [basis[i] for i in range(m) if keep[i]]

    # Phase 2: real objective.
    c2 = np.zeros(ncols)
    if lp.has_slack:
        c2[n] = 1.0
        c2[n + 1] = -1.0
    else:
        if lp.objective is None:
            raise ValueError("objective required when has_slack is false")
        c2[:n] = lp.objective
    allowed = np.ones(ncols, dtype=bool)
    status = _run_simplex(full, rhs, c2, basis, allowed, max_pivots, stabilized)
    if status == UNBOUNDED:
        if not _can_be_unbounded(lp):
            # a bounded program reported unbounded: numerical corruption
            return None
        return LpOutcome(UNBOUNDED)

    solution = np.zeros(ncols)
    solution[basis] = rhs
    # polish: re-derive the basic solution from the original, unpivoted rows,
    # discarding the roundoff accumulated over the pivot sequence; decisions
    # made against POS_TOL then no longer depend on the pivot path taken
    B = A_orig[keep][:, basis]
    # the split free variable x = xp - xm may sit in the basis at a negative
    # value (a valid representation of negative x); every other variable is
    # sign-constrained and a negative value there means the ratio test let a
    # sub-tolerance pivot slip by and the "optimal" claim is bogus
    sign_constrained = np.array([not (lp.has_slack and col in (n, n + 1))
                                 for col in basis], dtype=bool)
    try:
        polished = np.linalg.solve(B, rhs_orig[keep])
        residual = float(np.max(np.abs(B @ polished - rhs_orig[keep]))) \
            if polished.size else 0.0
        worst = float(polished[sign_constrained].min()) \
            if sign_constrained.any() else 0.0
        if residual <= 1e-9:
            if worst < -1e-7:
                # infeasible final basis: have the caller retry stabilized
                return None
            solution[:] = 0.0
            polished[sign_constrained] = np.maximum(
                polished[sign_constrained], 0.0)
            solution[basis] = polished
    except np.linalg.LinAlgError:
        pass
    if solution[basis][sign_constrained].size and \
            float(solution[basis][sign_constrained].min()) < -1e-7:
        return None
    maximizer = solution[:n].copy()
    maximizer[np.abs(maximizer) < _EPS] = 0.0
    value = float(c2 @ solution)
    return LpOutcome(OPTIMAL, objective_value=value, maximizer=maximizer)
def _exact_simplex(A: list, rhs: list, red: list, basis: list[int],
                   allowed: list[bool], max_pivots: int) -> str:
    """Simplex over exact rationals; cycle-free and tolerance-free.

    Rows of A are sparse dicts {column: nonzero Fraction} (the tableaus here
    are ~90% zeros); red is the dense reduced-cost row, updated per pivot
    instead of re-priced from scratch.  Entering variable: largest reduced
    cost at first for speed, then Bland's smallest-index rule so termination
    stays guaranteed; both rules are deterministic.
    """
    m, ncols = len(A), len(red)
    zero = Fraction(0)
    bland_after = 50 + 4 * m
    for pivot in range(max_pivots):
        enter = -1
        if pivot < bland_after:
            best = zero
            for j in range(ncols):
                if allowed[j] and red[j] > best:
                    best, enter = red[j], j
        else:
            for j in range(ncols):
                if allowed[j] and red[j] > zero:
                    enter = j
                    break
        if enter < 0:
            return OPTIMAL
        leave = -1
        best_ratio = None
        for i in range(m):
            aik = A[i].get(enter)
            if aik is not None and aik > zero:
                ratio = rhs[i] / aik
                if best_ratio is None or ratio < best_ratio or \
                        (ratio == best_ratio and basis[i] < basis[leave]):
                    best_ratio, leave = ratio, i
        if leave < 0:
            return UNBOUNDED
        piv = A[leave][enter]
        Al = {j: v / piv for j, v in A[leave].items()}
        A[leave] = Al
        rhs[leave] /= piv
        bl = rhs[leave]
        items = list(Al.items())
        for r in range(m):
            if r == leave:
                continue
            Ar = A[r]
            f = Ar.get(enter)
            if f is None:
                continue
            for j, alv in items:
                v = Ar.get(j)
                nv = -f * alv if v is None else v - f * alv
                if nv:
                    Ar[j] = nv
                else:
                    Ar.pop(j, None)
            rhs[r] -= f * bl
        f = red[enter]
        if f:
            for j, alv in items:
                red[j] -= f * alv
        basis[leave] = enter
    raise LpError("exact simplex pivot budget exhausted")


def _solve_exact(lp: LinearProgram, max_pivots: int) -> LpOutcome:
    """Two-phase simplex in exact rational arithmetic.

    Only used when both float runs end in a certifiably corrupted state
    (degenerate programs with near-duplicate rows); float inputs convert to
    rationals exactly, so every status and sign decision here is exact.
    Artificial variables stay in the phase-2 tableau but are barred from
    entering; rows whose artificial remains basic (at zero) are redundant and
    simply ride along.
    """
    n = lp.belief_dim
    k = lp.ineq.shape[0]
    nslack = 2 if lp.has_slack else 0
    nstruct = n + nslack + k
    zero, one = Fraction(0), Fraction(1)

    rows: list[dict] = []
    rhs: list[Fraction] = []
    for i in range(k):
        row = {s: Fraction(float(lp.ineq[i, s]))
               for s in range(n) if lp.ineq[i, s] != 0.0}
        if lp.has_slack and lp.ineq_slack[i] != 0.0:
            sig = Fraction(float(lp.ineq_slack[i]))
            row[n] = -sig
            row[n + 1] = sig
        row[n + nslack + i] = -one
        rows.append(row)
        rhs.append(zero)
    for i in range(lp.eq.shape[0]):
        rows.append({s: Fraction(float(lp.eq[i, s]))
                     for s in range(n) if lp.eq[i, s] != 0.0})
        rhs.append(Fraction(float(lp.eq_rhs[i])))
    for s in lp.fixed_zero:
        rows.append({s: one})
        rhs.append(zero)

    m = len(rows)
    ncols = nstruct + m
    for i in range(m):
        if rhs[i] < zero:
            rows[i] = {j: -v for j, v in rows[i].items()}
            rhs[i] = -rhs[i]
        rows[i][nstruct + i] = one    # artificial

    # phase 1: maximize -(sum of artificials); the reduced cost of column j
    # under the all-artificial basis is the column sum (0 for artificials)
    basis = list(range(nstruct, ncols))
    allowed = [True] * nstruct + [False] * m
    red1 = [zero] * ncols
    for row in rows:
        for j, v in row.items():
            if j < nstruct:
                red1[j] += v
    status = _exact_simplex(rows, rhs, red1, basis, allowed, max_pivots)
    if status != OPTIMAL:
        raise LpError("exact simplex: phase 1 reported unbounded")
    if sum((rhs[i] for i in range(m) if basis[i] >= nstruct), zero) > zero:
        return LpOutcome(INFEASIBLE)

    # phase 2
    c2 = [zero] * ncols
    if lp.has_slack:
        c2[n] = one
        c2[n + 1] = -one
    else:
        if lp.objective is None:
            raise ValueError("objective required when has_slack is false")
        for s in range(n):
            c2[s] = Fraction(float(lp.objective[s]))
    red2 = list(c2)
    for i in range(m):
        cb = c2[basis[i]]
        if cb:
            for j, v in rows[i].items():
                red2[j] -= cb * v
    status = _exact_simplex(rows, rhs, red2, basis, allowed, max_pivots)
    if status == UNBOUNDED:
        if not _can_be_unbounded(lp):
            raise LpError("exact simplex: bounded program reported unbounded")
        return LpOutcome(UNBOUNDED)

    solution = [zero] * ncols
    for i, b in enumerate(basis):
        solution[b] = rhs[i]
    value = float(sum(c2[j] * solution[j] for j in range(nstruct)))
    maximizer = np.array([float(solution[s]) for s in range(n)])
    maximizer[np.abs(maximizer) < _EPS] = 0.0
    return LpOutcome(OPTIMAL, objective_value=value, maximizer=maximizer)
