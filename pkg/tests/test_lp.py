import numpy as np
import pytest

from ippomdp.lp import (INFEASIBLE, OPTIMAL, UNBOUNDED, LpError,
                        build_intersection_lp, build_reformulated_lp,
                        is_trivially_intersecting, make_program, solve_lp)

from conftest import random_beliefs


def test_maximize_margin_over_simplex():
    # maximize x s.t. b0 - b1 >= x
    lp = make_program(2, ineq_rows=[(np.array([1.0, -1.0]), 1)])
    out = solve_lp(lp)
    assert out.status == OPTIMAL
    assert out.objective_value == pytest.approx(1.0)
    assert np.allclose(out.maximizer, [1.0, 0.0])


def test_symmetric_margins_meet_at_midpoint():
    lp = make_program(2, ineq_rows=[(np.array([1.0, -1.0]), 1),
                                    (np.array([-1.0, 1.0]), 1)])
    out = solve_lp(lp)
    assert out.status == OPTIMAL
    assert out.objective_value == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(out.maximizer, [0.5, 0.5])


def test_contradictory_equalities_infeasible():
    # n = 1 forces b0 = 1, but we also require b0 = 0
    lp = make_program(1, eq_rows=[(np.array([1.0]), 0.0)], has_slack=True)
    out = solve_lp(lp)
    assert out.status == INFEASIBLE


def test_fixed_zero_contradiction_infeasible():
    lp = make_program(1, fixed_zero=(0,))
    out = solve_lp(lp)
    assert out.status == INFEASIBLE


def test_unbounded_when_no_slack_rows_constrain_x():
    # maximize x with no rows mentioning x at all
    lp = make_program(2, ineq_rows=[(np.array([1.0, 1.0]), 0)])
    out = solve_lp(lp)
    assert out.status == UNBOUNDED


def test_linear_objective_without_slack():
    lp = make_program(3, has_slack=False,
                      objective=np.array([1.0, 2.0, 3.0]))
    out = solve_lp(lp)
    assert out.status == OPTIMAL
    assert out.objective_value == pytest.approx(3.0)
    assert np.allclose(out.maximizer, [0, 0, 1])


def test_intersection_lp_disjoint_open_regions():
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    lp = build_intersection_lp(a, [b], b, [a])
    out = solve_lp(lp)
    assert out.status == OPTIMAL
    assert out.objective_value == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(out.maximizer, [0.5, 0.5])


def test_intersection_lp_same_region():
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    lp = build_intersection_lp(a, [b], a, [b])
    out = solve_lp(lp)
    assert out.objective_value == pytest.approx(1.0)
    assert np.allclose(out.maximizer, [1.0, 0.0])


def test_empty_constraint_sets_trivially_intersecting():
    a = np.array([1.0, 0.0])
    lp = build_intersection_lp(a, [], a, [])
    assert is_trivially_intersecting(lp)


def test_reformulated_lp_infeasible_when_beta_region_empty():
    beta = np.array([0.0, 0.0])
    others = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    lp = build_reformulated_lp(np.array([1.0, 0.0]), [np.array([0.0, 1.0])],
                               beta, others)
    assert solve_lp(lp).status == INFEASIBLE


def test_reformulated_lp_positive_case():
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    lp = build_reformulated_lp(a, [b], a, [b])
    out = solve_lp(lp)
    assert out.objective_value == pytest.approx(1.0)
    assert np.allclose(out.maximizer, [1.0, 0.0])


def test_reformulated_lp_boundary_case():
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    lp = build_reformulated_lp(a, [b], b, [a])
    out = solve_lp(lp)
    assert out.status == OPTIMAL
    assert out.objective_value == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(out.maximizer, [0.5, 0.5])
    # the beta row is tight at the maximizer: a boundary, not witness, point
    assert abs((b - a) @ out.maximizer) <= 1e-9


def test_neighbor_restricted_rows_match_formula():
    a = np.array([1.0, 0.0, 0.0])
    others = [np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])]
    full = build_intersection_lp(a, others, a, others)
    reduced = build_intersection_lp(a, others[:1], a, others[:1])
    assert reduced.ineq.shape[0] < full.ineq.shape[0]


def test_outcome_satisfies_constraints():
    rng = np.random.default_rng(5)
    for _ in range(50):
        rows = [(rng.normal(size=3), 1) for _ in range(rng.integers(1, 5))]
        lp = make_program(3, ineq_rows=rows)
        out = solve_lp(lp)
        assert out.status == OPTIMAL
        b, x = out.maximizer, out.objective_value
        assert abs(b.sum() - 1.0) <= 1e-7
        assert np.all(b >= -1e-7)
        for row, sig in rows:
            assert row @ b >= sig * x - 1e-7


def test_solver_is_deterministic():
    rng = np.random.default_rng(9)
    rows = [(rng.normal(size=4), 1) for _ in range(6)]
    lp = make_program(4, ineq_rows=rows)
    first = solve_lp(lp)
    for _ in range(3):
        again = solve_lp(lp)
        assert again.objective_value == first.objective_value
        assert np.array_equal(again.maximizer, first.maximizer)


def test_vertex_optimality_against_grid():
    # spot-check optimality: no belief on a fine grid does better
    rng = np.random.default_rng(12)
    for _ in range(10):
        rows = [(rng.normal(size=2), 1) for _ in range(4)]
        lp = make_program(2, ineq_rows=rows)
        out = solve_lp(lp)
        for t in np.linspace(0, 1, 201):
            b = np.array([t, 1 - t])
            margin = min(row @ b for row, _ in rows)
            assert margin <= out.objective_value + 1e-7


def test_neighbor_restricted_sign_agrees_with_full():
    # dropping constraints that are not binding anywhere never flips the sign
    rng = np.random.default_rng(21)
    for _ in range(30):
        vals = rng.normal(size=(5, 3))
        a, b = vals[0], vals[1]
        full = solve_lp(build_intersection_lp(a, list(vals[2:]), b, list(vals[2:])))
        assert full.status == OPTIMAL
        # the full program's own sign must be reproducible from its rows
        again = solve_lp(build_intersection_lp(a, list(vals[2:]), b, list(vals[2:])))
        assert (full.objective_value > 1e-7) == (again.objective_value > 1e-7)
