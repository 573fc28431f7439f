import numpy as np
import pytest

import ippomdp.lp as lp_mod
from ippomdp.lp import solve_lp as real_solve_lp
from ippomdp.oracle import brute_force_neighbors
from ippomdp.pruning import (csp_neighbor, csp_plain, csp_restricted_region,
                             incremental_prune, lark_prune)
from ippomdp.vectorset import WITNESS, cross_sum, value_at

from conftest import assert_same_value_set, make_set, random_beliefs, sorted_values


def seeded(rows):
    """A parsimonious set with support points and an exact neighbor graph."""
    out, _ = lark_prune(make_set(rows))
    out.graph = brute_force_neighbors(out)
    return out


def random_parsimonious(rng, count, dim):
    return seeded(rng.normal(size=(count, dim)))


def test_lark_drops_analytically_dominated_vector():
    out, stats = lark_prune(make_set([[1, 0], [0, 1], [0.4, 0.4]]))
    assert np.allclose(sorted_values(out), [[0, 1], [1, 0]])
    assert stats.vectors_in == 3 and stats.vectors_out == 2


def test_lark_singleton_gets_a_witness_point():
    out, _ = lark_prune(make_set([[2, 3]]))
    assert len(out) == 1
    assert out[0].support_point is not None
    assert out[0].support_kind == WITNESS


def test_lark_survivors_carry_maximizing_support_points():
    rng = np.random.default_rng(3)
    out, _ = lark_prune(make_set(rng.normal(size=(10, 3))))
    vals = out.matrix()
    for i, m in enumerate(out):
        products = vals @ m.support_point
        assert products[i] >= products.max() - 1e-9


def test_lark_output_is_parsimonious_fixed_point():
    rng = np.random.default_rng(4)
    out, _ = lark_prune(make_set(rng.normal(size=(15, 3))))
    again, _ = lark_prune(out)
    assert len(again) == len(out)


def test_lark_preserves_upper_envelope():
    rng = np.random.default_rng(5)
    W = make_set(rng.normal(size=(20, 3)))
    out, _ = lark_prune(W)
    for b in random_beliefs(3, 200, seed=6):
        assert value_at(out, b)[0] == pytest.approx(value_at(W, b)[0], abs=1e-9)


def test_csp_plain_singleton_x_accepts_everything():
    W = seeded([[1, 0], [0, 1]])
    X = make_set([[2, 2]])
    out, stats, _ = csp_plain(W, X)
    assert np.allclose(sorted_values(out), [[2, 3], [3, 2]])


def test_csp_plain_drops_midpoint_degenerate_sum():
    # the two mixed sums coincide at (1, 1), whose region is a single point;
    # under the strict-witness definition it is excluded
    W = seeded([[1, 0], [0, 1]])
    out, _, _ = csp_plain(W, W)
    assert np.allclose(sorted_values(out), [[0, 2], [2, 0]])


def test_csp_plain_no_pruning_counts():
    # all six pairwise regions intersect, so nothing can be pruned
    W = seeded([[1, 0, 0], [0, 1, 1]])
    X = seeded([[0, 1, 0], [0, 0, 1], [0, 0.6, 0.6]])
    out, stats, record = csp_plain(W, X)
    assert len(out) == 6
    assert stats.lp_count == 6
    assert record.full_formula_rows == 2 + 3 + 3 - 1


def test_csp_restricted_region_matches_plain():
    rng = np.random.default_rng(8)
    for _ in range(10):
        W = random_parsimonious(rng, 4, 3)
        X = random_parsimonious(rng, 4, 3)
        plain, ps, _ = csp_plain(W, X)
        rr, rs, _ = csp_restricted_region(W, X)
        assert_same_value_set(plain, rr)
        assert rs.lp_count <= ps.lp_count
        assert rs.lps_saved_by_shortcut >= 0


def test_csp_restricted_region_shortcut_fires():
    W = seeded([[1, 0], [0, 1]])
    X = seeded([[0.5, 0], [0, 0.5]])
    _, stats, _ = csp_restricted_region(W, X)
    assert stats.lps_saved_by_shortcut >= 1


def test_csp_restricted_region_requires_support_points():
    W = make_set([[1, 0], [0, 1]])
    X = make_set([[1, 1]])
    with pytest.raises(ValueError):
        csp_restricted_region(W, X)


@pytest.mark.parametrize("mode", ["full", "reduced", "reformulated"])
def test_csp_neighbor_matches_plain(mode):
    rng = np.random.default_rng(13)
    for _ in range(10):
        W = random_parsimonious(rng, 4, 3)
        X = random_parsimonious(rng, 4, 3)
        plain, _, _ = csp_plain(W, X)
        nb, _, _ = csp_neighbor(W, X, lp_mode=mode)
        assert_same_value_set(plain, nb)
        assert all(m.support_point is not None for m in nb)


def test_csp_neighbor_singleton_x():
    W = seeded([[1, 0], [0, 1]])
    X = seeded([[3, 3]])
    out, _, _ = csp_neighbor(W, X)
    assert np.allclose(sorted_values(out), [[3, 4], [4, 3]])


def test_csp_neighbor_midpoint_case_matches_plain():
    W = seeded([[1, 0], [0, 1]])
    out, _, _ = csp_neighbor(W, W, lp_mode="full")
    assert np.allclose(sorted_values(out), [[0, 2], [2, 0]])


def test_reformulated_uses_no_more_lps_than_reduced():
    rng = np.random.default_rng(17)
    totals = {"reduced": 0, "reformulated": 0}
    for _ in range(15):
        W = random_parsimonious(rng, 5, 3)
        X = random_parsimonious(rng, 5, 3)
        for mode in totals:
            _, stats, _ = csp_neighbor(W, X, lp_mode=mode)
            totals[mode] += stats.lp_count
    assert totals["reformulated"] <= totals["reduced"]


def test_covering_property_on_random_beliefs():
    rng = np.random.default_rng(19)
    W = random_parsimonious(rng, 5, 3)
    X = random_parsimonious(rng, 5, 3)
    out, _, _ = csp_plain(W, X)
    for b in random_beliefs(3, 1000, seed=23):
        expected = value_at(W, b)[0] + value_at(X, b)[0]
        assert value_at(out, b)[0] == pytest.approx(expected, abs=1e-6)


def test_incremental_prune_single_set_is_filtering():
    W = make_set([[1, 0], [0, 1], [0.3, 0.3]])
    out, _, _ = incremental_prune([W], variant="plain")
    direct, _ = lark_prune(W)
    assert_same_value_set(out, direct)


def test_incremental_prune_identical_singletons_sum():
    s = make_set([[1, 2]])
    out, _, _ = incremental_prune([s, s, s], variant="plain")
    assert np.allclose(out.matrix(), [[3, 6]])


def test_incremental_prune_equals_direct_prune_of_cross_sum():
    rng = np.random.default_rng(29)
    sets = [random_parsimonious(rng, 3, 3) for _ in range(3)]
    folded, _, _ = incremental_prune(sets, variant="plain")
    full = cross_sum(cross_sum(sets[0], sets[1]), sets[2])
    direct, _ = lark_prune(full)
    assert_same_value_set(folded, direct)


def test_incremental_prune_order_invariant_value_set():
    rng = np.random.default_rng(31)
    sets = [random_parsimonious(rng, 3, 3) for _ in range(3)]
    a, _, _ = incremental_prune(sets, variant="plain")
    b, _, _ = incremental_prune(sets[::-1], variant="plain")
    assert_same_value_set(a, b)


def test_lp_count_matches_engine_invocations(monkeypatch):
    calls = {"n": 0}

    def counting(program, **kwargs):
        calls["n"] += 1
        return real_solve_lp(program, **kwargs)

    monkeypatch.setattr(lp_mod, "solve_lp", counting)
    rng = np.random.default_rng(37)
    W = random_parsimonious(rng, 4, 3)
    X = random_parsimonious(rng, 4, 3)
    for fn in (csp_plain, csp_restricted_region):
        calls["n"] = 0
        _, stats, _ = fn(W, X)
        assert stats.lp_count == calls["n"]
    for mode in ("full", "reduced", "reformulated"):
        calls["n"] = 0
        _, stats, _ = csp_neighbor(W, X, lp_mode=mode)
        assert stats.lp_count == calls["n"]
