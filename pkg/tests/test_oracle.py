import numpy as np
import pytest

from ippomdp.oracle import (RandomModelSpec, brute_force_neighbors,
                            exhaustive_dp_update, grid_covering_check,
                            random_pomdp, simplex_grid)
from ippomdp.pruning import lark_prune
from ippomdp.solver import initial_value_function

from conftest import assert_same_value_set, make_set


def test_exhaustive_update_output_is_parsimonious(tiger_model):
    V = initial_value_function(tiger_model)
    for _ in range(3):
        V = exhaustive_dp_update(V, tiger_model)
    again, _ = lark_prune(V)
    assert len(again) == len(V)


def test_exhaustive_update_covers_unpruned_union(tiger_model):
    from ippomdp.dp import _exhaustive_union
    V = initial_value_function(tiger_model)
    for _ in range(2):
        V_next = exhaustive_dp_update(V, tiger_model)
        union = _exhaustive_union(V, tiger_model)
        assert grid_covering_check(union, V_next, resolution=50)
        V = V_next


def test_exhaustive_update_cap():
    model = random_pomdp(RandomModelSpec(2, 2, 3, seed=1))
    V = make_set(np.random.default_rng(2).normal(size=(30, 2)))
    with pytest.raises(ValueError):
        exhaustive_dp_update(V, model, cap=1000)


def test_simplex_grid_counts_and_sums():
    grid = simplex_grid(3, 4)
    assert grid.shape == (15, 3)  # C(4 + 3 - 1, 3 - 1)
    assert np.allclose(grid.sum(axis=1), 1.0)
    assert np.all(grid >= 0.0)


def test_grid_covering_accepts_equal_envelope():
    full = make_set([[1, 0], [0, 1], [0.4, 0.4]])
    candidate = make_set([[1, 0], [0, 1]])
    assert grid_covering_check(full, candidate)


def test_grid_covering_rejects_losing_a_region():
    full = make_set([[1, 0], [0, 1]])
    candidate = make_set([[1, 0]])
    assert not grid_covering_check(full, candidate)


def test_grid_covering_rejects_tiny_resolution():
    W = make_set([[1, 0]])
    with pytest.raises(ValueError):
        grid_covering_check(W, W, resolution=1)


def test_brute_force_neighbors_limit():
    W = make_set(np.random.default_rng(3).normal(size=(31, 2)))
    with pytest.raises(ValueError):
        brute_force_neighbors(W)


def test_random_pomdp_is_deterministic():
    spec = RandomModelSpec(3, 2, 2, seed=17)
    m1, m2 = random_pomdp(spec), random_pomdp(spec)
    assert np.array_equal(m1.transition, m2.transition)
    assert np.array_equal(m1.observation, m2.observation)
    assert np.array_equal(m1.reward, m2.reward)
    m3 = random_pomdp(RandomModelSpec(3, 2, 2, seed=18))
    assert not np.array_equal(m1.transition, m3.transition)


def test_random_pomdp_rows_are_stochastic():
    for sparsity in (0.0, 0.5):
        model = random_pomdp(RandomModelSpec(4, 3, 3, seed=5,
                                             sparsity=sparsity))
        assert np.allclose(model.transition.sum(axis=-1), 1.0)
        assert np.allclose(model.observation.sum(axis=-1), 1.0)
        assert np.all(model.transition >= 0.0)
        assert np.all(model.observation >= 0.0)


def test_random_pomdp_sparsity_zero_has_positive_rows():
    model = random_pomdp(RandomModelSpec(3, 2, 2, seed=7, sparsity=0.0))
    assert np.all(model.transition > 0.0)
    assert np.all(model.observation > 0.0)


def test_random_pomdp_shared_observation_pair():
    model = random_pomdp(RandomModelSpec(3, 3, 2, seed=9,
                                         shared_observation_pair=True))
    assert np.array_equal(model.observation[0], model.observation[1])
    from ippomdp.dp import group_actions_by_observation_model
    groups = group_actions_by_observation_model(model)
    assert [0, 1] in groups


def test_random_model_spec_validation():
    with pytest.raises(ValueError):
        RandomModelSpec(0, 1, 1)
    with pytest.raises(ValueError):
        RandomModelSpec(2, 2, 2, sparsity=1.5)


def test_oracle_agrees_with_itself_on_reordered_input(tiger_model):
    # the oracle's output is a function of the represented value function,
    # not of the member order
    rng = np.random.default_rng(11)
    V = make_set(rng.normal(size=(5, 2)))
    V_rev = make_set(V.matrix()[::-1])
    a = exhaustive_dp_update(V, tiger_model)
    b = exhaustive_dp_update(V_rev, tiger_model)
    assert_same_value_set(a, b, tol=1e-9)
