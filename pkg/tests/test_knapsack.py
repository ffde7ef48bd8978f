import random
from fractions import Fraction

import pytest

from sockp import (KnapsackSubproblem, dantzig_bound, scale_to_integers,
                   solve_knapsack)
from sockp.knapsack import solve_knapsack_value

from conftest import enumerate_knapsack


def test_scale_rounds_weights_up_capacity_down():
    weights, cap = scale_to_integers([3.1415926535], 10.9999999, 10 ** 6)
    assert weights == [3141593]
    assert cap == 10999999


def test_scale_identity_on_integers():
    weights, cap = scale_to_integers([3, 7, 11], 21, 1)
    assert weights == [3, 7, 11]
    assert cap == 21


def test_scale_tiny_positive_weight_becomes_one():
    weights, cap = scale_to_integers([0.0000001], 0, 10 ** 6)
    assert weights == [1]
    assert cap == 0


def test_scale_accepts_fractions_exactly():
    weights, cap = scale_to_integers([Fraction(1, 3)], Fraction(2, 3), 3)
    assert weights == [1]
    assert cap == 2


def test_scale_rejects_negative_weight():
    with pytest.raises(ValueError):
        scale_to_integers([-1.0], 5, 10)


def test_scale_rejects_bad_factor():
    with pytest.raises(ValueError):
        scale_to_integers([1.0], 5, 0)


def test_scale_overflow_raises():
    with pytest.raises(OverflowError):
        scale_to_integers([10.0], 5, 10 ** 6, max_magnitude=10 ** 6)


def test_textbook_instance():
    sol = solve_knapsack(KnapsackSubproblem(profits=(60, 100, 120),
                                            weights=(10, 20, 30), capacity=50))
    assert sol.value == 220
    assert sol.selected == (0, 1, 1)
    assert sol.feasible


def test_empty_instance():
    sol = solve_knapsack(KnapsackSubproblem(profits=(), weights=(), capacity=5))
    assert sol.value == 0
    assert sol.selected == ()


def test_single_oversized_item():
    sol = solve_knapsack(KnapsackSubproblem(profits=(5,), weights=(10,), capacity=9))
    assert sol.value == 0
    assert sol.selected == (0,)


def test_negative_capacity_is_distinguished_not_fatal():
    sol = solve_knapsack(KnapsackSubproblem(profits=(5,), weights=(1,), capacity=-1))
    assert not sol.feasible
    assert sol.value == 0
    assert sol.selected == (0,)


def test_zero_weight_items_always_taken_zero_profit_never():
    sol = solve_knapsack(KnapsackSubproblem(profits=(7, 0, 3),
                                            weights=(0, 0, 5), capacity=4))
    assert sol.selected == (1, 0, 0)
    assert sol.value == 7


def test_invariants_rejected():
    with pytest.raises(ValueError):
        KnapsackSubproblem(profits=(1, 2), weights=(1,), capacity=3)
    with pytest.raises(ValueError):
        KnapsackSubproblem(profits=(1,), weights=(-1,), capacity=3)


def _random_problem(rng, n, profit_hi=100, weight_hi=60):
    profits = tuple(rng.randint(0, profit_hi) for _ in range(n))
    weights = tuple(rng.randint(0, weight_hi) for _ in range(n))
    capacity = rng.randint(0, max(1, sum(weights) // 2))
    return KnapsackSubproblem(profits=profits, weights=weights, capacity=capacity)


def test_matches_enumeration_including_lexicographic_ties():
    rng = random.Random(7)
    for trial in range(150):
        n = rng.randint(1, 12)
        # small profit alphabet on odd trials forces plenty of ties
        prob = _random_problem(rng, n, profit_hi=5 if trial % 2 else 100)
        value, bits = enumerate_knapsack(prob.profits, prob.weights, prob.capacity)
        sol = solve_knapsack(prob)
        assert sol.value == value
        assert sol.selected == bits
        assert solve_knapsack_value(prob) == value


def test_optimal_value_invariant_under_permutation():
    rng = random.Random(11)
    for _ in range(30):
        n = rng.randint(2, 14)
        prob = _random_problem(rng, n)
        perm = list(range(n))
        rng.shuffle(perm)
        shuffled = KnapsackSubproblem(
            profits=tuple(prob.profits[j] for j in perm),
            weights=tuple(prob.weights[j] for j in perm),
            capacity=prob.capacity)
        assert solve_knapsack(prob).value == solve_knapsack(shuffled).value


def test_dantzig_bound_dominates_optimum():
    rng = random.Random(13)
    for _ in range(60):
        prob = _random_problem(rng, rng.randint(1, 14))
        assert dantzig_bound(prob.profits, prob.weights, prob.capacity) \
            >= solve_knapsack(prob).value


def test_branch_and_bound_path_agrees_with_dp():
    rng = random.Random(17)
    for trial in range(60):
        prob = _random_problem(rng, rng.randint(1, 11),
                               profit_hi=6 if trial % 2 else 80)
        dp = solve_knapsack(prob)
        bb = solve_knapsack(prob, state_cap=1)  # force the fallback
        assert bb.value == dp.value
        assert bb.selected == dp.selected


def test_checkpointed_reconstruction_agrees_with_full_table():
    rng = random.Random(19)
    for _ in range(40):
        prob = _random_problem(rng, rng.randint(2, 12))
        full = solve_knapsack(prob)
        chunked = solve_knapsack(prob, lex_cells=8)  # force checkpointing
        assert chunked.value == full.value
        assert chunked.selected == full.selected


def test_big_integer_weights_fall_back_exactly():
    shift = 1 << 70
    prob = KnapsackSubproblem(profits=(6, 10, 12),
                              weights=(1 * shift, 2 * shift, 3 * shift),
                              capacity=5 * shift)
    sol = solve_knapsack(prob)
    assert sol.value == 22
    assert sol.selected == (0, 1, 1)
