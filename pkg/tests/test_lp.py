import itertools

import numpy as np
import pytest

from tempsec.lp import (
    PackingLP,
    SolverError,
    density_order,
    earlier_better_totals,
    enumerate_vertices,
    fractional_knapsack,
    greedy_round_up,
    randomized_round,
    solve_packing_lp,
)


def random_lp(rng, kmax=6, mmax=4):
    k = int(rng.integers(1, kmax + 1))
    m = int(rng.integers(1, mmax + 1))
    A = rng.random((m, k))
    A[rng.random((m, k)) < 0.3] = 0.0
    b = rng.random(m) * k * 0.5
    v = rng.random(k)
    if rng.random() < 0.3:
        # integer data produces many degenerate vertices
        A, b, v = np.round(A * 3), np.round(b * 3), np.round(v * 3)
    return PackingLP(v, A, b)


class TestSimplex:
    def test_dominant_item(self):
        sol = solve_packing_lp(PackingLP([3, 2], [[1, 1]], [1]))
        np.testing.assert_allclose(sol.x, [1, 0])
        assert sol.value == pytest.approx(3)

    def test_fractional_second(self):
        sol = solve_packing_lp(PackingLP([3, 2], [[1, 1]], [1.5]))
        np.testing.assert_allclose(sol.x, [1, 0.5])
        assert sol.value == pytest.approx(4)
        assert enumerate_vertices(PackingLP([3, 2], [[1, 1]], [1.5])).value == pytest.approx(4)

    def test_zero_capacity(self):
        rng = np.random.default_rng(0)
        lp = PackingLP(rng.random(5), rng.random((3, 5)) + 0.1, np.zeros(3))
        sol = solve_packing_lp(lp)
        np.testing.assert_array_equal(sol.x, np.zeros(5))
        assert sol.value == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            PackingLP([1, 2], [[1, 1, 1]], [1])

    def test_negative_data(self):
        with pytest.raises(ValueError):
            PackingLP([1, 2], [[1, -1]], [1])

    def test_matches_vertices_and_feasible(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            lp = random_lp(rng)
            sol = solve_packing_lp(lp)
            ref = enumerate_vertices(lp)
            assert abs(sol.value - ref.value) <= 1e-8
            assert np.all(lp.A @ sol.x <= lp.b + 1e-9)
            assert np.all((sol.x >= 0) & (sol.x <= 1))
            assert sol.value == pytest.approx(float(lp.v @ sol.x), abs=1e-9)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        lp = random_lp(rng, 12, 5)
        a, b = solve_packing_lp(lp), solve_packing_lp(lp)
        np.testing.assert_array_equal(a.x, b.x)

    def test_single_row_structure_is_knapsack(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            k = int(rng.integers(2, 30))
            v, w = rng.random(k), rng.uniform(0.5, 1.0, k)
            budget = float(rng.uniform(0, w.sum()))
            sol = solve_packing_lp(PackingLP(v, w[None, :], [budget]))
            ref = fractional_knapsack(v, w, budget)
            assert sol.value == pytest.approx(ref.value, abs=1e-9)

    def test_larger_lp_against_knapsack_and_iteration_limit(self):
        rng = np.random.default_rng(5)
        v, w = rng.random(400), rng.uniform(0.5, 1.0, 400)
        lp = PackingLP(v, w[None, :], [50.0])
        assert solve_packing_lp(lp).value == pytest.approx(fractional_knapsack(v, w, 50).value)
        with pytest.raises(SolverError):
            solve_packing_lp(PackingLP(rng.random(30), rng.random((4, 30)), [2, 2, 2, 2]),
                             max_iter=1)


class TestKnapsack:
    def test_unit_weights(self):
        sol = fractional_knapsack([10, 6], [1, 1], 1)
        np.testing.assert_allclose(sol.x, [1, 0])
        assert sol.prefix == (0,)

    def test_density_example(self):
        sol = fractional_knapsack([10, 6], [2, 1], 2)
        np.testing.assert_allclose(sol.x, [0.5, 1])
        assert sol.value == pytest.approx(11)
        assert sol.prefix == (1,)

    def test_large_budget(self):
        sol = fractional_knapsack([1, 2, 3], [1, 1, 1], 10)
        np.testing.assert_array_equal(sol.x, [1, 1, 1])

    def test_prefix_rounding_loss(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            k = int(rng.integers(1, 40))
            v, w = rng.random(k), rng.uniform(0.01, 1.0, k)
            budget = float(rng.uniform(w.max(), w.sum() + 1))
            sol = fractional_knapsack(v, w, budget)
            prefix_value = v[list(sol.prefix)].sum()
            assert prefix_value >= (1 - w.max() / budget) * sol.value - 1e-12

    def test_density_ties_by_index(self):
        assert density_order([2, 1, 2], [1, 0.5, 1]).tolist() == [0, 1, 2]


class TestGreedyRoundUp:
    def test_zero_budget(self):
        assert greedy_round_up([1, 2], [0.1, 0.1], 0).size == 0

    def test_hand_example(self):
        out = greedy_round_up([4, 3, 1], [0.1, 0.1, 0.1], 0.15)
        assert out.tolist() == [0, 1]

    def test_budget_above_total(self):
        assert sorted(greedy_round_up([4, 3, 1], [0.1, 0.1, 0.1], 5).tolist()) == [0, 1, 2]

    def test_nonpositive_duration(self):
        with pytest.raises(ValueError):
            greedy_round_up([1, 2], [0.1, 0.0], 0.1)

    def test_round_up_dominates_fractional(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            k = int(rng.integers(1, 30))
            v, d = rng.random(k), rng.uniform(0.01, 0.1, k)
            lam = float(rng.uniform(0, d.sum() * 1.2))
            picked = greedy_round_up(v, d, lam)
            assert v[picked].sum() >= fractional_knapsack(v, d, lam).value - 1e-12

    def test_minimal_prefix(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            k = int(rng.integers(1, 20))
            v, d = rng.random(k), rng.uniform(0.01, 0.1, k)
            lam = float(rng.uniform(0, d.sum()))
            picked = greedy_round_up(v, d, lam)
            assert d[picked].sum() >= lam
            if picked.size:
                assert d[picked[:-1]].sum() < lam


class TestRounding:
    def test_extremes(self):
        rng = np.random.default_rng(0)
        assert all(randomized_round(0.0, rng) == 0 for _ in range(100))
        assert all(randomized_round(1.0, rng) == 1 for _ in range(100))

    def test_mean(self):
        rng = np.random.default_rng(1)
        draws = [randomized_round(0.3, rng) for _ in range(100_000)]
        assert np.mean(draws) == pytest.approx(0.3, abs=0.01)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            randomized_round(1.1, np.random.default_rng(0))


def brute_earlier_better(priority, weights):
    n = len(priority)
    return np.array([sum(weights[j] for j in range(i) if priority[j] < priority[i])
                     for i in range(n)])


class TestEarlierBetter:
    def test_small_exhaustive(self):
        for perm in itertools.permutations(range(5)):
            np.testing.assert_array_equal(earlier_better_totals(perm),
                                          brute_earlier_better(perm, [1] * 5))

    def test_weighted_random(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            n = int(rng.integers(1, 60))
            perm = rng.permutation(n)
            w = rng.random(n)
            np.testing.assert_allclose(earlier_better_totals(perm, w),
                                       brute_earlier_better(perm, w))

    def test_top_k_matches_knapsack_prefix(self):
        # membership in the top-k of arrived items, through the knapsack kernel
        rng = np.random.default_rng(3)
        values = rng.random(40)
        rank = np.empty(40, dtype=int)
        rank[np.lexsort((np.arange(40), -values))] = np.arange(40)
        arrival = rng.permutation(40)
        seen = earlier_better_totals(rank[arrival])
        for p in range(40):
            for k in (0, 1, 3, 10):
                pool = arrival[: p + 1]
                prefix = fractional_knapsack(values[pool], np.ones(p + 1), k).prefix
                in_top = (p in prefix) if k else False
                assert in_top == (seen[p] < k)
