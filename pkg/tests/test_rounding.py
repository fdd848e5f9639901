from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_b_instance, random_graph, random_list_instance, three_sigma
from maxqap.instances import ListInstance, WeightedGraph, is_bmatching, is_compatible, is_matching
from maxqap.lp import build_lp1, solve
from maxqap.rounding import (
    Partition,
    algorithm1,
    algorithm2,
    algorithm_b,
    algorithm_c,
    check_star_inputs,
    complete_to_perfect,
    compute_l,
    heavy_set,
    heavy_size_b,
    heavy_size_list,
    partition,
    resolve_to_matching,
    sample_assignment,
    star_sets,
    z_matrix,
)

TWO = Partition((0,), (1,), (0,), (1,))


def rng(seed=0):
    return np.random.default_rng(seed)


def lp1_point(n, seed, k=0):
    inst = random_list_instance(n, k, rng(seed))
    sol = solve(build_lp1(inst))
    return inst, sol


# --- partition and left-block sampling -----------------------------------------


def test_partition_sizes():
    p = partition(1, rng())
    assert p.g_left == (0,) and p.g_right == () and p.n == 1
    for s in range(20):
        p = partition(3, rng(s))
        assert len(p.g_left) == 2 and len(p.g_right) == 1
        assert sorted(p.g_left + p.g_right) == [0, 1, 2] == sorted(p.h_left + p.h_right)
    with pytest.raises(ValueError):
        partition(0, rng())


def test_partition_marginal():
    r, trials = rng(1), 20000
    hits = sum(0 in partition(2, r).g_left for _ in range(trials))
    assert abs(hits / trials - 0.5) <= three_sigma(0.5, trials)


def test_sample_assignment_deterministic_cases():
    part = Partition((0, 1), (2,), (0, 1), (2,))
    x = np.zeros((3, 3))
    assert sample_assignment(x, part, 1.0, rng()) == {0: None, 1: None}
    x[1, 0] = 1.0
    assert all(sample_assignment(x, part, 1.0, rng(s))[0] == 1 for s in range(50))


def test_sample_assignment_law():
    part = Partition((0, 1), (2,), (0,), (1, 2))
    x = np.zeros((3, 3))
    x[0, 0] = x[1, 0] = 0.5
    r, trials = rng(2), 20000
    counts = Counter(sample_assignment(x, part, 1.0, r)[0] for _ in range(trials))
    assert counts[None] == 0
    assert abs(counts[0] / trials - 0.5) <= three_sigma(0.5, trials)
    # scaled: each with 1/4, unmatched with 1/2
    counts = Counter(sample_assignment(x, part, 0.5, r)[0] for _ in range(trials))
    assert abs(counts[None] / trials - 0.5) <= three_sigma(0.5, trials)
    assert abs(counts[1] / trials - 0.25) <= three_sigma(0.25, trials)


def test_sample_assignment_ignores_right_block_mass():
    part = Partition((0,), (1,), (0,), (1,))
    x = np.array([[0.25, 0], [0.75, 0]])
    r, trials = rng(3), 20000
    hits = sum(sample_assignment(x, part, 1.0, r)[0] == 0 for _ in range(trials))
    assert abs(hits / trials - 0.25) <= three_sigma(0.25, trials)


def test_sample_assignment_rejects_excess_mass():
    part = Partition((0, 1), (), (0,), ())
    with pytest.raises(ValueError, match="exceeds 1"):
        sample_assignment(np.array([[0.7, 0], [0.7, 0]]), part, 1.0, rng())


def test_resolve_to_matching():
    assert resolve_to_matching({0: 1, 1: 0}, rng()) == {(1, 0), (0, 1)}
    assert resolve_to_matching({0: None, 1: None}, rng()) == frozenset()
    r, trials = rng(4), 20000
    hits = sum((5, 0) in resolve_to_matching({0: 5, 1: 5}, r) for _ in range(trials))
    assert abs(hits / trials - 0.5) <= three_sigma(0.5, trials)


def test_complete_to_perfect():
    part = Partition((0, 1), (2,), (3, 4), (5,))
    m = frozenset({(0, 4), (1, 3)})
    assert complete_to_perfect(m, part, rng()) == m
    assert complete_to_perfect(frozenset(), Partition((2,), (), (0,), ()), rng()) == {(2, 0)}
    r, trials = rng(5), 20000
    hits = sum((0, 3) in complete_to_perfect(frozenset(), part, r) for _ in range(trials))
    assert abs(hits / trials - 0.5) <= three_sigma(0.5, trials)
    assert complete_to_perfect(frozenset({(0, 3)}), part, r) == {(0, 3), (1, 4)}
    with pytest.raises(ValueError):
        complete_to_perfect(frozenset({(2, 3)}), part, r)
    with pytest.raises(ValueError):
        complete_to_perfect(frozenset(), Partition((0, 1), (), (0,), (1,)), r)


# --- heavy sets -----------------------------------------------------------------


def test_heavy_set_examples():
    h = WeightedGraph([[0, 9, 5, 1], [9, 0, 0, 0], [5, 0, 0, 0], [1, 0, 0, 0]])
    assert heavy_set(h, 0, 2) == {1, 2}
    assert heavy_set(WeightedGraph(np.ones((4, 4)) - np.eye(4)), 3, 2) == {0, 1}
    assert heavy_set(h, 1, 4) == {0, 1, 2, 3}
    with pytest.raises(ValueError):
        heavy_set(h, 0, 0)
    with pytest.raises(ValueError):
        heavy_set(h, 0, 5)


@given(st.integers(1, 8), st.integers(0, 10**6), st.data())
def test_heavy_set_dominates_complement(n, seed, data):
    h = random_graph(n, rng(seed), hi=3)
    p = data.draw(st.integers(0, n - 1))
    size = data.draw(st.integers(1, n))
    s = heavy_set(h, p, size)
    rest = set(range(n)) - s
    assert len(s) == size
    if rest:
        assert min(h.w[p, q] for q in s) >= max(h.w[p, q] for q in rest)


def test_heavy_sizes_clamped():
    assert heavy_size_list(9, 1) == 4
    assert heavy_size_list(4, 3) == 4
    assert heavy_size_b(8, 2) == 2
    assert heavy_size_b(1, 1) == 1


# --- algorithms 1 and 2 -----------------------------------------------------------


def test_algorithm1_single_node():
    inst = ListInstance.full(WeightedGraph([[0]]), WeightedGraph([[0]]))
    assert algorithm1(inst, rng()) in (frozenset(), frozenset({(0, 0)}))


def test_algorithm1_diagonal_lists():
    inst = random_list_instance(5, 0, rng(6))
    inst = ListInstance(inst.g, inst.h, tuple(frozenset({u}) for u in range(5)))
    sol = solve(build_lp1(inst))
    for s in range(30):
        assert all(u == p for u, p in algorithm1(inst, rng(s), sol))


@settings(max_examples=30)
@given(st.integers(2, 6), st.integers(0, 2), st.integers(0, 10**6))
def test_algorithm1_returns_compatible_matching(n, k, seed):
    inst = random_list_instance(n, min(k, n - 1), rng(seed))
    sol = solve(build_lp1(inst))
    for s in range(5):
        m = algorithm1(inst, rng(seed + s), sol)
        assert is_matching(m) and is_compatible(m, inst)


def test_algorithm1_reproducible():
    inst, sol = lp1_point(5, 7)
    assert algorithm1(inst, rng(3), sol) == algorithm1(inst, rng(3))


@settings(max_examples=20)
@given(st.integers(2, 5), st.integers(1, 3), st.integers(0, 10**6))
def test_algorithm2_returns_bmatching(n, b, seed):
    inst = random_b_instance(n, min(b, n), rng(seed))
    for s in range(5):
        assert is_bmatching(algorithm2(inst, rng(s)), inst.b)


def test_algorithm2_left_block_degree_exact():
    inst = random_b_instance(4, 2, rng(8))
    for s in range(20):
        m = algorithm2(inst, rng(s))
        part = partition(4, rng(s))  # first draw of the same stream
        for u in part.g_left:
            assert 1 <= sum(1 for a, p in m if a == u and p in part.h_left) <= 2


# --- star sets and the analysis algorithms -----------------------------------------


def test_compute_l_examples():
    g = random_graph(4, rng(9))
    h = random_graph(4, rng(10))
    assert compute_l(np.zeros((4,) * 4), g, h) == (0, 0, 0, 0)

    g = WeightedGraph(np.ones((4, 4)) - np.eye(4))
    Y = np.zeros((4,) * 4)
    Y[0, 2, 1, 3] = Y[1, 3, 0, 2] = 0.5
    assert compute_l(Y, g, WeightedGraph(np.ones((4, 4)) - np.eye(4)))[3] == 2

    hw = np.zeros((4, 4))
    hw[1, 0] = hw[0, 1] = hw[3, 0] = hw[0, 3] = 1
    Y = np.zeros((4,) * 4)
    for p in (1, 3):
        Y[0, p, 2, 0] = Y[2, 0, 0, p] = 0.5
    assert compute_l(Y, g, WeightedGraph(hw))[0] == 1


@given(st.integers(0, 10**6), st.floats(0.01, 100))
def test_compute_l_scale_invariant(seed, c):
    inst, sol = lp1_point(4, seed % 50)
    scaled = WeightedGraph(inst.g.w * c)
    assert compute_l(sol.Y, scaled, inst.h) == compute_l(sol.Y, inst.g, inst.h)


def test_star_sets_examples():
    part = Partition((0, 1), (2, 3), (0, 1), (2, 3))
    s = star_sets((1, 1, 1, 1), part)
    assert s.sets == {0: (), 1: (2, 3)} and s.owner(3) == 1
    assert star_sets((2, 3, 2, 3), part).sets == {0: (), 1: ()}
    s = star_sets((0, 1, 2, 3), part)
    assert s.sets == {0: (), 1: ()} and s.owner(2) is None


def test_z_matrix_cases():
    x = np.zeros((2, 2))
    x[0, 0] = x[1, 1] = 0.5
    Y = np.zeros((2,) * 4)
    Y[0, 0, 1, 1] = Y[1, 1, 0, 0] = 0.5
    star = star_sets((0, 0), TWO)
    assert z_matrix({0: None}, 0, x, Y, star, TWO).z.tolist() == [[0.0]]
    assert z_matrix({0: 0}, 0, x, Y, star, TWO).z.tolist() == [[1.0]]
    with pytest.raises(ValueError):
        z_matrix({0: 0}, 0, np.zeros((2, 2)), Y, star, TWO)


@pytest.mark.parametrize("seed", range(5))
def test_z_matrix_substochastic_on_lp_points(seed):
    inst, sol = lp1_point(5, seed, k=1)
    x, Y = sol.x, sol.Y
    for s in range(5):
        part = partition(5, rng(s))
        star = star_sets(compute_l(Y, inst.g, inst.h), part)
        for p in part.h_left:
            for u in part.g_left:
                if x[u, p] > 0:
                    assert z_matrix({p: u}, p, x, Y, star, part).is_substochastic(1e-9)


def test_algorithm_b_cases():
    x = np.zeros((2, 2))
    x[0, 0] = 1
    for s in range(20):
        left, rand = algorithm_b(TWO, x, rng(s))
        assert left == {(0, 0)} and rand == {(1, 1)}
    part = Partition((0,), (1, 2), (0,), (1, 2))
    r, trials = rng(11), 20000
    hits = sum((1, 1) in algorithm_b(part, np.zeros((3, 3)), r)[1] for _ in range(trials))
    assert abs(hits / trials - 0.5) <= three_sigma(0.5, trials)


def test_algorithm_c_deterministic_corner():
    x = np.eye(2)
    Y = np.zeros((2,) * 4)
    Y[0, 0, 1, 1] = Y[1, 1, 0, 0] = 1
    star = star_sets((0, 0), TWO)
    for s in range(20):
        assert algorithm_c(TWO, star, x, Y, rng(s)) == ({(0, 0)}, {(1, 1)})


def test_algorithm_c_zero_y():
    x = np.eye(2)
    star = star_sets((0, 0), TWO)
    left, star_m = algorithm_c(TWO, star, x, np.zeros((2,) * 4), rng())
    assert left == {(0, 0)} and star_m == frozenset()


def test_algorithm_c_rejects_bad_inputs():
    x = np.zeros((2, 2))
    x[0, 0] = 1
    Y = np.zeros((2,) * 4)
    Y[0, 0, 1, 1] = Y[1, 1, 0, 0] = 1
    with pytest.raises(ValueError, match="violates"):
        algorithm_c(TWO, star_sets((0, 0), TWO), x, Y, rng())
    with pytest.raises(ValueError, match="substochastic"):
        check_star_inputs(TWO, np.full((2, 2), 2.0), np.zeros((2,) * 4))


@settings(max_examples=15)
@given(st.integers(3, 5), st.integers(0, 10**6))
def test_algorithm_c_star_matching_is_compatible(n, seed):
    inst, sol = lp1_point(n, seed, k=1)
    part = partition(n, rng(seed))
    star = star_sets(compute_l(sol.Y, inst.g, inst.h), part)
    cache = {}
    for s in range(10):
        left, star_m = algorithm_c(part, star, sol.x, sol.Y, rng(s), cache)
        assert is_matching(left) and is_matching(star_m)
        assert is_compatible(left | star_m, inst)
        assert all(v in part.g_right and star.owner(q) is not None for v, q in star_m)
