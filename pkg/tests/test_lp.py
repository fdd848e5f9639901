import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from conftest import random_b_instance, random_list_instance
from maxqap.instances import BInstance, ListInstance, WeightedGraph
from maxqap.lp import (
    FractionalSolution,
    build_lp1,
    build_lp2,
    check_feasible,
    dump_lp,
    solve,
)


def dense_lp_value(g, h, allowed, b):
    """Optimum of the relaxation written over the full x[u,p], y[u,p,v,q] grid.

    Symmetry is imposed by equality rows and inadmissible pairs by zero
    bounds, so this shares no modelling code with the package.
    """
    n = g.n
    nx, ny = n * n, n ** 4

    def xi(u, p):
        return u * n + p

    def yi(u, p, v, q):
        return nx + ((u * n + p) * n + v) * n + q

    c = np.zeros(nx + ny)
    for u, p, v, q in itertools.product(range(n), repeat=4):
        c[yi(u, p, v, q)] = -g.w[u, v] * h.w[p, q]
    ub_rows, ub_rhs, eq_rows = [], [], []
    for u in range(n):
        r = np.zeros(nx + ny)
        r[[xi(u, p) for p in range(n)]] = 1
        ub_rows.append(r)
        ub_rhs.append(b)
        r = np.zeros(nx + ny)
        r[[xi(p, u) for p in range(n)]] = 1
        ub_rows.append(r)
        ub_rhs.append(b)
    for a, v, q in itertools.product(range(n), repeat=3):
        r1, r2 = np.zeros(nx + ny), np.zeros(nx + ny)
        for s in range(n):
            if (a, s) != (v, q):
                r1[yi(a, s, v, q)] = 1  # sum over p, u = a fixed
            if (s, a) != (v, q):
                r2[yi(s, a, v, q)] = 1  # sum over u, p = a fixed
        r1[xi(v, q)] -= b
        r2[xi(v, q)] -= b
        ub_rows += [r1, r2]
        ub_rhs += [0, 0]
    for u, p, v, q in itertools.product(range(n), repeat=4):
        if (u, p) < (v, q):
            r = np.zeros(nx + ny)
            r[yi(u, p, v, q)] = 1
            r[yi(v, q, u, p)] = -1
            eq_rows.append(r)
    bounds = [(0, 1 if allowed[u, p] else 0) for u in range(n) for p in range(n)]
    bounds += [(0, 1 if allowed[u, p] and allowed[v, q] else 0)
               for u, p, v, q in itertools.product(range(n), repeat=4)]
    res = linprog(c, A_ub=np.array(ub_rows), b_ub=ub_rhs, A_eq=np.array(eq_rows) if eq_rows else None,
                  b_eq=np.zeros(len(eq_rows)) if eq_rows else None, bounds=bounds, method="highs")
    assert res.status == 0
    return -res.fun


@pytest.fixture
def lp1_two(two_node):
    return build_lp1(ListInstance.full(*two_node))


def test_two_node_lp1_value(lp1_two):
    sol = solve(lp1_two)
    assert sol.objective_value == pytest.approx(30, abs=1e-6)
    assert check_feasible(lp1_two, sol) == []


def test_two_node_lp2_value(two_node):
    model = build_lp2(BInstance(*two_node, 2))
    sol = solve(model)
    assert sol.objective_value == pytest.approx(60, abs=1e-6)
    assert check_feasible(model, sol) == []
    assert all(r == 2 for r, name in zip(model.rhs, model.row_names) if name.startswith("deg"))


def test_two_node_column_counts(lp1_two):
    # 4 x columns; the 4*4 - 4 ordered pairs of distinct edges merge into 6 columns
    assert len(lp1_two.x_columns()) == 4
    assert len(lp1_two.y_columns()) == 6
    assert sum(name.startswith("deg") for name in lp1_two.row_names) == 4


def test_eliminated_columns(two_node):
    inst = ListInstance(*two_node, ({0}, {0, 1}))
    model = build_lp1(inst)
    assert ("x", 0, 1) not in model.index
    assert not any((0, 1) in (c[1:3], c[3:5]) for c in model.y_columns())


def test_single_node_and_empty_objective():
    inst = ListInstance.full(WeightedGraph([[0]]), WeightedGraph([[0]]))
    model = build_lp1(inst)
    assert model.columns == [("x", 0, 0)]
    assert solve(model).objective_value == 0


def test_lists_forcing_zero_value(two_node):
    # both nodes may only use image 0, so no two edges can coexist in a matching-like pair
    inst = ListInstance(*two_node, ({0}, {0}))
    assert solve(build_lp1(inst)).objective_value == pytest.approx(dense_lp_value(
        inst.g, inst.h, inst.allowed(), 1), abs=1e-9)


def test_lp2_with_b1_equals_lp1(two_node):
    rng = np.random.default_rng(3)
    inst = random_b_instance(4, 1, rng)
    m2 = build_lp2(inst)
    m1 = build_lp1(ListInstance.full(inst.g, inst.h))
    assert m1.columns == m2.columns
    assert (m1.A != m2.A).nnz == 0
    assert np.array_equal(m1.objective, m2.objective) and np.array_equal(m1.rhs, m2.rhs)


@settings(max_examples=25)
@given(st.integers(1, 3), st.integers(0, 1), st.integers(0, 10**6))
def test_lp1_matches_dense_formulation(n, k, seed):
    inst = random_list_instance(n, min(k, n - 1), np.random.default_rng(seed))
    model = build_lp1(inst)
    sol = solve(model)
    assert check_feasible(model, sol) == []
    assert sol.objective_value == pytest.approx(dense_lp_value(inst.g, inst.h, inst.allowed(), 1), abs=1e-6)


@settings(max_examples=15)
@given(st.integers(2, 3), st.integers(1, 3), st.integers(0, 10**6))
def test_lp2_matches_dense_formulation(n, b, seed):
    inst = random_b_instance(n, min(b, n), np.random.default_rng(seed))
    sol = solve(build_lp2(inst))
    expected = dense_lp_value(inst.g, inst.h, np.ones((n, n), dtype=bool), inst.b)
    assert sol.objective_value == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("n", [4, 5])
def test_simplex_agrees_with_highs(n):
    inst = random_list_instance(n, 1, np.random.default_rng(n))
    model = build_lp1(inst)
    ours, ref = solve(model), solve(model, backend="highs")
    assert ours.objective_value == pytest.approx(ref.objective_value, abs=1e-6)
    assert check_feasible(model, ours) == []


def test_y_tensor_symmetric():
    inst = random_list_instance(4, 0, np.random.default_rng(11))
    sol = solve(build_lp1(inst))
    Y = sol.Y
    assert np.array_equal(Y, Y.transpose(2, 3, 0, 1))
    (u, p, v, q), val = next(iter(sol.y.items()))
    assert sol.y_value(v, q, u, p) == val
    with pytest.raises(ValueError):
        Y[0, 0, 0, 0] = 1.0


def test_check_feasible_reports_bound_violation(lp1_two):
    sol = solve(lp1_two)
    x = sol.x.copy()
    x[0, 0] = 2.0
    bad = FractionalSolution(2, x, dict(sol.y), sol.objective_value)
    names = [v.row for v in check_feasible(lp1_two, bad)]
    assert "ub_x_0_0" in names and "deg_g_0" in names


def test_check_feasible_reports_coupling_violation(lp1_two):
    x = np.zeros((2, 2))
    bad = FractionalSolution(2, x, {(0, 0, 1, 1): 1.0}, 0.0)
    rows = [v.row for v in check_feasible(lp1_two, bad)]
    assert any(r.startswith("sum_") for r in rows)


def test_check_feasible_reports_eliminated(two_node):
    model = build_lp1(ListInstance(*two_node, ({0}, {0, 1})))
    x = np.zeros((2, 2))
    x[0, 1] = 0.5
    rows = [v.row for v in check_feasible(model, FractionalSolution(2, x, {}, 0.0))]
    assert rows == ["eliminated_x_0_1"]
    with pytest.raises(ValueError):
        check_feasible(model, FractionalSolution(3, np.zeros((3, 3)), {}, 0.0))


def test_dump_lp_format(lp1_two):
    text = dump_lp(lp1_two)
    lines = text.splitlines()
    assert lines[0].startswith("max: +30*y_0_0_1_1")
    assert "deg_g_0: +1*x_0_0 +1*x_0_1 <= 1" in lines
    assert sum(line.startswith("bound:") for line in lines) == lp1_two.num_vars
    assert len(lines) == 1 + lp1_two.num_rows + lp1_two.num_vars


def test_unknown_backend(lp1_two):
    with pytest.raises(ValueError):
        solve(lp1_two, backend="cplex")
