import itertools
import math
from collections import namedtuple

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from msts.exact import (BnBConfig, BudgetExceeded, GuardError, brute_force_msts,
                        enumerate_msts, exact_steiner, max2sat_brute,
                        min_cluster_tree)
from msts.geometry import Point, Segment, mst_cost
from msts.instance import Instance, random_instance
from msts.reduction import Cnf2Formula

Graph = namedtuple("Graph", "n_nodes edges terminals")


def inst_of(*coords):
    return Instance(tuple(Segment(Point(a, b), Point(c, d)) for a, b, c, d in coords))


def test_brute_force_examples():
    sol = brute_force_msts(inst_of((0, 0, 1, 0)))
    assert sol.cost == 0.0 and sol.choices == (0,)
    sol = brute_force_msts(inst_of((0, 0, 1, 0), (3, 0, 4, 0)))
    assert sol.choices == (1, 0) and sol.cost == 2.0
    inst = random_instance(3, 7)
    a, b = brute_force_msts(inst), enumerate_msts(inst)
    assert a.choices == b.choices and a.cost == b.cost


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.integers(0, 10**9), st.floats(0, 1))
def test_pruned_equals_unpruned(n, seed, sep):
    inst = random_instance(n, seed, sep)
    a = brute_force_msts(inst)
    b = enumerate_msts(inst)
    c = brute_force_msts(inst, BnBConfig(use_lower_bound=False))
    assert a.choices == b.choices == c.choices
    assert a.cost == b.cost
    a.check(inst)


def test_guard_and_budget():
    big = Instance(tuple(Segment(Point(3 * i, 0), Point(3 * i + 1, 0)) for i in range(33)))
    with pytest.raises(GuardError, match="instance too large for exact solver"):
        brute_force_msts(big)
    inst = random_instance(10, 1)
    with pytest.raises(BudgetExceeded, match="budget exceeded") as e:
        brute_force_msts(inst, BnBConfig(node_budget=15))
    assert e.value.best is not None and e.value.best.cost >= brute_force_msts(inst).cost
    with pytest.raises(ValueError):
        BnBConfig(node_budget=-1)


def test_incumbent_does_not_change_the_optimum():
    inst = random_instance(8, 3)
    plain = brute_force_msts(inst)
    seeded = brute_force_msts(inst, BnBConfig(incumbent=(1,) * 8))
    assert math.isclose(seeded.cost, plain.cost, rel_tol=1e-9)


def test_min_cluster_tree_with_singletons_is_mst():
    pts = [(0, 0), (1, 0), (3, 0)]
    pick, cost = min_cluster_tree([[p] for p in pts])
    assert pick == (0, 0, 0) and cost == 3.0
    pick, cost = min_cluster_tree([[(0, 0)], [(5, 5), (1, 0), (1, 0.5)]])
    assert pick == (0, 1) and cost == 1.0


# -- Steiner ----------------------------------------------------------------

def steiner_by_node_subsets(g):
    """Oracle: the optimal tree is the MST of the subgraph induced by some
    superset of the terminals."""
    W = np.full((g.n_nodes, g.n_nodes), np.inf)
    for u, v, w in g.edges:
        W[u, v] = W[v, u] = min(W[u, v], w)
    others = [v for v in range(g.n_nodes) if v not in g.terminals]
    best = math.inf
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            nodes = sorted(set(g.terminals) | set(extra))
            sub = W[np.ix_(nodes, nodes)].copy()
            np.fill_diagonal(sub, np.inf)
            best = min(best, mst_cost(sub))
    return best


def test_steiner_examples():
    # two terminals: shortest path 0-1-2 beats the direct edge
    g = Graph(3, ((0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)), frozenset({0, 2}))
    assert exact_steiner(g).cost == 2.0
    # all terminals: plain MST
    g = Graph(3, ((0, 1, 1.0), (1, 2, 2.0), (0, 2, 2.5)), frozenset({0, 1, 2}))
    assert exact_steiner(g).cost == 3.0
    # star with a non-terminal centre and unit spokes; rim edges cost 2
    edges = [(0, k, 1.0) for k in range(1, 5)] + [(1, 2, 2.0), (2, 3, 2.0), (3, 4, 2.0), (1, 4, 2.0)]
    g = Graph(5, tuple(edges), frozenset({1, 2, 3, 4}))
    res = exact_steiner(g)
    assert res.cost == 4.0 and len(res.edges) == 4 and res.guarantee_factor == 1.0
    assert steiner_by_node_subsets(g) == 4.0


def test_steiner_guards():
    g = Graph(15, tuple((k, k + 1, 1.0) for k in range(14)), frozenset(range(15)))
    with pytest.raises(GuardError, match="too many terminals"):
        exact_steiner(g)
    g = Graph(4, ((0, 1, 1.0), (2, 3, 1.0)), frozenset({0, 3}))
    with pytest.raises(ValueError, match="no Steiner tree"):
        exact_steiner(g)


@st.composite
def small_graphs(draw):
    n = draw(st.integers(2, 8))
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if v == u + 1 or draw(st.booleans()):
                edges.append((u, v, draw(st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0, 3.0]))))
    k = draw(st.integers(1, n))
    terms = frozenset(draw(st.permutations(range(n)))[:k])
    return Graph(n, tuple(edges), terms)


@settings(max_examples=80, deadline=None)
@given(small_graphs())
def test_dreyfus_wagner_matches_subset_oracle(g):
    res = exact_steiner(g)
    assert math.isclose(res.cost, steiner_by_node_subsets(g), abs_tol=1e-12)
    nodes = {v for e in res.edges for v in e}
    assert len(g.terminals) == 1 or set(g.terminals) <= nodes
    assert len(res.edges) == max(0, len(nodes) - 1)


# -- Max-2-SAT --------------------------------------------------------------

def test_max2sat_examples():
    assert max2sat_brute(Cnf2Formula(2, [((1, True), (2, True))])) == ([False, True], 1)
    f = Cnf2Formula(1, [((1, True), (1, True)), ((1, False), (1, False))])
    assert max2sat_brute(f)[1] == 1
    f = Cnf2Formula(3, [((1, False), (2, True)), ((2, True), (3, False))])
    assert max2sat_brute(f) == ([False, False, False], 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.tuples(st.tuples(st.integers(1, n), st.booleans()),
                                   st.tuples(st.integers(1, n), st.booleans())),
                         min_size=1, max_size=6))))
def test_max2sat_matches_itertools(nc):
    n, clauses = nc
    f = Cnf2Formula(n, clauses)
    best = max((f.satisfied(a), tuple(not x for x in a))
               for a in itertools.product((False, True), repeat=n))
    assign, k = max2sat_brute(f)
    assert k == best[0]
    assert tuple(assign) == tuple(not x for x in best[1])


def test_max2sat_guard():
    f = Cnf2Formula(25, [((1, True), (25, True))])
    with pytest.raises(GuardError):
        max2sat_brute(f)
