import math

import pytest
from hypothesis import given, settings, strategies as st

from msts.exact import brute_force_msts
from msts.geometry import Point, Segment, euclidean_mst
from msts.instance import Instance, random_instance
from msts.separability import (POLICIES, guarantee_for, separability_of,
                               solve_pick_endpoint)


def inst_of(*coords):
    return Instance(tuple(Segment(Point(a, b), Point(c, d)) for a, b, c, d in coords))


def test_separability_examples():
    rep = separability_of(inst_of((0, 0, 1, 0), (4, 0, 5, 0)))
    assert rep.k == 3.0 and rep.witness == (0, 1)
    rep = separability_of(inst_of((0, 0, 0, 0), (1, 1, 1, 1), (5, 0, 5, 0)))
    assert math.isinf(rep.k) and rep.witness is None
    assert separability_of(random_instance(20, 9, 2.0, 1.0)).k >= 2.0
    assert guarantee_for(math.inf) == 1.0 and guarantee_for(2.0) == 2.0


@pytest.mark.parametrize("policy", POLICIES)
def test_pick_examples(policy):
    assert solve_pick_endpoint(inst_of((0, 0, 1, 0)), policy).cost == 0.0
    pts = inst_of((0, 0, 0, 0), (1, 1, 1, 1), (5, 0, 5, 0))
    sol = solve_pick_endpoint(pts, policy, seed=3)
    assert sol.cost == euclidean_mst([(0, 0), (1, 1), (5, 0)]).cost
    assert sol.guarantee == 1.0


def test_pick_rejects_unknown_policy():
    with pytest.raises(ValueError):
        solve_pick_endpoint(inst_of((0, 0, 1, 0)), "nearest")


def test_seeded_random_is_deterministic():
    inst = random_instance(12, 4)
    a = solve_pick_endpoint(inst, "seeded-random", 11)
    b = solve_pick_endpoint(inst, "seeded-random", 11)
    assert a.choices == b.choices


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.integers(0, 10**9), st.floats(1.0, 3.0), st.sampled_from(POLICIES))
def test_pick_within_separability_bound(n, seed, sep, policy):
    inst = random_instance(n, seed, sep, 1.0)
    k = separability_of(inst).k
    sol = solve_pick_endpoint(inst, policy, seed)
    sol.check(inst)
    opt = brute_force_msts(inst).cost
    assert sol.cost <= (1 + 2 / k) * opt + 1e-9 * max(1.0, opt)


@pytest.mark.parametrize("k", [1.0, 2.5, 10.0])
def test_one_over_k_bound_is_not_valid(k):
    # collinear unit segments a gap k apart: far ends cost k + 2 = (1 + 2/k) * opt
    inst = inst_of((0, 0, 1, 0), (2 + k, 0, 1 + k, 0))
    assert separability_of(inst).k == k
    opt = brute_force_msts(inst).cost
    far = solve_pick_endpoint(inst, "always-a")
    assert opt == k and far.cost == k + 2
    assert far.cost > (1 + 1 / k) * opt
    assert far.cost == pytest.approx((1 + 2 / k) * opt)
