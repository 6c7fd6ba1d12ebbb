"""Separability of an instance and the pick-any-endpoint heuristic.

An instance is k-separable when every pair of segments is at least
k * l_max apart (l_max = longest segment).  Then any choice of endpoints
gives an MST within a factor (1 + 2/k) of optimal: each tree edge moves by
at most one segment length at each end, and every optimal edge is at least
k * l_max long.  The tighter (1 + 1/k) does not hold; two collinear unit
segments a gap k apart, picked at their far ends, cost exactly (1 + 2/k) * opt.
"""

import math
from dataclasses import dataclass
from typing import Optional

from .geometry import euclidean_mst, segment_distance
from .instance import ChoiceSolution, chosen_points, make_rng

POLICIES = ("always-a", "always-b", "seeded-random")


@dataclass(frozen=True)
class SeparabilityReport:
    k: float
    max_length: float
    min_pair_distance: float
    witness: Optional[tuple]


def separability_of(inst):
    lmax = max(s.length() for s in inst.segments)
    best, wit = math.inf, None
    n = inst.n
    for i in range(n):
        for j in range(i + 1, n):
            d = segment_distance(inst.segments[i], inst.segments[j])
            if d < best:
                best, wit = d, (i, j)
    if lmax == 0.0 or wit is None:
        return SeparabilityReport(math.inf, lmax, best, None)
    return SeparabilityReport(best / lmax, lmax, best, wit)


def guarantee_for(k):
    """Provable factor for any endpoint choice on a k-separable instance."""
    return 1.0 if math.isinf(k) else 1.0 + 2.0 / k


def solve_pick_endpoint(inst, policy="always-a", seed=0):
    if policy == "always-a":
        choices = (0,) * inst.n
    elif policy == "always-b":
        choices = (1,) * inst.n
    elif policy == "seeded-random":
        rng = make_rng(seed)
        choices = tuple(int(c) for c in rng.integers(0, 2, size=inst.n))
    else:
        raise ValueError("unknown policy %r" % policy)
    rep = separability_of(inst)
    tree = euclidean_mst(chosen_points(inst, choices))
    return ChoiceSolution(choices, tree, tree.cost, guarantee_for(rep.k))
