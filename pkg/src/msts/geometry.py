"""Planar geometry kernel: points, segments, distances and Euclidean MSTs.

Everything here is plain 64-bit floating point.  Equality tests use an
absolute tolerance of 1e-12 and cost comparisons a relative tolerance of
1e-9 (see ``ABS_TOL`` / ``REL_TOL``).
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

ABS_TOL = 1e-12
REL_TOL = 1e-9


class Point(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    """Closed segment between two endpoints.  a == b is allowed."""
    a: Point
    b: Point

    def endpoint(self, side):
        return self.b if side else self.a

    def length(self):
        return point_distance(self.a, self.b)

    # accessors for axis-parallel segments
    def left(self):
        return min(self.a, self.b)

    def right(self):
        return max(self.a, self.b)

    def top(self):
        return self.a if self.a.y >= self.b.y else self.b

    def bottom(self):
        return self.b if self.a.y >= self.b.y else self.a


@dataclass(frozen=True)
class PointTree:
    nodes: tuple
    edges: tuple
    cost: float

    def check(self):
        """Raise ValueError unless this is a spanning tree with a consistent cost."""
        n = len(self.nodes)
        if n == 0:
            raise ValueError("empty tree")
        if len(self.edges) != n - 1:
            raise ValueError("tree has %d edges for %d nodes" % (len(self.edges), n))
        if not is_spanning_tree(n, self.edges):
            raise ValueError("edges do not form a spanning tree")
        c = tree_cost(self.nodes, self.edges)
        if not costs_close(c, self.cost):
            raise ValueError("cost %r disagrees with edge lengths %r" % (self.cost, c))


def as_point(p):
    return p if isinstance(p, Point) else Point(float(p[0]), float(p[1]))


def costs_close(c1, c2, rel=REL_TOL):
    return abs(c1 - c2) <= rel * max(1.0, abs(c1), abs(c2))


def point_distance(p, q):
    return math.hypot(p[0] - q[0], p[1] - q[1])


def _point_segment_distance(p, a, b):
    dx, dy = b[0] - a[0], b[1] - a[1]
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return point_distance(p, a)
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))


def _orient(p, q, r):
    v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    if abs(v) <= ABS_TOL:
        return 0
    return 1 if v > 0 else -1


def _on_segment(p, q, r):
    # q collinear with p,r: is it inside their bounding box?
    return (min(p[0], r[0]) - ABS_TOL <= q[0] <= max(p[0], r[0]) + ABS_TOL and
            min(p[1], r[1]) - ABS_TOL <= q[1] <= max(p[1], r[1]) + ABS_TOL)


def segments_intersect(s, t):
    p1, q1 = s
    p2, q2 = t
    o1, o2 = _orient(p1, q1, p2), _orient(p1, q1, q2)
    o3, o4 = _orient(p2, q2, p1), _orient(p2, q2, q1)
    if o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4):
        return True
    if o1 == 0 and _on_segment(p1, p2, q1):
        return True
    if o2 == 0 and _on_segment(p1, q2, q1):
        return True
    if o3 == 0 and _on_segment(p2, p1, q2):
        return True
    if o4 == 0 and _on_segment(p2, q1, q2):
        return True
    return False


def segment_distance(s, t):
    """Minimum distance between any point of s and any point of t."""
    if segments_intersect(s, t):
        return 0.0
    return min(_point_segment_distance(s[0], t[0], t[1]),
               _point_segment_distance(s[1], t[0], t[1]),
               _point_segment_distance(t[0], s[0], s[1]),
               _point_segment_distance(t[1], s[0], s[1]))


def segments_disjoint(s, t):
    return segment_distance(s, t) > 0.0


def distance_matrix(points):
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    d = P[:, None, :] - P[None, :, :]
    return np.hypot(d[..., 0], d[..., 1])


def prim_edges(W):
    """Dense Prim on a symmetric weight matrix (np.inf = no edge).

    Among equal-weight candidates the edge with the lexicographically
    smallest (min index, max index) pair wins, so the result is the unique
    MST under the total order (weight, min index, max index).  Returns a
    list of (i, j) pairs with i < j, or None when the graph is disconnected.
    """
    W = np.asarray(W, dtype=float)
    n = len(W)
    if n == 0:
        return []
    intree = np.zeros(n, dtype=bool)
    intree[0] = True
    key = W[0].copy()
    lo = np.zeros(n, dtype=np.int64)           # min index of candidate edge
    hi = np.arange(n, dtype=np.int64)          # max index of candidate edge
    par = np.zeros(n, dtype=np.int64)
    key[0] = np.inf
    edges = []
    idx = np.arange(n)
    for _ in range(n - 1):
        masked = np.where(intree, np.inf, key)
        w = masked.min()
        if not np.isfinite(w):
            return None
        cand = np.flatnonzero(masked == w)
        if len(cand) > 1:
            cand = cand[np.lexsort((hi[cand], lo[cand]))]
        v = int(cand[0])
        u = int(par[v])
        edges.append((min(u, v), max(u, v)))
        intree[v] = True
        d = W[v]
        mn, mx = np.minimum(idx, v), np.maximum(idx, v)
        better = (d < key) | ((d == key) & ((mn < lo) | ((mn == lo) & (mx < hi))))
        better &= ~intree
        key = np.where(better, d, key)
        lo = np.where(better, mn, lo)
        hi = np.where(better, mx, hi)
        par = np.where(better, v, par)
    return edges


def mst_cost(W):
    """Cost-only dense Prim; np.inf when disconnected."""
    W = np.asarray(W, dtype=float)
    n = len(W)
    if n <= 1:
        return 0.0
    # pen[v] = inf once v is in the tree; max() with it keeps v out of the argmin
    key = W[0].copy()
    pen = np.zeros(n)
    pen[0] = np.inf
    np.maximum(key, pen, out=key)
    total = 0.0
    for _ in range(n - 1):
        v = key.argmin()
        total += key[v]
        pen[v] = np.inf
        np.minimum(key, W[v], out=key)
        np.maximum(key, pen, out=key)
    return float(total)


def tree_cost(points, edges):
    return math.fsum(point_distance(points[i], points[j]) for i, j in edges)


def is_spanning_tree(n, edges):
    if len(edges) != n - 1:
        return False
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        if not (0 <= i < n and 0 <= j < n):
            return False
        ri, rj = find(i), find(j)
        if ri == rj:
            return False
        parent[ri] = rj
    return True


def euclidean_mst(points: Sequence) -> PointTree:
    """Euclidean MST by dense Prim, O(n^2), deterministic tie-breaking."""
    pts = tuple(as_point(p) for p in points)
    if not pts:
        raise ValueError("empty point set")
    edges = prim_edges(distance_matrix(pts))
    return PointTree(pts, tuple(edges), tree_cost(pts, edges))
