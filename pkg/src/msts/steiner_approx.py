"""Steiner-tree route to an MSTS approximation.

Segment i becomes three nodes: 3i (endpoint a), 3i+1 (endpoint b) and the
terminal 3i+2, which hangs off both endpoints with zero-weight edges.  A
Steiner tree over the terminals therefore touches at least one endpoint per
segment; the repair pass then removes one endpoint from every segment that
contributes both.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exact import graph_matrix, metric_closure, path_edges, prune_leaves, tidy_tree
from .geometry import REL_TOL, point_distance, prim_edges
from .instance import solution_from_edges


class RepairError(AssertionError):
    """The repaired tree broke an invariant (a bug, never expected)."""


@dataclass(frozen=True)
class AuxGraph:
    n_nodes: int
    edges: tuple            # (u, v, w) with u < v
    terminals: frozenset
    coords: dict            # endpoint node -> Point; terminals absent

    @staticmethod
    def segment_of(node):
        return node // 3

    @staticmethod
    def role(node):
        return ("a", "b", "o")[node % 3]

    def weight(self, u, v):
        if u > v:
            u, v = v, u
        for a, b, w in self.edges:
            if a == u and b == v:
                return w
        raise KeyError((u, v))


@dataclass(frozen=True)
class SteinerResult:
    edges: tuple
    cost: float
    guarantee_factor: float


def build_aux_graph(inst):
    n = inst.n
    coords = {}
    edges = []
    for i, s in enumerate(inst.segments):
        coords[3 * i], coords[3 * i + 1] = s.a, s.b
        edges.append((3 * i, 3 * i + 2, 0.0))
        edges.append((3 * i + 1, 3 * i + 2, 0.0))
    for i in range(n):
        for j in range(i + 1, n):
            for u in (3 * i, 3 * i + 1):
                for v in (3 * j, 3 * j + 1):
                    edges.append((u, v, point_distance(coords[u], coords[v])))
    edges.sort()
    terms = frozenset(3 * i + 2 for i in range(n))
    return AuxGraph(3 * n, tuple(edges), terms, coords)


def approx_steiner(graph):
    """Terminal-distance MST heuristic (guarantee 2).

    Shortest paths between terminals, an MST over the terminal distance
    matrix, every MST edge expanded into its path, then an MST of the union
    with non-terminal leaves stripped.
    """
    terms = sorted(graph.terminals)
    if len(terms) <= 1:
        # a lone terminal still needs one endpoint to carry the segment
        if graph.n_nodes == 3:
            return SteinerResult(((0, 2),), 0.0, 2.0)
        return SteinerResult((), 0.0, 2.0)
    W = graph_matrix(graph.n_nodes, graph.edges)
    D, pred = metric_closure(W)
    TD = D[np.ix_(terms, terms)]
    tmst = prim_edges(TD)
    union = set()
    for i, j in tmst:
        union.update(path_edges(pred, terms[i], terms[j]))
    edges, cost = tidy_tree(W, union, terms)
    return SteinerResult(tuple(edges), cost, 2.0)


# -- repair -----------------------------------------------------------------

def _adjacency(edges):
    adj = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return adj


def _ccw(graph, pivot, nodes):
    """Real (coordinate-bearing) nodes sorted counterclockwise around pivot,
    angle in [0, 2pi) from the +x axis, ties by distance then index."""
    p = graph.coords[pivot]

    def key(v):
        q = graph.coords[v]
        ang = math.atan2(q.y - p.y, q.x - p.x) % (2 * math.pi)
        return (ang, point_distance(p, q), v)

    return sorted((v for v in nodes if v in graph.coords), key=key)


def _is_tree(edges):
    nodes = {v for e in edges for v in e}
    if not edges:
        return True
    if len(edges) != len(nodes) - 1:
        return False
    adj = _adjacency(edges)
    start = next(iter(nodes))
    seen, stack = {start}, [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


def _edge_weight(graph, u, v):
    if u in graph.coords and v in graph.coords:
        return point_distance(graph.coords[u], graph.coords[v])
    return 0.0


def _cost(graph, edges):
    return math.fsum(_edge_weight(graph, u, v) for u, v in edges)


def bad_segments(graph, edges):
    """Pre-order walk: returns segments in the order their second endpoint is
    met (the stack, bottom first)."""
    nodes = {v for e in edges for v in e}
    real = [v for v in nodes if v in graph.coords]
    if not real:
        return []
    adj = _adjacency(edges)
    root = min(real, key=lambda v: (graph.coords[v].x, graph.coords[v].y, v))
    seen_end = set()
    stack = []
    visited = set()
    todo = [(root, None)]
    while todo:
        v, parent = todo.pop()
        if v in visited:
            continue
        visited.add(v)
        if v in graph.coords:
            seg = graph.segment_of(v)
            if seg in seen_end:
                stack.append(seg)
            seen_end.add(seg)
        kids = [w for w in adj.get(v, ()) if w != parent]
        geo = _ccw(graph, v, kids) if v in graph.coords else sorted(
            kids, key=lambda w: w)
        rest = sorted(w for w in kids if w not in graph.coords)
        order = geo + [w for w in rest if w not in geo]
        # push reversed so the first child is visited first
        for w in reversed(order):
            todo.append((w, v))
    return stack


def repair_tree(graph, st, strict=True):
    """Two-pass repair: find bad segments by a counterclockwise pre-order
    walk, then pop them, deleting the bad endpoint and chaining its real
    neighbours counterclockwise.  Asserts tree-ness after every pop and,
    with strict=True, the final 2x cost bound.

    The 2x bound can fail when a terminal hangs off both endpoints of a
    long segment: the Steiner tree then crosses the segment for free, and
    any one-endpoint tree must pay for that span."""
    edges = prune_leaves({(min(u, v), max(u, v)) for u, v in st.edges},
                         graph.terminals)
    if not _is_tree(edges):
        raise RepairError("steiner input is not a tree")
    stack = bad_segments(graph, edges)
    if not stack:
        return SteinerResult(tuple(sorted(edges)), _cost(graph, edges),
                             st.guarantee_factor)
    edges = set(edges)
    while stack:
        seg = stack.pop()
        a_node, b_node, o = 3 * seg, 3 * seg + 1, 3 * seg + 2
        adj = _adjacency(edges)
        on_a, on_b = a_node in adj.get(o, ()), b_node in adj.get(o, ())
        if on_a and on_b:
            # both endpoints carry the terminal: drop the heavier one and
            # keep the terminal on the other
            wa = sum(_edge_weight(graph, a_node, w) for w in adj[a_node])
            wb = sum(_edge_weight(graph, b_node, w) for w in adj[b_node])
            bad = a_node if wa > wb else b_node
        else:
            bad = b_node if on_a else a_node
        keep = b_node if bad == a_node else a_node
        nbrs = adj[bad]
        real = [w for w in nbrs if w != o]
        if o in nbrs:
            # the kept endpoint stands in for the terminal link
            real.append(keep)
        chain = _ccw(graph, bad, real)
        edges = {e for e in edges if bad not in e}
        for c1, c2 in zip(chain, chain[1:]):
            edges.add((min(c1, c2), max(c1, c2)))
        if not _is_tree(edges):
            raise RepairError("repair broke tree structure")
    cost = _cost(graph, edges)
    if strict and repair_overrun(cost, st.cost):
        raise RepairError("repair exceeded 2-factor")
    return SteinerResult(tuple(sorted(edges)), cost, st.guarantee_factor)


def repair_overrun(cost, st_cost):
    """True when a repaired tree breaks the 2x bound (with relative slack)."""
    return cost > 2.0 * st_cost + REL_TOL * max(1.0, st_cost)


def solve_approx(inst, steiner=approx_steiner, strict=True):
    """Aux graph -> Steiner tree -> repair -> ChoiceSolution (guarantee 2*alpha).

    strict=False skips the 2x repair assertion (tree-ness is still checked)."""
    graph = build_aux_graph(inst)
    st = steiner(graph)
    rep = repair_tree(graph, st, strict)
    if inst.n == 1:
        return solution_from_edges(inst, (0,), (), 2.0 * st.guarantee_factor)
    choices = [None] * inst.n
    for u, v in rep.edges:
        for w in (u, v):
            if w in graph.coords:
                seg = graph.segment_of(w)
                side = w % 3
                if choices[seg] not in (None, side):
                    raise RepairError("segment kept both endpoints")
                choices[seg] = side
    if None in choices:
        raise RepairError("segment lost both endpoints")
    real_edges = [(graph.segment_of(u), graph.segment_of(v)) for u, v in rep.edges
                  if u in graph.coords and v in graph.coords]
    sol = solution_from_edges(inst, choices, real_edges, 2.0 * st.guarantee_factor)
    return sol
