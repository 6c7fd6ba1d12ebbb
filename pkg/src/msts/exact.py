"""Exact oracles: MSTS by branch-and-bound, Steiner trees by Dreyfus-Wagner,
Max-2-SAT by enumeration.

The branch-and-bound works on generic "clusters" (a list of candidate points
per segment) so the same code serves two-endpoint segments and the sampled
five-point variant used for the extended gadget instances.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, shortest_path

from .geometry import REL_TOL, distance_matrix, mst_cost, prim_edges
from .instance import solution_from_choices

MAX_EXACT_SEGMENTS = 32
MAX_STEINER_TERMINALS = 14
MAX_SAT_VARIABLES = 24


class GuardError(ValueError):
    """Input exceeds an explicit oracle guard."""


class BudgetExceeded(RuntimeError):
    """Node budget ran out; .best holds the incumbent (or None)."""

    def __init__(self, best):
        super().__init__("budget exceeded")
        self.best = best


class NoSteinerTree(ValueError):
    pass


@dataclass(frozen=True)
class BnBConfig:
    node_budget: int = 0          # 0 = unlimited
    use_lower_bound: bool = True
    incumbent: tuple = None       # optional starting pick; wins ties against later leaves
    max_segments: int = MAX_EXACT_SEGMENTS

    def __post_init__(self):
        if self.node_budget < 0:
            raise ValueError("node budget must be >= 0")


def _tol(best):
    return REL_TOL * max(1.0, abs(best)) if math.isfinite(best) else 0.0


class _ClusterSearch:
    """Depth-first search over one-point-per-cluster picks in lexicographic
    order.  A leaf replaces the incumbent iff its cost is below
    best - tol(best); a subtree is pruned iff its lower bound exceeds
    best - tol(best)/2, which can never skip a leaf the plain enumeration
    would have accepted."""

    def __init__(self, clusters, cfg):
        self.cfg = cfg
        self.n = n = len(clusters)
        self.sizes = [len(c) for c in clusters]
        K = max(self.sizes)
        pts = np.full((n, K, 2), np.nan)
        for i, c in enumerate(clusters):
            pts[i, :len(c)] = np.asarray(c, dtype=float)
        flat = pts.reshape(-1, 2)
        D = distance_matrix(np.nan_to_num(flat, nan=0.0))
        pad = np.isnan(flat[:, 0])
        D[pad, :] = np.inf
        D[:, pad] = np.inf
        self.D4 = D.reshape(n, K, n, K)
        self.K = K
        self.best = math.inf
        self.best_pick = None
        self.nodes = 0

    def _bound_matrix(self):
        # cluster-to-cluster minimum over all candidate pairs
        M = self.D4.min(axis=(1, 3))
        np.fill_diagonal(M, np.inf)
        return M

    def run(self):
        if self.n == 1:
            return (0,), 0.0
        M = self._bound_matrix()
        if self.cfg.incumbent is not None:
            pick = list(self.cfg.incumbent)
            if len(pick) != self.n or any(not 0 <= c < k for c, k in zip(pick, self.sizes)):
                raise ValueError("incumbent does not match the clusters")
            flat = [i * self.K + c for i, c in enumerate(pick)]
            W = self.D4.reshape(self.n * self.K, -1)[np.ix_(flat, flat)].copy()
            np.fill_diagonal(W, np.inf)
            self.best, self.best_pick = mst_cost(W), pick
        self._dfs(0, [], M)
        return tuple(self.best_pick), self.best

    def _tick(self):
        self.nodes += 1
        b = self.cfg.node_budget
        if b and self.nodes > b:
            raise BudgetExceeded(None if self.best_pick is None else
                                 (tuple(self.best_pick), self.best))

    def _dfs(self, d, pick, M):
        n = self.n
        for c in range(self.sizes[d]):
            self._tick()
            # fix cluster d to candidate c: only row/column d changes
            row = self.D4[d, c]                         # (n, K)
            sel = row.min(axis=1)
            if d:
                sel[:d] = row[np.arange(d), pick]
            M2 = M.copy()
            M2[d, :] = sel
            M2[:, d] = sel
            M2[d, d] = np.inf
            pick.append(c)
            if d == n - 1:
                cost = mst_cost(M2)
                if cost < self.best - _tol(self.best):
                    self.best, self.best_pick = cost, list(pick)
            elif self.cfg.use_lower_bound and self.best < math.inf:
                lb = mst_cost(M2)
                if not lb > self.best - 0.5 * _tol(self.best):
                    self._dfs(d + 1, pick, M2)
            else:
                self._dfs(d + 1, pick, M2)
            pick.pop()


def min_cluster_tree(clusters, cfg=None):
    """Cheapest spanning tree picking one point per cluster.

    Returns (pick, cost) where pick[i] indexes into clusters[i]; among optima
    the lexicographically smallest pick wins.
    """
    if not clusters or any(len(c) == 0 for c in clusters):
        raise ValueError("every cluster needs at least one point")
    return _ClusterSearch(clusters, cfg or BnBConfig()).run()


def brute_force_msts(inst, cfg=None):
    """Exact MSTS via branch-and-bound (or plain DFS with use_lower_bound=False)."""
    cfg = cfg or BnBConfig()
    if inst.n > cfg.max_segments:
        raise GuardError("instance too large for exact solver")
    try:
        pick, _ = min_cluster_tree([list(s) for s in inst.segments], cfg)
    except BudgetExceeded as e:
        if e.best is not None:
            e.best = solution_from_choices(inst, e.best[0])
        raise
    return solution_from_choices(inst, pick)


def enumerate_msts(inst):
    """Unpruned 2^n enumeration in lexicographic order (oracle for the B&B)."""
    if inst.n > MAX_EXACT_SEGMENTS:
        raise GuardError("instance too large for exact solver")
    n = inst.n
    D = distance_matrix(inst.endpoints())
    best, best_c = math.inf, None
    for ch in itertools.product((0, 1), repeat=n):
        idx = [2 * i + c for i, c in enumerate(ch)]
        W = D[np.ix_(idx, idx)].copy()
        np.fill_diagonal(W, np.inf)
        cost = mst_cost(W)
        if cost < best - _tol(best):
            best, best_c = cost, ch
    return solution_from_choices(inst, best_c)


# -- Steiner trees ----------------------------------------------------------

def graph_matrix(n_nodes, edges):
    """Dense symmetric matrix with np.inf for missing edges (zeros are edges)."""
    W = np.full((n_nodes, n_nodes), np.inf)
    for u, v, w in edges:
        if w < W[u, v]:
            W[u, v] = W[v, u] = w
    return W


def metric_closure(W):
    """All-pairs shortest paths with predecessor matrix (Floyd-Warshall)."""
    G = csgraph_from_dense(W, null_value=np.inf)
    return shortest_path(G, method="FW", directed=False, return_predecessors=True)


def path_edges(pred, s, t):
    out = []
    v = t
    while v != s:
        u = pred[s, v]
        if u < 0:
            raise NoSteinerTree("no Steiner tree")
        out.append((min(u, v), max(u, v)))
        v = u
    return out


def tidy_tree(W, edge_set, terminals):
    """MST of the subgraph spanned by edge_set, then strip non-terminal leaves.

    Returns (sorted edge list, fsum cost)."""
    nodes = sorted({v for e in edge_set for v in e} | set(terminals))
    loc = {v: k for k, v in enumerate(nodes)}
    sub = np.full((len(nodes), len(nodes)), np.inf)
    for u, v in edge_set:
        sub[loc[u], loc[v]] = sub[loc[v], loc[u]] = W[u, v]
    tree = prim_edges(sub)
    if tree is None:
        raise NoSteinerTree("no Steiner tree")
    edges = {(nodes[i], nodes[j]) for i, j in tree}
    edges = prune_leaves(edges, terminals)
    edges = sorted(edges)
    return edges, math.fsum(W[u, v] for u, v in edges)


def prune_leaves(edges, terminals):
    """Iteratively drop non-terminal leaves from an edge set (a forest)."""
    edges = set(edges)
    terminals = set(terminals)
    while True:
        deg = {}
        for u, v in edges:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        drop = {e for e in edges
                if (deg[e[0]] == 1 and e[0] not in terminals) or
                   (deg[e[1]] == 1 and e[1] not in terminals)}
        if not drop:
            return edges
        edges -= drop


def exact_steiner(graph):
    """Minimum Steiner tree by the Dreyfus-Wagner subset DP.

    graph needs .n_nodes, .edges (u, v, w) and .terminals.  Returns a
    SteinerResult with guarantee_factor 1.
    """
    from .steiner_approx import SteinerResult
    terms = sorted(graph.terminals)
    t = len(terms)
    if t > MAX_STEINER_TERMINALS:
        raise GuardError("too many terminals")
    W = graph_matrix(graph.n_nodes, graph.edges)
    if t <= 1:
        return SteinerResult((), 0.0, 1.0)
    D, pred = metric_closure(W)
    if not np.all(np.isfinite(D[np.ix_(terms, terms)])):
        raise NoSteinerTree("no Steiner tree")
    N = graph.n_nodes
    full = (1 << t) - 1
    dp = np.full((full + 1, N), np.inf)
    # back-pointers: split[S, v] = sub-mask (>0) or 0; via[S, v] = node u
    split = np.zeros((full + 1, N), dtype=np.int64)
    via = np.full((full + 1, N), -1, dtype=np.int64)
    for k, term in enumerate(terms):
        dp[1 << k] = D[term]
        via[1 << k] = term
    for S in range(1, full + 1):
        if S & (S - 1) == 0:
            continue
        low = S & -S
        best = np.full(N, np.inf)
        arg = np.zeros(N, dtype=np.int64)
        sub = (S - 1) & S
        while sub:
            if sub & low:              # each unordered split once
                cand = dp[sub] + dp[S ^ sub]
                better = cand < best
                best = np.where(better, cand, best)
                arg = np.where(better, sub, arg)
            sub = (sub - 1) & S
        # grow from the split point u to v along a shortest path
        tot = best[:, None] + D                     # [u, v]
        u = np.argmin(tot, axis=0)
        dp[S] = tot[u, np.arange(N)]
        via[S] = u
        split[S] = arg
    root = terms[0]
    edge_set = set()

    def rebuild(S, v):
        u = int(via[S, v])
        if u != v:
            edge_set.update(path_edges(pred, u, v))
        if S & (S - 1) == 0:
            return
        a = int(split[S, u])
        rebuild(a, u)
        rebuild(S ^ a, u)

    rebuild(full, root)
    edges, cost = tidy_tree(W, edge_set, terms)
    return SteinerResult(tuple(edges), cost, 1.0)


# -- Max-2-SAT --------------------------------------------------------------

def max2sat_brute(formula):
    """Best assignment by full enumeration; ties go to the lexicographically
    smallest assignment with False < True (x1 is the most significant)."""
    n = formula.n
    if n > MAX_SAT_VARIABLES:
        raise GuardError("too many variables for brute force")
    codes = np.arange(1 << n, dtype=np.int64)
    count = np.zeros(1 << n, dtype=np.int32)
    for clause in formula.clauses:
        sat = np.zeros(1 << n, dtype=bool)
        for var, pos in clause:
            bit = (codes >> (n - var)) & 1
            sat |= (bit == 1) if pos else (bit == 0)
        count += sat
    best = int(np.argmax(count))
    assign = [bool((best >> (n - v)) & 1) for v in range(1, n + 1)]
    return assign, int(count[best])
