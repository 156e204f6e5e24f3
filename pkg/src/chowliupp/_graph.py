"""Dense O(n^2) graph primitives shared by the spanning-tree and metric code."""

import numpy as np


def dense_prim(weights, maximize=True):
    """Spanning tree of a complete graph given as a dense matrix.

    Ties are broken towards the lexicographically smaller (min, max) endpoint
    pair, so the result equals Kruskal's tree under that total order.

    Returns an (n - 1, 2) int array of edges (u < v) in insertion order.
    """
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    if n < 1:
        raise ValueError("spanning tree needs at least one vertex")
    if n == 1:
        return np.empty((0, 2), dtype=np.intp)
    sign = 1.0 if maximize else -1.0
    score = sign * w

    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    key = score[0].copy()
    best = np.zeros(n, dtype=np.intp)
    # pair code min*n + max orders candidate edges lexicographically
    idx = np.arange(n)
    code = np.minimum(idx, 0) * n + np.maximum(idx, 0)
    big = np.iinfo(np.int64).max
    edges = np.empty((n - 1, 2), dtype=np.intp)

    for k in range(n - 1):
        cand = np.where(in_tree, -np.inf, key)
        top = cand.max()
        ties = (cand == top) & ~in_tree
        v = int(np.argmin(np.where(ties, code, big)))
        u = int(best[v])
        edges[k] = (min(u, v), max(u, v))
        in_tree[v] = True

        new = score[v]
        new_code = np.minimum(idx, v) * n + np.maximum(idx, v)
        better = (new > key) | ((new == key) & (new_code < code))
        better &= ~in_tree
        key = np.where(better, new, key)
        code = np.where(better, new_code, code)
        best = np.where(better, v, best)
    return edges


def dense_dijkstra(weights, source):
    """Single-source shortest paths on a dense nonnegative matrix (inf = no edge)."""
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    dist = np.full(n, np.inf)
    dist[source] = 0.0
    done = np.zeros(n, dtype=bool)
    for _ in range(n):
        cand = np.where(done, np.inf, dist)
        u = int(np.argmin(cand))
        if not np.isfinite(cand[u]):
            break
        done[u] = True
        np.minimum(dist, dist[u] + w[u], out=dist)
    return dist


class UnionFind:
    """Disjoint sets with path halving and union by size."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra


def connected_components(n, edges):
    """Components of an edge list, each sorted, ordered by smallest member."""
    uf = UnionFind(n)
    for u, v in edges:
        uf.union(int(u), int(v))
    groups = {}
    for x in range(n):
        groups.setdefault(uf.find(x), []).append(x)
    return sorted(groups.values(), key=lambda g: g[0])
