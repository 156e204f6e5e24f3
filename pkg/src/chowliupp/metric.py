"""Tree metric reconstruction from noisy distance estimates.

The pipeline is: shortest-path closure from a root, a capped estimate shifted
by a centroid metric, its subdominant ultrametric realized as a dendrogram,
the centroid subtracted back out as a Steiner tree, and finally Steiner nodes
contracted onto their nearest labeled vertices.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from chowliupp._graph import UnionFind, dense_dijkstra, dense_prim
from chowliupp.model import TreeTopology
from chowliupp.validation import ATOL, check_distance_matrix, check_eps

# slack added to every capped estimate below the truncation radius
CAP_SLACK = 44.0
# pairs at or beyond this many multiples of L are treated as unknown
TRUNCATION_MULTIPLE = 3.0


class UnreachableVertexError(ValueError):
    """Some vertices have infinite shortest-path distance from the root."""

    def __init__(self, vertices, root):
        self.vertices = tuple(int(v) for v in vertices)
        self.root = int(root)
        super().__init__(f"vertices {list(self.vertices)} unreachable from root {self.root}")


class FiberError(AssertionError):
    """A nearest-labeled-vertex fiber is not a connected subtree."""


@dataclass(frozen=True)
class CentroidMetric:
    """Star metric c(u, v) = ell_u + ell_v with ell_u = d_max - dist(root, u)."""

    ell: np.ndarray
    d_max: float
    rho: int = 0

    @classmethod
    def from_root_distances(cls, dist, rho=0):
        dist = np.asarray(dist, dtype=float)
        d_max = float(dist.max())
        return cls(d_max - dist, d_max, rho)

    def matrix(self):
        c = self.ell[:, None] + self.ell[None, :]
        np.fill_diagonal(c, 0.0)
        return c


@dataclass(frozen=True)
class Dendrogram:
    """Binary merge tree; merge k creates node n + k at height heights[k]."""

    n_leaves: int
    children: np.ndarray
    heights: np.ndarray

    def __post_init__(self):
        if len(self.children) != max(self.n_leaves - 1, 0):
            raise ValueError("a dendrogram on n leaves has n - 1 merges")
        if np.any(np.diff(self.heights) < -ATOL):
            raise ValueError("merge heights must be nondecreasing")

    @property
    def n_nodes(self):
        return 2 * self.n_leaves - 1

    def node_height(self, node):
        return 0.0 if node < self.n_leaves else float(self.heights[node - self.n_leaves])

    def parents(self):
        parent = np.full(self.n_nodes, -1, dtype=np.intp)
        for k, (a, b) in enumerate(self.children):
            parent[a] = parent[b] = self.n_leaves + k
        return parent

    def cophenetic(self):
        """Induced ultrametric: height of the lowest common merge of each pair."""
        n = self.n_leaves
        e = np.zeros((n, n))
        members = {i: [i] for i in range(n)}
        for k, (a, b) in enumerate(self.children):
            left, right = members.pop(int(a)), members.pop(int(b))
            e[np.ix_(left, right)] = self.heights[k]
            e[np.ix_(right, left)] = self.heights[k]
            members[n + k] = left + right
        return e


@dataclass(frozen=True)
class SteinerTree:
    """Edge-weighted tree on labeled vertices 0..n_labeled-1 plus Steiner vertices."""

    n_labeled: int
    n_vertices: int
    edges: tuple
    root: int = 0
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n_vertices < self.n_labeled or self.n_labeled < 1:
            raise ValueError("need at least one labeled vertex")
        if len(self.edges) != self.n_vertices - 1:
            raise ValueError("a tree on N vertices has N - 1 edges")
        if not 0 <= self.root < self.n_labeled:
            raise ValueError("root must be a labeled vertex")
        uf = UnionFind(self.n_vertices)
        for a, b, length in self.edges:
            if length < 0 or not np.isfinite(length):
                raise ValueError(f"edge ({a}, {b}) has invalid length {length}")
            if uf.find(a) == uf.find(b):
                raise ValueError(f"edge ({a}, {b}) closes a cycle")
            uf.union(a, b)

    def is_steiner(self, v):
        return v >= self.n_labeled

    def adjacency(self):
        adj = [[] for _ in range(self.n_vertices)]
        for a, b, length in self.edges:
            adj[a].append((b, length))
            adj[b].append((a, length))
        return adj

    def distances_from(self, source):
        """Path lengths from `source` to every vertex."""
        adj = self.adjacency()
        dist = np.full(self.n_vertices, np.nan)
        dist[source] = 0.0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v, length in adj[u]:
                if np.isnan(dist[v]):
                    dist[v] = dist[u] + length
                    queue.append(v)
        return dist

    def labeled_distances(self):
        """n_labeled x n_labeled matrix of path lengths between labeled vertices."""
        n = self.n_labeled
        return np.array([self.distances_from(u)[:n] for u in range(n)])

    def to_dict(self):
        verts = [{"id": v, "label": v} if v < self.n_labeled else {"id": v} for v in range(self.n_vertices)]
        return {
            "root": self.root,
            "vertices": verts,
            "edges": [[int(a), int(b), float(w)] for a, b, w in self.edges],
        }

    @classmethod
    def from_dict(cls, data):
        verts = data["vertices"]
        labeled = sorted(v["id"] for v in verts if "label" in v)
        if labeled != list(range(len(labeled))):
            raise ValueError("labeled vertices must have ids 0..n-1")
        edges = tuple((int(a), int(b), float(w)) for a, b, w in data["edges"])
        return cls(len(labeled), len(verts), edges, int(data.get("root", 0)))


def evolutionary_estimate(mu_tilde, eps):
    """-log(mu_tilde - eps), infinite where mu_tilde <= eps; zero diagonal."""
    eps = check_eps(eps)
    mu = np.asarray(mu_tilde, dtype=float)
    shifted = mu - eps
    with np.errstate(divide="ignore"):
        d = np.where(shifted > 0, -np.log(np.where(shifted > 0, shifted, 1.0)), np.inf)
    d = np.maximum(d, 0.0)
    np.fill_diagonal(d, 0.0)
    return d


def shortest_paths_from_root(d_pre, rho=0):
    """Shortest-path distances from rho in the complete graph weighted by d_pre."""
    d = check_distance_matrix(d_pre)
    if not 0 <= rho < d.shape[0]:
        raise ValueError(f"root {rho} out of range")
    return dense_dijkstra(d, rho)


def capped_estimate(d_pre, centroid, L, eps):
    """d_pre shifted by the centroid metric plus slack, capped at 2 d_max.

    Pairs touching the root or with d_pre >= 3L get the vacuous cap 2 d_max.
    """
    rho = centroid.rho
    cap = 2.0 * centroid.d_max
    near = d_pre < TRUNCATION_MULTIPLE * L
    a = np.where(near, d_pre, 0.0) + centroid.matrix() + CAP_SLACK * eps
    a = np.where(near, np.minimum(a, cap), cap)
    a[rho, :] = cap
    a[:, rho] = cap
    np.fill_diagonal(a, 0.0)
    return a


def subdominant_ultrametric(a):
    """Largest ultrametric below a: single linkage over the minimum spanning tree."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"dissimilarity must be square, got shape {a.shape}")
    n = a.shape[0]
    if n < 1:
        raise ValueError("need at least one point")
    off = a[~np.eye(n, dtype=bool)]
    if not np.all(np.isfinite(off)):
        raise ValueError("dissimilarity must be finite off the diagonal")
    if not np.allclose(a, a.T, atol=ATOL, rtol=0):
        raise ValueError("dissimilarity must be symmetric")

    mst = dense_prim(a, maximize=False)
    w = a[mst[:, 0], mst[:, 1]]
    order = np.lexsort((mst[:, 1], mst[:, 0], w))
    uf = UnionFind(n)
    node = list(range(n))  # cluster representative -> dendrogram node
    children = np.empty((n - 1, 2), dtype=np.intp)
    heights = np.empty(n - 1)
    for k, i in enumerate(order):
        ru, rv = uf.find(int(mst[i, 0])), uf.find(int(mst[i, 1]))
        children[k] = (node[ru], node[rv])
        heights[k] = w[i]
        node[uf.union(ru, rv)] = n + k
    return Dendrogram(n, children, heights)


def ultra_minus_centroid(e, c, rho=0):
    """Realize e - c as a Steiner tree whose Steiner vertices are the merge nodes.

    A merge at height h sits h/2 above the leaves of the ultrametric tree, so
    consecutive merges are joined by half the height difference and leaf u
    hangs h/2 - ell_u below its first merge. Negative leaf lengths only arise
    from inputs violating e(u, v) >= 2 max(ell_u, ell_v); they are clamped to
    zero and counted in diagnostics["clamped_leaf_edges"].
    """
    if not isinstance(e, Dendrogram):
        e = subdominant_ultrametric(e)
    if not isinstance(c, CentroidMetric):
        ell = np.asarray(c, dtype=float)
        c = CentroidMetric(ell, float(ell.max()) if ell.size else 0.0, rho)
    n = e.n_leaves
    ell = np.asarray(c.ell, dtype=float)
    if ell.shape != (n,):
        raise ValueError("centroid lengths must match the number of leaves")

    edges = []
    clamped = 0
    for k, pair in enumerate(e.children):
        h = float(e.heights[k])
        for child in pair:
            child = int(child)
            if child < n:
                length = h / 2 - ell[child]
                if length < -ATOL:
                    clamped += 1
                length = max(length, 0.0)
            else:
                length = max((h - e.node_height(child)) / 2, 0.0)
            edges.append((child, n + k, length))
    return SteinerTree(n, e.n_nodes, tuple(edges), rho, {"clamped_leaf_edges": clamped})


def additive_metric_reconstruction(d_pre, L, eps, rho=0, check=False):
    """Additive metric close to d_pre, as a Steiner tree rooted at rho.

    L bounds the true edge lengths and eps the one-sided noise on pairs within
    3L. The error guarantee needs L >= 100 eps; other inputs still run, and
    diagnostics["hypotheses_hold"] records which case applied.
    """
    d = check_distance_matrix(d_pre)
    eps = check_eps(eps)
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    n = d.shape[0]
    dist = dense_dijkstra(d, rho)
    if not np.all(np.isfinite(dist)):
        raise UnreachableVertexError(np.flatnonzero(~np.isfinite(dist)), rho)
    centroid = CentroidMetric.from_root_distances(dist, rho)
    if n == 1:
        return SteinerTree(1, 1, (), rho, {"clamped_leaf_edges": 0, "hypotheses_hold": True})
    a = capped_estimate(d, centroid, L, eps)
    e = subdominant_ultrametric(a)
    if check:
        ultra = e.cophenetic()
        others = np.arange(n) != rho
        if not np.allclose(ultra[rho, others], 2 * centroid.d_max, atol=ATOL, rtol=0):
            raise AssertionError("root row of the ultrametric differs from 2 d_max")
    tree = ultra_minus_centroid(e, centroid, rho)
    tree.diagnostics["hypotheses_hold"] = bool(L >= 100 * eps)
    tree.diagnostics["d_max"] = centroid.d_max
    return tree


def prune_steiner(t):
    """Drop Steiner leaves and splice out degree-2 Steiner vertices until none remain.

    Labeled-pair distances are unchanged. Surviving Steiner vertices are
    renumbered consecutively after the labeled ones.
    """
    adj = [dict() for _ in range(t.n_vertices)]
    for a, b, length in t.edges:
        adj[a][b] = length
        adj[b][a] = length
    alive = [True] * t.n_vertices
    stack = [v for v in range(t.n_labeled, t.n_vertices) if len(adj[v]) <= 2]
    while stack:
        v = stack.pop()
        if not alive[v] or len(adj[v]) > 2:
            continue
        nbrs = list(adj[v].items())
        alive[v] = False
        for w, _ in nbrs:
            del adj[w][v]
        adj[v].clear()
        if len(nbrs) == 2:
            (x, lx), (y, ly) = nbrs
            adj[x][y] = adj[y][x] = lx + ly
        else:
            for w, _ in nbrs:
                if w >= t.n_labeled and len(adj[w]) <= 2:
                    stack.append(w)

    keep = [v for v in range(t.n_vertices) if alive[v]]
    new_id = {v: i for i, v in enumerate(keep)}
    edges = tuple(
        (new_id[a], new_id[b], length)
        for a in keep
        for b, length in adj[a].items()
        if a < b
    )
    return SteinerTree(t.n_labeled, len(keep), edges, t.root, dict(t.diagnostics))


def _closer(a, b):
    """Order candidates (distance, hops, label) with a tolerance on distance."""
    if a[0] < b[0] - ATOL:
        return True
    if a[0] > b[0] + ATOL:
        return False
    return a[1:] < b[1:]


def nearest_labeled(t):
    """Nearest labeled vertex of every vertex, ties to fewer hops then lower label.

    Returns (distance, label) arrays. Two passes over the tree rooted at t.root:
    the best candidate inside each subtree, then the best one through the parent.
    """
    adj = t.adjacency()
    parent = np.full(t.n_vertices, -1, dtype=np.intp)
    plen = np.zeros(t.n_vertices)
    order = [t.root]
    seen = np.zeros(t.n_vertices, dtype=bool)
    seen[t.root] = True
    for u in order:
        for v, length in adj[u]:
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                plen[v] = length
                order.append(v)

    inf = (np.inf, np.inf, np.inf)
    best = [(0.0, 0, v) if v < t.n_labeled else inf for v in range(t.n_vertices)]
    for v in reversed(order):
        p = parent[v]
        if p < 0 or p < t.n_labeled:
            continue
        d, h, lab = best[v]
        cand = (d + plen[v], h + 1, lab)
        if _closer(cand, best[p]):
            best[p] = cand
    for v in order:
        p = parent[v]
        if p < 0 or v < t.n_labeled:
            continue
        d, h, lab = best[p]
        cand = (d + plen[v], h + 1, lab)
        if _closer(cand, best[v]):
            best[v] = cand
    dist = np.array([b[0] for b in best], dtype=float)
    label = np.array([b[2] for b in best], dtype=np.intp)
    return dist, label


def c_radius(t):
    """Largest distance from a Steiner vertex to its nearest labeled vertex."""
    if t.n_vertices == t.n_labeled:
        return 0.0
    dist, _ = nearest_labeled(t)
    return float(dist[t.n_labeled :].max())


def desteinerize(t):
    """Contract Steiner vertices onto their nearest labeled vertex.

    Returns (TreeTopology, lengths) on the labeled vertices. Edge lengths are
    set in BFS order from the root so that root distances match t wherever
    they can stay nonnegative.
    """
    t = prune_steiner(t)
    n = t.n_labeled
    _, f = nearest_labeled(t)

    contracted = set()
    inner = 0
    for a, b, _ in t.edges:
        fa, fb = int(f[a]), int(f[b])
        if fa == fb:
            inner += 1
        else:
            contracted.add((min(fa, fb), max(fa, fb)))
    if inner != t.n_vertices - n or len(contracted) != n - 1:
        raise FiberError("nearest-labeled fibers are not connected subtrees")
    topo = TreeTopology(n, tuple(sorted(contracted)))

    d_root = t.distances_from(t.root)[:n]
    order, parent, pedge = topo.bfs(t.root)
    lengths = np.zeros(n - 1)
    depth = np.zeros(n)
    for v in order[1:]:
        u = parent[v]
        length = max(0.0, d_root[v] - depth[u])
        lengths[pedge[v]] = length
        depth[v] = depth[u] + length
    return topo, lengths


def tree_metric_reconstruction(d_pre, L, eps, rho=0):
    """Tree metric on the labeled vertices only: reconstruction then desteinerization."""
    return desteinerize(additive_metric_reconstruction(d_pre, L, eps, rho))


def lca_depth(d, u, v, rho=0):
    """Distance from rho to the meeting point of u and v in a tree metric d."""
    return (d[u, rho] + d[v, rho] - d[u, v]) / 2
