"""Tree Ising models: topology, exact correlations, local TV, sampling."""

import heapq
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from chowliupp._graph import UnionFind
from chowliupp.validation import (
    ATOL,
    check_correlation_matrix,
    check_eps,
    check_rng,
    check_spins,
)

MAX_EXACT_N = 15
PERTURB_MODES = ("random_sign", "toward_zero", "away_from_zero")

# state index 0 is spin +1, index 1 is spin -1
SPINS = np.array([1, -1], dtype=np.int8)


@dataclass(frozen=True)
class TreeTopology:
    """Spanning tree on vertices 0..n-1; edges are stored as (min, max) pairs."""

    n: int
    edges: tuple

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValueError("a tree needs at least one vertex")
        norm = []
        for e in self.edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            norm.append((min(u, v), max(u, v)))
        if len(norm) != n - 1:
            raise ValueError(f"a tree on {n} vertices has {n - 1} edges, got {len(norm)}")
        if len(set(norm)) != len(norm):
            raise ValueError("duplicate edges")
        uf = UnionFind(n)
        for u, v in norm:
            if uf.find(u) == uf.find(v):
                raise ValueError(f"edge ({u}, {v}) closes a cycle")
            uf.union(u, v)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def edge_set(self):
        return frozenset(self.edges)

    def adjacency(self):
        """List of (neighbor, edge index) pairs per vertex."""
        adj = [[] for _ in range(self.n)]
        for i, (u, v) in enumerate(self.edges):
            adj[u].append((v, i))
            adj[v].append((u, i))
        return adj

    def bfs(self, root=0):
        """BFS order plus parent and parent-edge arrays (-1 at the root)."""
        adj = self.adjacency()
        parent = np.full(self.n, -1, dtype=np.intp)
        pedge = np.full(self.n, -1, dtype=np.intp)
        seen = np.zeros(self.n, dtype=bool)
        seen[root] = True
        order = [root]
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, i in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    parent[v] = u
                    pedge[v] = i
                    order.append(v)
                    queue.append(v)
        return np.array(order, dtype=np.intp), parent, pedge

    def path_edges(self, u, v):
        """Edge indices on the unique u-v path."""
        _, parent, pedge = self.bfs(u)
        out = []
        while v != u:
            out.append(int(pedge[v]))
            v = int(parent[v])
        return out[::-1]

    def degrees(self):
        deg = np.zeros(self.n, dtype=np.intp)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


@dataclass(frozen=True)
class TreeIsingModel:
    """Zero-field Ising model on a tree, parameterized by edge correlations."""

    topology: TreeTopology
    theta: np.ndarray = field(repr=False)

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).reshape(-1)
        if theta.shape[0] != len(self.topology.edges):
            raise ValueError("need one theta per edge")
        if not np.all(np.isfinite(theta)) or np.any(np.abs(theta) > 1 + ATOL):
            raise ValueError("edge correlations must lie in [-1, 1]")
        theta = np.clip(theta, -1.0, 1.0)
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_edges(cls, n, weighted_edges):
        weighted_edges = list(weighted_edges)
        topo = TreeTopology(n, tuple((u, v) for u, v, _ in weighted_edges))
        return cls(topo, [t for _, _, t in weighted_edges])

    @property
    def n(self):
        return self.topology.n

    @property
    def edges(self):
        return self.topology.edges

    @property
    def couplings(self):
        """Interaction strengths J = atanh(theta); +-inf for hard constraints."""
        with np.errstate(divide="ignore"):
            return np.arctanh(self.theta)

    def edge_theta(self, u, v):
        key = (min(u, v), max(u, v))
        return float(self.theta[self.edges.index(key)])

    def edge_dict(self):
        return {e: float(t) for e, t in zip(self.edges, self.theta)}

    def correlations(self):
        return pairwise_correlations(self)


def path_aggregate(topology, values, combine=np.multiply, identity=1.0):
    """Fold per-edge values along every tree path into a dense n x n matrix.

    One BFS from vertex 0: a vertex is combined onto its parent's row for all
    earlier vertices, none of which lie in its subtree. O(n^2) total.
    """
    n = topology.n
    values = np.asarray(values, dtype=float)
    out = np.empty((n, n))
    np.fill_diagonal(out, identity)
    order, parent, pedge = topology.bfs(0)
    for i in range(1, n):
        v = order[i]
        prev = order[:i]
        row = combine(out[prev, parent[v]], values[pedge[v]])
        out[prev, v] = row
        out[v, prev] = row
    return out


def pairwise_correlations(model):
    """Exact E[X_u X_v] for all pairs: products of theta along tree paths."""
    return path_aggregate(model.topology, model.theta, np.multiply, 1.0)


def tree_distances(topology, lengths):
    """All-pairs path lengths of an edge-weighted tree."""
    return path_aggregate(topology, lengths, np.add, 0.0)


def _as_correlations(x):
    if isinstance(x, TreeIsingModel):
        return pairwise_correlations(x)
    return np.asarray(x, dtype=float)


def loctv2(p, q):
    """Largest pairwise-marginal total variation: half the max |mu_p - mu_q|.

    Accepts models or correlation matrices (estimates need not be realizable).
    """
    a, b = _as_correlations(p), _as_correlations(q)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.shape[0] < 2:
        return 0.0
    diff = np.abs(a - b)
    np.fill_diagonal(diff, 0.0)
    return float(diff.max() / 2)


def marginal_joint(model, subset):
    """Exact marginal table over `subset`, shape (2,) * k with index 0 meaning +1.

    Leaves outside the subset are pruned, then the remaining tree is summed
    out by upward message passing rooted at subset[0].
    """
    subset = [int(s) for s in subset]
    k = len(subset)
    if k == 0:
        raise ValueError("subset must be non-empty")
    if k > MAX_EXACT_N:
        raise ValueError(f"subset size {k} exceeds {MAX_EXACT_N}")
    if len(set(subset)) != k or not all(0 <= s < model.n for s in subset):
        raise ValueError("subset must contain distinct vertex indices")

    keep = set(subset)
    adj = model.topology.adjacency()
    deg = [len(a) for a in adj]
    alive = [True] * model.n
    stack = [v for v in range(model.n) if deg[v] <= 1 and v not in keep]
    while stack:
        v = stack.pop()
        if not alive[v]:
            continue
        alive[v] = False
        for w, _ in adj[v]:
            if alive[w]:
                deg[w] -= 1
                if deg[w] <= 1 and w not in keep:
                    stack.append(w)

    root = subset[0]
    parent = {root: (-1, -1)}
    order = [root]
    for u in order:
        for w, i in adj[u]:
            if alive[w] and w not in parent:
                parent[w] = (u, i)
                order.append(w)

    spins = SPINS.astype(float)
    pos = {s: i for i, s in enumerate(subset)}

    def label(x, slot):
        # einsum labels must be small ints: subset vertices keep their position,
        # a summed-out vertex borrows a scratch label
        return pos.get(x, k + slot)

    # message[v] = (table, labels): table over v then subset vertices below v
    message = {}
    for v in reversed(order):
        lv = label(v, 0)
        table, axes = np.ones(2), [lv]
        for w, i in adj[v]:
            if w not in parent or parent[w][0] != v:
                continue
            m_tab, m_axes = message.pop(w)
            lw = label(w, 1)
            m_axes = [lw] + m_axes[1:]
            edge = (1.0 + model.theta[i] * np.outer(spins, spins)) / 2  # [x_v, x_w]
            out_axes = [lv] + ([lw] if w in keep else []) + m_axes[1:]
            m_tab = np.einsum(edge, [lv, lw], m_tab, m_axes, out_axes)
            table = np.einsum(table, axes, m_tab, out_axes, axes + out_axes[1:])
            axes = axes + out_axes[1:]
        message[v] = (table, axes)

    table, axes = message[root]
    table = table / 2.0
    return np.transpose(table, [axes.index(i) for i in range(k)])


def loctv_k_exact(p, q, k):
    """Exact max over size-k subsets of marginal TV; n is capped at 15."""
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} vs {q.n}")
    if p.n > MAX_EXACT_N:
        raise ValueError(f"exact locTV needs n <= {MAX_EXACT_N}, got {p.n}")
    if not 1 <= k <= p.n:
        raise ValueError(f"k must be in [1, {p.n}], got {k}")
    best = 0.0
    for s in combinations(range(p.n), k):
        tv = 0.5 * np.abs(marginal_joint(p, s) - marginal_joint(q, s)).sum()
        best = max(best, float(tv))
    return best


def sample(model, m, seed=None):
    """Draw m samples: uniform root spin, each child copies its parent w.p. (1+theta)/2."""
    if m < 1:
        raise ValueError("m must be positive")
    rng = check_rng(seed)
    order, parent, pedge = model.topology.bfs(0)
    x = np.empty((m, model.n), dtype=np.int8)
    x[:, 0] = np.where(rng.random(m) < 0.5, 1, -1)
    for v in order[1:]:
        keep = rng.random(m, dtype=np.float32) < (1.0 + model.theta[pedge[v]]) / 2
        x[:, v] = np.where(keep, x[:, parent[v]], -x[:, parent[v]])
    return x


def empirical_correlations(samples):
    """Sample second moments; the diagonal is forced to 1 and nothing is clamped."""
    x = check_spins(samples)
    m = x.shape[0]
    # partial sums are integers below 2^24, so float32 products are exact
    dtype = np.float32 if m < 2**24 else np.float64
    xf = x.astype(dtype)
    mu = (xf.T @ xf).astype(np.float64) / m
    np.fill_diagonal(mu, 1.0)
    return mu


def perturb(mu, eps, seed=None, mode="random_sign"):
    """Shift every off-diagonal entry by exactly eps, clamping to [-1, 1].

    toward_zero leaves exact zeros in place; away_from_zero moves zeros to +eps.
    """
    if mode not in PERTURB_MODES:
        raise ValueError(f"mode must be one of {PERTURB_MODES}, got {mode!r}")
    eps = check_eps(eps)
    mu = check_correlation_matrix(mu)
    n = mu.shape[0]
    if mode == "random_sign":
        rng = check_rng(seed)
        signs = np.where(rng.random((n, n)) < 0.5, 1.0, -1.0)
        signs = np.triu(signs, 1)
        signs = signs + signs.T
    elif mode == "toward_zero":
        signs = -np.sign(mu)
    else:
        signs = np.where(mu >= 0, 1.0, -1.0)
    out = np.clip(mu + eps * signs, -1.0, 1.0)
    np.fill_diagonal(out, 1.0)
    return out


def random_tree(n, seed=None):
    """Uniformly random labeled tree via a Pruefer sequence."""
    rng = check_rng(seed)
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return TreeTopology(1, ())
    if n == 2:
        return TreeTopology(2, ((0, 1),))
    seq = rng.integers(0, n, size=n - 2)
    degree = np.ones(n, dtype=np.intp)
    np.add.at(degree, seq, 1)
    edges = []
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    for s in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, int(s)))
        degree[s] -= 1
        if degree[s] == 1:
            heapq.heappush(leaves, int(s))
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return TreeTopology(n, tuple(edges))


def random_model(n, seed=None, values=None, low=-1.0, high=1.0, random_signs=False):
    """Random tree model; theta drawn from `values` if given, else uniform in [low, high]."""
    rng = check_rng(seed)
    topo = random_tree(n, rng)
    if values is not None:
        theta = rng.choice(np.asarray(values, dtype=float), size=n - 1)
    else:
        theta = rng.uniform(low, high, size=n - 1)
    if random_signs:
        theta = theta * np.where(rng.random(n - 1) < 0.5, 1.0, -1.0)
    return TreeIsingModel(topo, theta)
