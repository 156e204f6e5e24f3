"""Brute-force references for validating the fast paths at small n.

Nothing here is on the learner's hot path.
"""

import itertools

import numpy as np

from chowliupp.model import MAX_EXACT_N, SPINS

MAX_MINIMAX_N = 64


def all_states(n):
    """Every spin configuration, rows ordered like a C-order (2,)*n table."""
    return np.array(list(itertools.product(SPINS, repeat=n)), dtype=np.int8).reshape(-1, n)


def brute_force_joint(model):
    """Normalized exp(sum_e atanh(theta_e) x_u x_v) over all 2^n states.

    Edges with |theta| = 1 act as hard constraints x_u x_v = sign(theta).
    Returns a (2,) * n table with index 0 meaning spin +1.
    """
    n = model.n
    if n > MAX_EXACT_N:
        raise ValueError(f"brute force joint needs n <= {MAX_EXACT_N}, got {n}")
    x = all_states(n).astype(float)
    log_w = np.zeros(x.shape[0])
    feasible = np.ones(x.shape[0], dtype=bool)
    for (u, v), t in zip(model.edges, model.theta):
        prod = x[:, u] * x[:, v]
        if abs(t) >= 1.0:
            feasible &= prod == np.sign(t)
        else:
            log_w += np.arctanh(t) * prod
    log_w = np.where(feasible, log_w, -np.inf)
    w = np.exp(log_w - log_w.max())
    return (w / w.sum()).reshape((2,) * n)


def joint_moments(table):
    """E[X_u X_v] matrix from a full joint table."""
    n = table.ndim
    x = all_states(n).astype(float)
    p = table.reshape(-1)
    return np.einsum("s,su,sv->uv", p, x, x)


def marginalize(table, subset):
    """Marginal of a full joint table onto `subset`, axes in subset order."""
    drop = tuple(i for i in range(table.ndim) if i not in subset)
    marg = table.sum(axis=drop)
    kept = sorted(subset)
    return np.transpose(marg, [kept.index(s) for s in subset])


def minimax_path_closure(a):
    """Minimax path distances by a Floyd-Warshall style (min, max) closure. O(n^3)."""
    e = np.array(a, dtype=float)
    n = e.shape[0]
    if n > MAX_MINIMAX_N:
        raise ValueError(f"minimax closure needs n <= {MAX_MINIMAX_N}, got {n}")
    np.fill_diagonal(e, 0.0)
    for w in range(n):
        e = np.minimum(e, np.maximum(e[:, w : w + 1], e[w : w + 1, :]))
    return e


def minimax_path_exhaustive(a):
    """Minimax over every simple path; only for n <= 8."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n > 8:
        raise ValueError("exhaustive path enumeration needs n <= 8")
    e = np.zeros((n, n))
    for u in range(n):
        for v in range(u + 1, n):
            others = [w for w in range(n) if w not in (u, v)]
            best = np.inf
            for r in range(len(others) + 1):
                for mid in itertools.permutations(others, r):
                    path = (u, *mid, v)
                    best = min(best, max(a[path[i], path[i + 1]] for i in range(len(path) - 1)))
            e[u, v] = e[v, u] = best
    return e


def exhaustive_loctv2_certificate(p, q):
    """Largest pairwise TV by enumerating pair marginals directly; returns (value, pair)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {q.shape}")
    n = p.shape[0]
    best, pair = 0.0, (0, 1) if n > 1 else (0, 0)
    for u in range(n):
        for v in range(u + 1, n):
            tv = 0.0
            for xu in (1, -1):
                for xv in (1, -1):
                    tv += abs((1 + xu * xv * p[u, v]) / 4 - (1 + xu * xv * q[u, v]) / 4)
            tv /= 2
            if tv > best:
                best, pair = tv, (u, v)
    return best, pair


def tree_path_distances(n, weighted_edges):
    """All-pairs tree distances by a DFS from every vertex."""
    adj = [[] for _ in range(n)]
    for a, b, w in weighted_edges:
        adj[a].append((b, w))
        adj[b].append((a, w))
    d = np.full((n, n), np.inf)
    for s in range(n):
        d[s, s] = 0.0
        stack = [s]
        while stack:
            u = stack.pop()
            for v, w in adj[u]:
                if not np.isfinite(d[s, v]):
                    d[s, v] = d[s, u] + w
                    stack.append(v)
    return d
