"""Chow-Liu trees, the weak-edge block partition and block-wise ferromagnetic learning."""

from dataclasses import dataclass

import numpy as np

from chowliupp._graph import connected_components, dense_prim
from chowliupp.model import TreeIsingModel, TreeTopology
from chowliupp.validation import check_correlation_matrix, check_eps

# edges of the Chow-Liu tree at or below this estimate separate blocks
WEAK_EDGE_THRESHOLD = 0.1


@dataclass(frozen=True)
class VertexPartition:
    """Blocks left after cutting the weak Chow-Liu edges.

    weak_edges holds (u, v, mu_tilde_uv) triples.
    """

    blocks: tuple
    weak_edges: tuple

    @property
    def threshold(self):
        return WEAK_EDGE_THRESHOLD

    def block_of(self):
        n = sum(len(b) for b in self.blocks)
        out = np.empty(n, dtype=np.intp)
        for i, b in enumerate(self.blocks):
            out[list(b)] = i
        return out

    def to_dict(self):
        return {
            "threshold": WEAK_EDGE_THRESHOLD,
            "blocks": [list(map(int, b)) for b in self.blocks],
            "weak_edges": [[int(u), int(v), float(w)] for u, v, w in self.weak_edges],
        }


def max_spanning_tree(weights):
    """Chow-Liu tree: maximum spanning tree of |weights| by dense Prim.

    Equal weights are resolved towards the lexicographically smaller
    (min endpoint, max endpoint) pair.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"weights must be square, got shape {w.shape}")
    n = w.shape[0]
    if n < 1:
        raise ValueError("need at least one vertex")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    edges = dense_prim(np.abs(w), maximize=True)
    return TreeTopology(n, tuple(map(tuple, edges.tolist())))


def weak_edge_partition(tcl, mu_tilde):
    """Cut the tree edges with mu_tilde <= 1/10 and return the resulting blocks."""
    mu = np.asarray(mu_tilde, dtype=float)
    weak, strong = [], []
    for u, v in tcl.edges:
        if mu[u, v] <= WEAK_EDGE_THRESHOLD:
            weak.append((u, v, float(mu[u, v])))
        else:
            strong.append((u, v))
    blocks = connected_components(tcl.n, strong)
    return VertexPartition(tuple(tuple(b) for b in blocks), tuple(weak))


def learn_ferro_model(mu_tilde, eps, subsolver):
    """Learn a ferromagnetic tree model block by block.

    `subsolver(sub_mu, eps)` receives each block's principal submatrix and must
    return a TreeIsingModel on the block's local indices. Weak edges keep their
    raw estimate as the edge correlation.
    """
    eps = check_eps(eps)
    mu = check_correlation_matrix(mu_tilde, nonnegative=True)
    n = mu.shape[0]
    tcl = max_spanning_tree(mu)
    part = weak_edge_partition(tcl, mu)

    edges, theta = [], []
    for block in part.blocks:
        if len(block) < 2:
            continue
        idx = np.array(block)
        local = subsolver(mu[np.ix_(idx, idx)], eps)
        if local.n != len(block):
            raise ValueError(f"subsolver returned {local.n} vertices for a block of {len(block)}")
        for (a, b), t in zip(local.edges, local.theta):
            edges.append((int(idx[a]), int(idx[b])))
            theta.append(float(t))
    for u, v, w in part.weak_edges:
        edges.append((u, v))
        theta.append(w)
    return TreeIsingModel(TreeTopology(n, tuple(edges)), theta)


def chow_liu_model(mu_tilde):
    """Baseline: Chow-Liu tree with each edge's estimate used as its correlation."""
    mu = check_correlation_matrix(mu_tilde)
    tcl = max_spanning_tree(mu)
    return TreeIsingModel(tcl, [mu[u, v] for u, v in tcl.edges])
