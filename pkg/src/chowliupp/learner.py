"""Chow-Liu++: robust tree Ising learning from correlation estimates or samples."""

import math
import time
import warnings

import numpy as np

from chowliupp.chow_liu import learn_ferro_model
from chowliupp.metric import (
    UnreachableVertexError,
    evolutionary_estimate,
    tree_metric_reconstruction,
)
from chowliupp.model import (
    TreeIsingModel,
    TreeTopology,
    empirical_correlations,
    loctv2,
    pairwise_correlations,
)
from chowliupp.validation import check_correlation_matrix, check_eps

# blocks only contain edges with correlation above 1/20, so distances there are below log 20
BLOCK_EDGE_LENGTH = math.log(20.0)
# noise scale handed to the metric reconstruction, as a multiple of eps
METRIC_NOISE_SCALE = 0.0
# above this eps the worst-case guarantee no longer applies
GUARANTEE_EPS = 1e-5


class RobustnessWarning(UserWarning):
    """eps is outside the regime covered by the worst-case guarantee."""


def learn_lwr_bdd_model(mu_tilde, eps, noise_scale=METRIC_NOISE_SCALE):
    """Learn a ferromagnetic tree whose edges are all bounded away from zero.

    Estimates become upper-biased evolutionary distances, a tree metric is
    fitted to them and mapped back to correlations exp(-length).
    Vertices the distance graph cannot reach hang off vertex 0 with theta 0.
    """
    eps = check_eps(eps)
    mu = check_correlation_matrix(mu_tilde, nonnegative=True)
    n = mu.shape[0]
    if n == 1:
        return TreeIsingModel(TreeTopology(1, ()), [])
    d_pre = evolutionary_estimate(mu, eps)
    metric_eps = noise_scale * eps
    try:
        topo, lengths = tree_metric_reconstruction(d_pre, BLOCK_EDGE_LENGTH, metric_eps)
        return TreeIsingModel(topo, np.clip(np.exp(-lengths), 0.0, 1.0))
    except UnreachableVertexError as err:
        lost = set(err.vertices)
    kept = np.array([v for v in range(n) if v not in lost])
    sub_topo, lengths = tree_metric_reconstruction(
        d_pre[np.ix_(kept, kept)], BLOCK_EDGE_LENGTH, metric_eps
    )
    edges = [(int(kept[a]), int(kept[b])) for a, b in sub_topo.edges]
    theta = list(np.clip(np.exp(-lengths), 0.0, 1.0))
    for v in sorted(lost):
        edges.append((0, v))
        theta.append(0.0)
    return TreeIsingModel(TreeTopology(n, tuple(edges)), theta)


def learn_model(mu_tilde, eps, noise_scale=METRIC_NOISE_SCALE):
    """Chow-Liu++ on arbitrary-sign estimates.

    Learns a ferromagnetic model from |mu_tilde| and then gives every output
    edge the sign of its own estimate.
    """
    eps = check_eps(eps)
    mu = check_correlation_matrix(mu_tilde)
    if eps >= GUARANTEE_EPS:
        warnings.warn(
            f"eps={eps:g} is at or above {GUARANTEE_EPS:g}; the error bound is not guaranteed",
            RobustnessWarning,
            stacklevel=2,
        )

    def block_solver(sub_mu, sub_eps):
        return learn_lwr_bdd_model(sub_mu, sub_eps, noise_scale)

    ferro = learn_ferro_model(np.abs(mu), eps, block_solver)
    signs = np.array([np.sign(mu[u, v]) for u, v in ferro.edges])
    return TreeIsingModel(ferro.topology, signs * ferro.theta)


def learn_from_samples(samples, eps, k=2, noise_scale=METRIC_NOISE_SCALE):
    """Learn from +-1 samples; returns (model, report).

    If every true pairwise correlation is within eps of its sample estimate,
    loctv2(model, truth) <= loctv2(model, estimates) + eps / 2 and locTV_k is
    at most k 2^k times that; the report records both numbers.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    start = time.perf_counter()
    mu = empirical_correlations(samples)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RobustnessWarning)
        model = learn_model(mu, eps, noise_scale)
    radius = loctv2(pairwise_correlations(model), mu) + eps / 2
    factor = k * 2**k
    report = {
        "m": int(np.asarray(samples).shape[0]),
        "n": model.n,
        "eps": float(eps),
        "k": int(k),
        "loctv2_radius": float(radius),
        "loctv_k_factor": factor,
        "loctv_k_radius": float(factor * radius),
        "runtime_ms": (time.perf_counter() - start) * 1e3,
    }
    return model, report


def sign_of_path_product(model, u, v):
    """Sign of the product of theta along the tree path from u to v."""
    sign = 1.0
    for i in model.topology.path_edges(u, v):
        sign *= np.sign(model.theta[i])
    return int(sign)


def hoeffding_eps(m, n, delta=0.05):
    """Accuracy that all n(n-1)/2 sample correlations reach w.p. 1 - delta."""
    pairs = max(n * (n - 1) / 2, 1)
    return math.sqrt(2 * math.log(2 * pairs / delta) / m)
