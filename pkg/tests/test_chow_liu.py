import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chowliupp.chow_liu import (
    WEAK_EDGE_THRESHOLD,
    learn_ferro_model,
    max_spanning_tree,
    weak_edge_partition,
)
from chowliupp.experiments import gen_cl_failure_correlations
from chowliupp.learner import learn_lwr_bdd_model
from chowliupp.model import (
    TreeIsingModel,
    TreeTopology,
    pairwise_correlations,
    perturb,
    random_model,
    random_tree,
)


def brute_force_mst_weight(w):
    """Best total weight over all labeled trees via Pruefer sequences (n <= 6)."""
    import itertools

    n = w.shape[0]
    best = -np.inf
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for s in seq:
            degree[s] += 1
        total = 0.0
        for s in seq:
            leaf = min(v for v in range(n) if degree[v] == 1)
            total += w[leaf, s]
            degree[leaf] -= 1
            degree[s] -= 1
        u, v = [x for x in range(n) if degree[x] == 1]
        best = max(best, total + w[u, v])
    return best


class TestMaxSpanningTree:
    def test_single_vertex(self):
        assert max_spanning_tree(np.eye(1)).edges == ()

    def test_two_vertices(self):
        assert max_spanning_tree(np.array([[1, 0.3], [0.3, 1]])).edges == ((0, 1),)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            max_spanning_tree(np.zeros((0, 0)))

    def test_uses_absolute_values(self):
        w = np.array([[1, -0.9, 0.1], [-0.9, 1, 0.2], [0.1, 0.2, 1]])
        assert max_spanning_tree(w).edge_set == {(0, 1), (1, 2)}

    def test_tie_break_prefers_smaller_pair(self):
        w = np.ones((4, 4)) * 0.5
        assert max_spanning_tree(w).edge_set == {(0, 1), (0, 2), (0, 3)}

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 10_000))
    def test_optimal_weight(self, n, seed):
        rng = np.random.default_rng(seed)
        w = rng.uniform(-1, 1, size=(n, n))
        w = (w + w.T) / 2
        tree = max_spanning_tree(w)
        total = sum(abs(w[u, v]) for u, v in tree.edges)
        assert total == pytest.approx(brute_force_mst_weight(np.abs(w)))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 40), st.integers(0, 10_000))
    def test_recovers_tree_from_exact_correlations(self, n, seed):
        rng = np.random.default_rng(seed)
        topo = random_tree(n, rng)
        theta = rng.uniform(0.05, 0.95, size=n - 1) * rng.choice([-1, 1], size=n - 1)
        mu = pairwise_correlations(TreeIsingModel(topo, theta))
        assert max_spanning_tree(mu).edge_set == topo.edge_set

    @pytest.mark.parametrize("delta", [0.01, 0.05, 0.09])
    def test_failure_instance_contains_chains(self, delta):
        n = 30
        tree = max_spanning_tree(gen_cl_failure_correlations(delta, n))
        chains = {(i, i + 1) for i in range(n - 1)} | {(n + i, n + i + 1) for i in range(n - 1)}
        assert chains <= tree.edge_set


class TestPartition:
    def path_mu(self, values):
        n = len(values) + 1
        mu = np.eye(n)
        for i, v in enumerate(values):
            mu[i, i + 1] = mu[i + 1, i] = v
        return TreeTopology(n, tuple((i, i + 1) for i in range(n - 1))), mu

    def test_middle_edge_weak(self):
        topo, mu = self.path_mu([0.9, 0.05, 0.8])
        part = weak_edge_partition(topo, mu)
        assert part.blocks == ((0, 1), (2, 3))
        assert part.weak_edges == ((1, 2, 0.05),)

    def test_all_strong(self):
        topo, mu = self.path_mu([0.5, 0.6, 0.7])
        part = weak_edge_partition(topo, mu)
        assert part.blocks == ((0, 1, 2, 3),) and part.weak_edges == ()

    def test_all_weak(self):
        topo, mu = self.path_mu([0.1, 0.02, 0.03])
        part = weak_edge_partition(topo, mu)
        assert len(part.blocks) == 4 and len(part.weak_edges) == 3

    def test_threshold_read_only(self):
        topo, mu = self.path_mu([0.5])
        part = weak_edge_partition(topo, mu)
        assert part.threshold == WEAK_EDGE_THRESHOLD == 0.1
        with pytest.raises(AttributeError):
            part.threshold = 0.2

    def test_partition_json(self):
        topo, mu = self.path_mu([0.9, 0.05, 0.8])
        data = weak_edge_partition(topo, mu).to_dict()
        assert data == {"threshold": 0.1, "blocks": [[0, 1], [2, 3]], "weak_edges": [[1, 2, 0.05]]}

    @settings(max_examples=500, deadline=None)
    @given(st.integers(2, 60), st.integers(0, 2**31), st.sampled_from([0.0, 1e-6, 1e-5]))
    def test_blocks_are_true_subtrees(self, n, seed, eps):
        rng = np.random.default_rng(seed)
        truth = random_model(n, rng, values=[0.02, 0.08, 0.1, 0.12, 0.3, 0.6, 0.9])
        mu = np.clip(perturb(pairwise_correlations(truth), eps, seed=rng), 0, 1)
        part = weak_edge_partition(max_spanning_tree(mu), mu)

        flat = sorted(v for b in part.blocks for v in b)
        assert flat == list(range(n))
        assert len(part.weak_edges) == len(part.blocks) - 1
        block_of = part.block_of()
        # weak between blocks
        other = block_of[:, None] != block_of[None, :]
        assert np.all(mu[other] <= WEAK_EDGE_THRESHOLD)
        # each block induces a connected subtree of the true tree with strong edges
        theta = truth.edge_dict()
        for b in part.blocks:
            inside = [(u, v) for u, v in truth.edges if u in b and v in b]
            assert len(inside) == len(b) - 1
            assert all(theta[e] >= WEAK_EDGE_THRESHOLD - eps for e in inside)


def exact_block_solver(sub_mu, eps):
    """Independent block solver: Chow-Liu tree with exact edge correlations."""
    tree = max_spanning_tree(sub_mu)
    return TreeIsingModel(tree, [sub_mu[u, v] for u, v in tree.edges])


class TestLearnFerro:
    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="negative"):
            learn_ferro_model(np.array([[1, -0.2], [-0.2, 1]]), 0.0, exact_block_solver)

    def test_single_edge(self):
        mu = np.array([[1, 0.9], [0.9, 1]])
        model = learn_ferro_model(mu, 1e-6, learn_lwr_bdd_model)
        assert 0.89 <= model.theta[0] <= 0.91

    def test_weak_edge_copied(self):
        mu = np.eye(4)
        mu[0, 1] = mu[1, 0] = 0.8
        mu[2, 3] = mu[3, 2] = 0.7
        mu[1, 2] = mu[2, 1] = 0.05
        for u, v in [(0, 2), (0, 3), (1, 3)]:
            mu[u, v] = mu[v, u] = 0.01
        model = learn_ferro_model(mu, 0.0, exact_block_solver)
        assert model.edge_theta(1, 2) == 0.05

    def test_six_vertex_tree(self):
        truth = TreeIsingModel.from_edges(
            6, [(0, 1, 0.95), (1, 2, 0.5), (1, 3, 0.05), (3, 4, 0.95), (3, 5, 0.5)]
        )
        mu = pairwise_correlations(truth)
        model = learn_ferro_model(mu, 1e-6, learn_lwr_bdd_model)
        assert np.abs(pairwise_correlations(model) - mu).max() <= 1e-3

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 30), st.integers(0, 2**31))
    def test_output_spans_with_injected_oracle(self, n, seed):
        truth = random_model(n, seed, values=[0.03, 0.3, 0.7])
        mu = pairwise_correlations(truth)
        model = learn_ferro_model(mu, 0.0, exact_block_solver)
        assert model.n == n
        np.testing.assert_allclose(pairwise_correlations(model), mu, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 40), st.integers(0, 2**31))
    def test_attenuation_across_weak_edges(self, n, seed):
        truth = random_model(n, seed, values=[0.02, 0.05, 0.5, 0.9])
        mu = pairwise_correlations(truth)
        model = learn_ferro_model(mu, 1e-6, learn_lwr_bdd_model)
        mu_hat = pairwise_correlations(model)
        weak = {e for e, t in model.edge_dict().items() if t <= WEAK_EDGE_THRESHOLD}
        for u in range(n):
            for v in range(u + 1, n):
                crossings = sum(model.edges[i] in weak for i in model.topology.path_edges(u, v))
                assert abs(mu_hat[u, v]) <= WEAK_EDGE_THRESHOLD**crossings + 1e-12
