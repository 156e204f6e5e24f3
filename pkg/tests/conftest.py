import numpy as np
from hypothesis import strategies as st

from chowliupp.metric import SteinerTree
from chowliupp.model import TreeIsingModel, random_tree


@st.composite
def tree_models(draw, min_n=1, max_n=8, low=-1.0, high=1.0):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    topo = random_tree(n, rng)
    theta = draw(
        st.lists(
            st.floats(low, high, allow_nan=False, allow_infinity=False),
            min_size=n - 1,
            max_size=n - 1,
        )
    )
    return TreeIsingModel(topo, theta)


def random_tree_metric(n, rng, max_len=1.0, min_len=0.0):
    from chowliupp.model import tree_distances

    topo = random_tree(n, rng)
    lengths = rng.uniform(min_len, max_len, size=n - 1)
    return topo, lengths, tree_distances(topo, lengths)


def noisy_upper_estimate(d, eps, L, rng):
    """d plus symmetric noise in [0, eps], infinite for pairs farther than 3L."""
    n = d.shape[0]
    noise = np.triu(rng.uniform(0, eps, size=(n, n)), 1)
    d_pre = d + noise + noise.T
    d_pre[d > 3 * L] = np.inf
    np.fill_diagonal(d_pre, 0.0)
    return d_pre


def random_steiner_tree(rng, n_labeled, n_steiner, zero_frac=0.2):
    total = n_labeled + n_steiner
    topo = random_tree(total, rng)
    lengths = rng.uniform(0, 1, size=total - 1)
    lengths[rng.random(total - 1) < zero_frac] = 0.0
    edges = tuple((u, v, float(w)) for (u, v), w in zip(topo.edges, lengths))
    return SteinerTree(n_labeled, total, edges, 0)


def is_ultrametric(e, tol=1e-9):
    n = e.shape[0]
    for w in range(n):
        if np.any(e > np.maximum(e[:, w : w + 1], e[w : w + 1, :]) + tol):
            return False
    return True


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
