"""Robust learning of tree-structured Ising models (Chow-Liu++)."""

from chowliupp.chow_liu import (
    VertexPartition,
    chow_liu_model,
    learn_ferro_model,
    max_spanning_tree,
    weak_edge_partition,
)
from chowliupp.estimator import ChowLiuPlusPlus, ChowLiuTree
from chowliupp.learner import (
    learn_from_samples,
    learn_lwr_bdd_model,
    learn_model,
    sign_of_path_product,
)
from chowliupp.metric import (
    CentroidMetric,
    Dendrogram,
    SteinerTree,
    UnreachableVertexError,
    additive_metric_reconstruction,
    c_radius,
    desteinerize,
    evolutionary_estimate,
    shortest_paths_from_root,
    subdominant_ultrametric,
    tree_metric_reconstruction,
    ultra_minus_centroid,
)
from chowliupp.model import (
    TreeIsingModel,
    TreeTopology,
    empirical_correlations,
    loctv2,
    loctv_k_exact,
    marginal_joint,
    pairwise_correlations,
    perturb,
    random_model,
    random_tree,
    sample,
)

__version__ = "0.1.0"
