"""scikit-learn style estimators wrapping the tree learners."""

import warnings

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from chowliupp.chow_liu import chow_liu_model
from chowliupp.learner import (
    METRIC_NOISE_SCALE,
    RobustnessWarning,
    hoeffding_eps,
    learn_model,
)
from chowliupp.model import empirical_correlations, loctv2, pairwise_correlations, sample
from chowliupp.validation import check_correlation_matrix, check_eps, check_spins


class _TreeModelMixin:
    def _estimates(self, X):
        if self.precomputed:
            return check_correlation_matrix(X)
        return empirical_correlations(check_spins(X))

    def _check_width(self, mu):
        if mu.shape[0] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} variables, got {mu.shape[0]}")

    def correlations(self):
        """Exact pairwise correlations of the fitted model."""
        check_is_fitted(self, "model_")
        return pairwise_correlations(self.model_)

    def sample(self, m, seed=None):
        check_is_fitted(self, "model_")
        return sample(self.model_, m, seed)

    def score(self, X, y=None):
        """Negative loctv2 between the fitted model and the estimates from X."""
        check_is_fitted(self, "model_")
        mu = self._estimates(X)
        self._check_width(mu)
        return -loctv2(self.model_, mu)


class ChowLiuPlusPlus(_TreeModelMixin, BaseEstimator):
    """Robust tree Ising learner.

    Parameters
    ----------
    eps : float or None
        Accuracy of the correlation estimates. None uses a Hoeffding bound
        at confidence 1 - delta (sample input only).
    precomputed : bool
        If True, ``X`` is an n x n correlation matrix instead of +-1 samples.
    delta : float
        Failure probability for the default eps.
    noise_scale : float
        Multiple of eps used as the metric reconstruction tolerance.

    Attributes
    ----------
    model_ : TreeIsingModel
    eps_ : float
    n_features_in_ : int
    """

    def __init__(self, eps=None, precomputed=False, delta=0.05, noise_scale=METRIC_NOISE_SCALE):
        self.eps = eps
        self.precomputed = precomputed
        self.delta = delta
        self.noise_scale = noise_scale

    def fit(self, X, y=None):
        mu = self._estimates(X)
        if self.eps is not None:
            eps = check_eps(self.eps)
        elif self.precomputed:
            raise ValueError("eps is required for precomputed correlations")
        else:
            eps = hoeffding_eps(len(X), mu.shape[0], self.delta)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RobustnessWarning)
            self.model_ = learn_model(mu, eps, self.noise_scale)
        self.eps_ = eps
        self.n_features_in_ = mu.shape[0]
        return self


class ChowLiuTree(_TreeModelMixin, BaseEstimator):
    """Classical Chow-Liu tree with each edge set to its estimated correlation."""

    def __init__(self, precomputed=False):
        self.precomputed = precomputed

    def fit(self, X, y=None):
        mu = self._estimates(X)
        self.model_ = chow_liu_model(mu)
        self.n_features_in_ = mu.shape[0]
        return self
