"""scikit-learn style front end.

>>> est = GraphPerimeterEstimator(eps=0.05).fit(points, labels)
>>> est.perimeter_, est.confidence_interval(alpha=0.05)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import inference
from .constants import rate_f, surface_tension
from .geometry import Shape
from .neighbor_graph import graph_perimeter
from .sampling import LabeledCloud

__all__ = ["GraphPerimeterEstimator", "ShapeLabeler", "check_points"]


def check_points(X, d: int | None = None) -> np.ndarray:
    """Validate an (n, d) float array of points in the closed unit cube."""
    X = check_array(X, dtype=np.float64, ensure_min_samples=0)
    if d is not None and X.shape[1] != d:
        raise ValueError(f"expected {d} features, got {X.shape[1]}")
    if X.shape[1] < 2:
        raise ValueError("points need at least two coordinates")
    if X.size and (X.min() < 0.0 or X.max() > 1.0):
        raise ValueError("points must lie in the unit cube [0, 1]^d")
    return X


class ShapeLabeler(TransformerMixin, BaseEstimator):
    """Membership oracle as a transformer: points -> boolean labels."""

    def __init__(self, shape: Shape | None = None):
        self.shape = shape

    def fit(self, X=None, y=None):
        if self.shape is None:
            raise ValueError("ShapeLabeler needs a shape")
        self.n_features_in_ = self.shape.d
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_points(X, self.shape.d)
        return self.shape.contains(X)


class GraphPerimeterEstimator(BaseEstimator):
    """Estimate the relative perimeter of a set from labelled uniform samples.

    Parameters
    ----------
    eps : float
        Connection radius of the random geometric graph.
    alpha : float
        Default level for intervals and tests.

    Attributes
    ----------
    cut_ : int
        Number of eps-close pairs with different labels.
    gper_ : float
        Graph perimeter 2 * cut / (n (n-1) eps^(d+1)).
    perimeter_ : float
        gper_ / sigma_d.
    regime_ : str
        Dense, sparse or below_threshold for this (n, eps, d).
    """

    def __init__(self, eps: float = 0.05, alpha: float = 0.05):
        self.eps = eps
        self.alpha = alpha

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        X = check_points(X)
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        labels = np.asarray(y).astype(bool)
        cut = graph_perimeter(LabeledCloud(X, labels), self.eps)
        self.n_features_in_ = X.shape[1]
        self.n_samples_ = X.shape[0]
        self.cut_ = cut.edge_count
        self.gper_ = cut.gper
        self.perimeter_ = cut.gper / surface_tension(X.shape[1])
        self.regime_ = rate_f(X.shape[0], self.eps, X.shape[1]).regime
        self.estimate_ = inference.PerimeterEstimate(cut.gper, X.shape[0], self.eps, X.shape[1])
        return self

    def predict(self, X=None):
        """The perimeter estimate (independent of X; present for API symmetry)."""
        check_is_fitted(self, "perimeter_")
        return self.perimeter_

    def confidence_interval(self, alpha: float | None = None, per_for_width: float | None = None):
        check_is_fitted(self, "estimate_")
        return inference.confidence_interval(self.estimate_, self.alpha if alpha is None else alpha, per_for_width)

    def test(self, rho: float, alpha: float | None = None):
        check_is_fitted(self, "estimate_")
        return inference.hypothesis_test(self.estimate_, rho, self.alpha if alpha is None else alpha)

    test.__test__ = False
