"""scikit-learn style front ends.

``BornRuleTransformer`` turns rows of amplitudes into Born weights through
the conjugate-image construction; ``CollapseSampler`` takes rows of
probabilities and predicts the vertex each row collapses to.  Chained in a
``Pipeline`` they map amplitudes to simulated measurement outcomes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_amplitudes, check_int, check_probabilities
from .collapse_walk import Rounding, SimplexPoint, WalkConfig, discretize, walk
from .detector_imaging import born_weights, extract_image, form_bound_state
from .ensemble import run_rng
from .exceptions import ShapeError
from .state_algebra import PureState


class BornRuleTransformer(TransformerMixin, BaseEstimator):
    """Map amplitude vectors to the weights of their image bound states.

    Parameters
    ----------
    normalize : bool, default=False
        Rescale each row to unit norm instead of rejecting unnormalized rows.
    partner : {"S", "D"}, default="S"
        Which member of the system/detector pair is bound to the image.
    """

    def __init__(self, normalize=False, partner="S"):
        self.normalize = normalize
        self.partner = partner

    def fit(self, X, y=None):
        X = check_amplitudes(X, normalize=self.normalize)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_amplitudes(X, normalize=self.normalize)
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(f"expected {self.n_features_in_} amplitudes per row, got {X.shape[1]}")
        out = np.empty(X.shape, dtype=np.float64)
        for r, row in enumerate(X):
            psi = PureState(row)
            bound = form_bound_state(psi, extract_image(psi), partner=self.partner)
            out[r] = born_weights(bound).coords
        return out


class CollapseSampler(ClassifierMixin, BaseEstimator):
    """Predict measurement outcomes by running one collapse walk per row.

    Row ``r`` of a ``predict`` call uses the generator derived from
    ``(random_state, r)``, so predictions are reproducible row by row.

    Parameters
    ----------
    M : int, default=100
        Lattice resolution of the walk.
    rounding : {"largest_remainder", "stochastic"}
    max_steps : int or None
        Runaway guard; ``None`` means ``100 * M**2``.
    random_state : int, default=0
    """

    def __init__(self, M=100, rounding="largest_remainder", max_steps=None, random_state=0):
        self.M = M
        self.rounding = rounding
        self.max_steps = max_steps
        self.random_state = random_state

    def _walk_config(self) -> WalkConfig:
        return WalkConfig(M=self.M, max_steps=self.max_steps, rounding=Rounding(self.rounding))

    def fit(self, X, y=None):
        X = check_probabilities(X)
        check_int(self.random_state, "random_state", minimum=0)
        self.walk_config_ = self._walk_config()
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.arange(X.shape[1])
        return self

    def _check(self, X):
        check_is_fitted(self, "walk_config_")
        X = check_probabilities(X)
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(f"expected {self.n_features_in_} coordinates per row, got {X.shape[1]}")
        return X

    def predict(self, X):
        X = self._check(X)
        cfg = self.walk_config_
        out = np.empty(X.shape[0], dtype=np.int64)
        for r, row in enumerate(X):
            rng = run_rng(self.random_state, r)
            out[r] = walk(discretize(SimplexPoint(row), cfg, rng), rng, cfg.max_steps).vertex
        return out

    def predict_proba(self, X):
        """Exact absorption probabilities of the walk.

        With largest-remainder rounding these are the lattice coordinates
        ``counts / M``; with stochastic rounding they equal the input rows.
        """
        X = self._check(X)
        cfg = self.walk_config_
        if cfg.rounding is Rounding.STOCHASTIC:
            return X.copy()
        return np.array([np.array(discretize(SimplexPoint(row), cfg).counts) / cfg.M for row in X])
