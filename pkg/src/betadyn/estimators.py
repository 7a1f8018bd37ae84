"""scikit-learn wrapper: parameter pairs in, normality defects out."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .experiments import random_point
from .interval_maps import Params
from .measures import parry_density
from .normality import density_integrals, normality_defect, suite_by_name


class NormalityDefectTransformer(TransformerMixin, BaseEstimator):
    """Map rows ``(alpha, beta)`` to ``(defect of a random point, defect of 0)``.

    Floats are read exactly (as dyadic rationals).  The random point of row
    ``i`` depends only on ``(random_state, i)``.
    """

    def __init__(self, n=10_000, suite="default", n_terms=80, random_state=0):
        self.n = n
        self.suite = suite
        self.n_terms = n_terms
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError("expected two columns: alpha, beta")
        self.suite_ = suite_by_name(self.suite)
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "suite_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError("expected two columns: alpha, beta")
        out = np.empty((X.shape[0], 2))
        for i, (a, b) in enumerate(X):
            p = Params(Fraction(a), Fraction(b))
            d = parry_density(p, self.n_terms)
            ints = density_integrals(self.suite_, d)
            x0 = random_point(self.random_state, i, self.n, p.beta)
            out[i, 0] = normality_defect(p, x0, self.suite_, self.n, d, integrals=ints)
            out[i, 1] = normality_defect(p, 0, self.suite_, self.n, d, integrals=ints)
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(["defect_random", "defect_zero"], dtype=object)
