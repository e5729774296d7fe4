"""Linear discriminant analysis with shrinkage-regularized pooled covariance.

The pooled within-class covariance S is shrunk toward a scaled identity,

    S_g = (1 - g) * S + g * (tr(S) / D) * I,

which keeps the solve well posed when the feature dimension exceeds the
trial count.  Priors are uniform, so classification is equivalent to
nearest class mean under the pooled Mahalanobis metric when g = 0.
"""

from __future__ import annotations

import numpy as np


class LdaClassifier:
    def __init__(self, shrinkage: float):
        self.shrinkage = shrinkage
        self.means = None
        self.weights = None   # (D, K)
        self.offsets = None   # (K,)

    def fit(self, features: np.ndarray, labels: np.ndarray):
        x = np.asarray(features, dtype=np.float64)
        y = np.asarray(labels, dtype=np.int64)
        classes = np.unique(y)
        n, d = x.shape
        k = len(classes)

        means = np.stack([x[y == c].mean(axis=0) for c in classes])
        centered = x - means[np.searchsorted(classes, y)]
        denom = max(n - k, 1)
        cov = (centered.T @ centered) / denom
        g = self.shrinkage
        if g > 0.0:
            target = np.trace(cov) / d
            cov = (1.0 - g) * cov
            cov[np.diag_indices_from(cov)] += g * target

        self.means = means
        self.weights = np.linalg.solve(cov, means.T)
        self.offsets = -0.5 * np.einsum("kd,dk->k", means, self.weights)
        return self

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        return x @ self.weights + self.offsets

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.decision_function(features).argmax(axis=1)
