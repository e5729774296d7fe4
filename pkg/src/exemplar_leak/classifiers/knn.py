"""Brute-force k-nearest-neighbors on standardized flattened features.

Tie handling is fully specified so predictions are reproducible:
equidistant training points are ranked by training index, and vote ties
between classes resolve to the smallest label.
"""

from __future__ import annotations

import numpy as np


class KnnClassifier:
    def __init__(self, k: int):
        self.k = k
        self.train_x = None
        self.train_y = None
        self._sq_norms = None

    def fit(self, features: np.ndarray, labels: np.ndarray):
        self.train_x = np.asarray(features, dtype=np.float64)
        self.train_y = np.asarray(labels, dtype=np.int64)
        self._sq_norms = np.einsum("ij,ij->i", self.train_x, self.train_x)
        return self

    def predict(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        k = min(self.k, len(self.train_y))
        n_classes = int(self.train_y.max()) + 1

        # Squared distances via the expansion; only the ranking matters.
        d2 = (np.einsum("ij,ij->i", x, x)[:, None] + self._sq_norms[None, :]
              - 2.0 * x @ self.train_x.T)
        # Stable sort keeps equal distances in training-index order.
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        votes = np.zeros((len(x), n_classes), dtype=np.int64)
        rows = np.repeat(np.arange(len(x)), k)
        np.add.at(votes, (rows, self.train_y[order].ravel()), 1)
        # argmax returns the first maximum, i.e. the smallest label on ties.
        return votes.argmax(axis=1)
