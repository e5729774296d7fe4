"""One-vs-rest linear SVM trained by mini-batch Pegasos subgradient descent.

All binary subproblems share the same deterministic shuffle and are
updated together as one (K, D+1) weight matrix; the bias lives in an
appended constant feature.  The step size is the Pegasos schedule
1 / (lambda * t) with t counting mini-batches.
"""

from __future__ import annotations

import numpy as np

from ..errors import NonFiniteLoss
from ..rngutil import substream


def hinge_objective(weights: np.ndarray, features: np.ndarray,
                    targets: np.ndarray, lam: float) -> float:
    """Summed one-vs-rest objective: lam/2 ||w||^2 + mean hinge, per class."""
    margins = targets * (features @ weights.T)
    hinge = np.maximum(0.0, 1.0 - margins).mean(axis=0)
    reg = 0.5 * lam * np.einsum("kd,kd->k", weights, weights)
    return float(np.sum(reg + hinge))


class SvmClassifier:
    def __init__(self, lam: float, epochs: int, batch_size: int, seed: int):
        self.lam = lam
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.weights = None  # (K, D+1), last column is the bias

    def fit(self, features: np.ndarray, labels: np.ndarray):
        x = np.asarray(features, dtype=np.float64)
        y = np.asarray(labels, dtype=np.int64)
        n, d = x.shape
        k = int(y.max()) + 1
        xb = np.hstack([x, np.ones((n, 1))])
        targets = np.where(y[:, None] == np.arange(k)[None, :], 1.0, -1.0)

        w = np.zeros((k, d + 1))
        t = 0
        for epoch in range(self.epochs):
            order = substream(self.seed, "svm-epoch", epoch).permutation(n)
            for start in range(0, n, self.batch_size):
                batch = order[start:start + self.batch_size]
                t += 1
                eta = 1.0 / (self.lam * t)
                margins = targets[batch] * (xb[batch] @ w.T)
                active = np.where(margins < 1.0, targets[batch], 0.0)
                grad = self.lam * w - (active.T @ xb[batch]) / len(batch)
                w = w - eta * grad
            if not np.all(np.isfinite(w)):
                raise NonFiniteLoss("SVM weights diverged to non-finite values")
        self.weights = w
        return self

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        xb = np.hstack([x, np.ones((len(x), 1))])
        return xb @ self.weights.T

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.decision_function(features).argmax(axis=1)
