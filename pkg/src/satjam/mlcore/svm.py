"""Linear SVM trained in the primal with hinge subgradients.

Objective: (1/2)||w||^2 + C * sum_i max(0, 1 - y_i (w.x_i + b)),
equivalently lambda/2 ||w||^2 + mean hinge with lambda = 1/(C*P).
Training is epoch-based per-sample subgradient descent with step
1/(lambda*t) at global step t and a fixed shuffle seed, so two fits on
the same data are bit-identical. The bias rides along as a regularized
constant feature, which keeps the 1/(lambda*t) schedule stable.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ..errors import DomainError, ShapeError, TrainingError


class LinearHingeSvm(BaseEstimator, ClassifierMixin):
    def __init__(self, C: float = 1.0, epochs: int = 200, seed: int = 0):
        self.C = C
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y):
        if self.C <= 0:
            raise DomainError(f"C must be > 0, got {self.C}")
        if self.epochs <= 0:
            raise DomainError(f"epochs must be > 0, got {self.epochs}")
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ShapeError(f"inconsistent shapes X={X.shape} y={y.shape}")
        self.classes_ = np.unique(y)
        if len(self.classes_) != 2:
            raise TrainingError(
                f"need exactly two classes, got {len(self.classes_)}")
        signs = np.where(y == self.classes_[1], 1.0, -1.0)
        n, d = X.shape
        aug = np.concatenate([X, np.ones((n, 1))], axis=1)
        lam = 1.0 / (self.C * n)
        wa = np.zeros(d + 1)
        rng = np.random.default_rng(self.seed)
        t = 0
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                t += 1
                eta = 1.0 / (lam * t)
                if signs[i] * (wa @ aug[i]) < 1.0:
                    wa = (1.0 - eta * lam) * wa + eta * signs[i] * aug[i]
                else:
                    wa = (1.0 - eta * lam) * wa
        self.coef_ = wa[:d]
        self.intercept_ = float(wa[d])
        return self

    def decision_function(self, X) -> np.ndarray:
        if not hasattr(self, "coef_"):
            raise NotFittedError("LinearHingeSvm is not fitted yet")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.coef_.shape[0]:
            raise ShapeError(
                f"expected (n, {self.coef_.shape[0]}) data, got shape {X.shape}")
        return X @ self.coef_ + self.intercept_

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return np.where(scores >= 0, self.classes_[1], self.classes_[0])
