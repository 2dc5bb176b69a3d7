"""Principal components by SVD of the centered data matrix.

components_ rows are the top right singular vectors, orthonormal, with a
deterministic sign: the largest-magnitude entry of each component is
positive. Projection subtracts the training mean and dots with the
components, so the transform is fit on training data only.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ..errors import DomainError, ShapeError


class PrincipalComponents(BaseEstimator, TransformerMixin):
    def __init__(self, n_components: int = 45):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ShapeError(f"expected (n, d) data, got shape {X.shape}")
        n, d = X.shape
        k = self.n_components
        if not isinstance(k, (int, np.integer)) or k <= 0:
            raise DomainError(f"n_components must be a positive int, got {k!r}")
        if k > d:
            raise DomainError(f"n_components={k} exceeds feature count {d}")
        if n <= k:
            raise DomainError(f"need more than {k} samples to fit {k} components, got {n}")
        self.mean_ = X.mean(axis=0)
        _, s, vt = np.linalg.svd(X - self.mean_, full_matrices=False)
        components = vt[:k]
        # fix each component's sign so its largest-magnitude entry is positive
        anchors = np.argmax(np.abs(components), axis=1)
        signs = np.sign(components[np.arange(k), anchors])
        signs[signs == 0] = 1.0
        self.components_ = components * signs[:, None]
        self.singular_values_ = s[:k]
        self.explained_variance_ = (s[:k] ** 2) / (n - 1)
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "components_"):
            raise NotFittedError("PrincipalComponents is not fitted yet")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.mean_.shape[0]:
            raise ShapeError(
                f"expected (n, {self.mean_.shape[0]}) data, got shape {X.shape}")
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, Z) -> np.ndarray:
        if not hasattr(self, "components_"):
            raise NotFittedError("PrincipalComponents is not fitted yet")
        Z = np.asarray(Z, dtype=np.float64)
        return Z @ self.components_ + self.mean_
