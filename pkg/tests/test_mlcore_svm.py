import numpy as np
import numpy.testing as npt
import pytest
from sklearn.exceptions import NotFittedError

from satjam.errors import DomainError, TrainingError
from satjam.mlcore import LinearHingeSvm


def two_clusters(rng, n_per=20, separation=2.0, spread=0.4):
    a = rng.normal(scale=spread, size=(n_per, 2)) + [-separation, 0.0]
    b = rng.normal(scale=spread, size=(n_per, 2)) + [separation, 0.0]
    X = np.vstack([a, b])
    y = np.array([0] * n_per + [1] * n_per)
    return X, y


def lattice_best_accuracy(X, signs):
    """Best 0-1 training accuracy of any separator on a coarse (w, b) lattice."""
    grid = np.linspace(-2.0, 2.0, 9)
    best = 0.0
    for w1 in grid:
        for w2 in grid:
            if w1 == 0.0 and w2 == 0.0:
                continue
            scores = X @ np.array([w1, w2])
            for b in grid:
                pred = np.where(scores + b >= 0, 1.0, -1.0)
                best = max(best, float(np.mean(pred == signs)))
    return best


class TestFit:
    def test_separable_clusters(self):
        X, y = two_clusters(np.random.default_rng(0))
        svm = LinearHingeSvm().fit(X, y)
        assert np.mean(svm.predict(X) == y) == 1.0
        # class 1 sits at positive x1, so the first weight must be positive
        assert svm.coef_[0] > 0

    def test_hyperplane_point_scores_zero(self):
        X, y = two_clusters(np.random.default_rng(1))
        svm = LinearHingeSvm().fit(X, y)
        w, b = svm.coef_, svm.intercept_
        on_plane = (-b / (w @ w)) * w
        npt.assert_allclose(svm.decision_function(on_plane[None, :]), 0.0, atol=1e-9)

    def test_close_to_lattice_oracle(self):
        # overlapping 20-point set, so the best separator leaves mistakes
        rng = np.random.default_rng(2)
        X, y = two_clusters(rng, n_per=10, separation=0.7, spread=0.8)
        signs = np.where(y == 1, 1.0, -1.0)
        svm = LinearHingeSvm().fit(X, y)
        acc = float(np.mean(svm.predict(X) == y))
        assert acc >= lattice_best_accuracy(X, signs) - 1.0 / len(y)

    def test_scale_invariant_labels_with_rescaled_c(self):
        rng = np.random.default_rng(3)
        X, y = two_clusters(rng)
        X_test, _ = two_clusters(np.random.default_rng(4))
        base = LinearHingeSvm(C=1.0).fit(X, y)
        for alpha in (0.5, 8.0):
            scaled = LinearHingeSvm(C=1.0 * alpha ** 2).fit(alpha * X, y)
            npt.assert_array_equal(scaled.predict(alpha * X), base.predict(X))
            npt.assert_array_equal(scaled.predict(alpha * X_test), base.predict(X_test))

    def test_determinism(self):
        X, y = two_clusters(np.random.default_rng(5))
        a = LinearHingeSvm().fit(X, y)
        b = LinearHingeSvm().fit(X, y)
        npt.assert_array_equal(a.coef_, b.coef_)
        assert a.intercept_ == b.intercept_

    def test_nonnumeric_class_labels(self):
        X, y = two_clusters(np.random.default_rng(6))
        names = np.where(y == 1, "jam", "clean")
        svm = LinearHingeSvm().fit(X, names)
        assert set(svm.predict(X)) <= {"jam", "clean"}
        assert np.mean(svm.predict(X) == names) == 1.0


class TestErrors:
    def test_single_class(self):
        with pytest.raises(TrainingError):
            LinearHingeSvm().fit(np.zeros((4, 2)), np.zeros(4))

    def test_three_classes(self):
        X = np.random.default_rng(7).normal(size=(6, 2))
        with pytest.raises(TrainingError):
            LinearHingeSvm().fit(X, np.array([0, 1, 2, 0, 1, 2]))

    def test_bad_c(self):
        with pytest.raises(DomainError):
            LinearHingeSvm(C=0.0).fit(np.zeros((4, 2)), np.array([0, 1, 0, 1]))

    def test_predict_before_fit(self):
        with pytest.raises(NotFittedError):
            LinearHingeSvm().predict(np.zeros((2, 2)))
