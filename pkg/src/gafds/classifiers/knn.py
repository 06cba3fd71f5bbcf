"""k-nearest-neighbor classifier (Euclidean distance, majority vote)."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..validation import require
from ._common import argmax_rows, prepare_fit, prepare_predict


class KNearestNeighbors(BaseEstimator, ClassifierMixin):
    """Majority vote among the k nearest training rows.

    Distance ties are resolved by training-row order (stable sort); vote
    ties go to the lexicographically smallest label.
    """

    def __init__(self, n_neighbors: int = 5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        require(int(self.n_neighbors) >= 1, "n_neighbors must be >= 1")
        X, codes = prepare_fit(self, X, y)
        require(
            int(self.n_neighbors) <= X.shape[0],
            f"n_neighbors={self.n_neighbors} exceeds {X.shape[0]} training rows",
        )
        self._train_X = X
        self._train_codes = codes
        return self

    def _vote_counts(self, X) -> np.ndarray:
        k = int(self.n_neighbors)
        n_classes = len(self.classes_)
        counts = np.zeros((X.shape[0], n_classes), dtype=int)
        # squared distances suffice for ranking; chunk queries to cap memory
        chunk = max(1, int(2**22 // max(1, self._train_X.shape[0])))
        for start in range(0, X.shape[0], chunk):
            block = X[start : start + chunk]
            d2 = (
                np.sum(block**2, axis=1)[:, None]
                - 2.0 * block @ self._train_X.T
                + np.sum(self._train_X**2, axis=1)[None, :]
            )
            nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
            votes = self._train_codes[nearest]
            for ci in range(n_classes):
                counts[start : start + block.shape[0], ci] = np.sum(votes == ci, axis=1)
        return counts

    def predict(self, X) -> np.ndarray:
        X = prepare_predict(self, X)
        return self.classes_[argmax_rows(self._vote_counts(X))]

    def to_dict(self) -> dict:
        return {
            "kind": "knn",
            "params": {"n_neighbors": int(self.n_neighbors)},
            "state": {
                "classes": self.classes_.tolist(),
                "train_X": self._train_X.tolist(),
                "train_codes": self._train_codes.tolist(),
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "KNearestNeighbors":
        est = cls(**payload["params"])
        state = payload["state"]
        est.classes_ = np.asarray(state["classes"], dtype=str)
        est._train_X = np.asarray(state["train_X"], dtype=float)
        est._train_codes = np.asarray(state["train_codes"], dtype=int)
        est.n_features_in_ = est._train_X.shape[1]
        return est
