"""Binary CART decision tree (Gini impurity, midpoint thresholds)."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..validation import require
from ._common import argmax_rows, prepare_fit, prepare_predict


def _gini(counts: np.ndarray, total: int) -> float:
    p = counts / total
    return 1.0 - float(np.sum(p * p))


def _best_split(X, codes, n_classes, min_leaf):
    """Scan all features for the weighted-Gini-minimizing midpoint split.

    Ties keep the first candidate found (features in order, thresholds
    ascending), so the tree is deterministic in the input ordering.
    Returns (feature, threshold, impurity) or None.
    """
    n = X.shape[0]
    best = None
    best_impurity = np.inf
    for f in range(X.shape[1]):
        values = X[:, f]
        order = np.argsort(values, kind="stable")
        sv = values[order]
        sc = codes[order]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), sc] = 1.0
        cum = np.cumsum(onehot, axis=0)
        total = cum[-1]
        # split after position p keeps rows 0..p on the left
        for p in range(n - 1):
            if sv[p] == sv[p + 1]:
                continue
            nl = p + 1
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            left = cum[p]
            right = total - left
            impurity = (nl * _gini(left, nl) + nr * _gini(right, nr)) / n
            if impurity < best_impurity:
                best_impurity = impurity
                best = (f, float((sv[p] + sv[p + 1]) / 2.0), impurity)
    return best


class DecisionTree(BaseEstimator, ClassifierMixin):
    """Greedy binary tree: rows with x[feature] <= threshold go left.

    Growth stops at max_depth, purity, or when no split leaves min_leaf
    rows on both sides. Leaves predict the majority class; count ties go
    to the lexicographically smallest label.
    """

    def __init__(self, max_depth: int = 10, min_leaf: int = 2):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def _grow(self, X, codes, depth):
        counts = np.bincount(codes, minlength=len(self.classes_))
        node = {"counts": counts.tolist()}
        if (
            depth >= int(self.max_depth)
            or len(codes) < 2 * int(self.min_leaf)
            or np.count_nonzero(counts) <= 1
        ):
            return node
        parent_impurity = _gini(counts, len(codes))
        split = _best_split(X, codes, len(self.classes_), int(self.min_leaf))
        if split is None or split[2] >= parent_impurity:
            return node
        f, threshold, _ = split
        mask = X[:, f] <= threshold
        node["feature"] = f
        node["threshold"] = threshold
        node["left"] = self._grow(X[mask], codes[mask], depth + 1)
        node["right"] = self._grow(X[~mask], codes[~mask], depth + 1)
        return node

    def fit(self, X, y):
        require(int(self.max_depth) >= 1, "max_depth must be >= 1")
        require(int(self.min_leaf) >= 1, "min_leaf must be >= 1")
        X, codes = prepare_fit(self, X, y)
        self.root_ = self._grow(X, codes, depth=0)
        return self

    def _leaf_counts(self, row) -> np.ndarray:
        node = self.root_
        while "feature" in node:
            node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
        return np.asarray(node["counts"], dtype=float)

    def predict(self, X) -> np.ndarray:
        X = prepare_predict(self, X)
        scores = np.vstack([self._leaf_counts(row) for row in X])
        return self.classes_[argmax_rows(scores)]

    def depth(self) -> int:
        def walk(node):
            if "feature" not in node:
                return 0
            return 1 + max(walk(node["left"]), walk(node["right"]))

        return walk(self.root_)

    def to_dict(self) -> dict:
        return {
            "kind": "dtree",
            "params": {"max_depth": int(self.max_depth), "min_leaf": int(self.min_leaf)},
            "state": {"classes": self.classes_.tolist(), "root": self.root_,
                      "n_features": int(self.n_features_in_)},
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DecisionTree":
        est = cls(**payload["params"])
        state = payload["state"]
        est.classes_ = np.asarray(state["classes"], dtype=str)
        est.root_ = state["root"]
        est.n_features_in_ = int(state["n_features"])
        return est
