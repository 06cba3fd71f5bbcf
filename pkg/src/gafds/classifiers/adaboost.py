"""Multi-class AdaBoost (SAMME) over weighted decision stumps."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..validation import require
from ._common import argmax_rows, prepare_fit, prepare_predict

_EPS = 1e-12


def _fit_stump(X, codes, weights, n_classes):
    """Weighted depth-1 stump minimizing weighted misclassification.

    Returns {"feature", "threshold", "left", "right"} predicting class
    codes on each side; ties keep the first candidate (feature order,
    ascending thresholds). Degenerate data (no distinct values anywhere)
    yields a single-leaf stump (feature None).
    """
    n = X.shape[0]
    total_by_class = np.zeros(n_classes)
    np.add.at(total_by_class, codes, weights)
    best = None
    best_err = np.inf
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        sv = X[order, f]
        sc = codes[order]
        sw = weights[order]
        wmat = np.zeros((n, n_classes))
        wmat[np.arange(n), sc] = sw
        cum = np.cumsum(wmat, axis=0)
        for p in range(n - 1):
            if sv[p] == sv[p + 1]:
                continue
            left = cum[p]
            right = total_by_class - left
            err = float(total_by_class.sum() - left.max() - right.max())
            if err < best_err - _EPS:
                best_err = err
                best = {
                    "feature": f,
                    "threshold": float((sv[p] + sv[p + 1]) / 2.0),
                    "left": int(np.argmax(left)),
                    "right": int(np.argmax(right)),
                }
    if best is None:
        best = {"feature": None, "threshold": 0.0,
                "left": int(np.argmax(total_by_class)), "right": int(np.argmax(total_by_class))}
    return best


def _stump_predict(stump, X) -> np.ndarray:
    if stump["feature"] is None:
        return np.full(X.shape[0], stump["left"], dtype=int)
    mask = X[:, stump["feature"]] <= stump["threshold"]
    return np.where(mask, stump["left"], stump["right"])


class AdaBoost(BaseEstimator, ClassifierMixin):
    """SAMME boosting: alpha_m = ln((1-err_m)/err_m) + ln(K-1).

    Rounds stop early on a perfect stump (kept with a large finite alpha)
    or when a stump cannot beat chance (err >= 1 - 1/K; the stump is
    dropped unless it would leave the ensemble empty).
    """

    def __init__(self, n_rounds: int = 50):
        self.n_rounds = n_rounds

    def fit(self, X, y):
        require(int(self.n_rounds) >= 1, "n_rounds must be >= 1")
        X, codes = prepare_fit(self, X, y)
        n = X.shape[0]
        k = len(self.classes_)
        weights = np.full(n, 1.0 / n)
        self.stumps_ = []
        self.alphas_ = []
        for _ in range(int(self.n_rounds)):
            stump = _fit_stump(X, codes, weights, k)
            pred = _stump_predict(stump, X)
            wrong = pred != codes
            err = float(np.sum(weights[wrong]))
            if err <= _EPS:
                self.stumps_.append(stump)
                self.alphas_.append(float(np.log((1.0 - _EPS) / _EPS) + np.log(k - 1)))
                break
            if err >= 1.0 - 1.0 / k:
                if not self.stumps_:
                    self.stumps_.append(stump)
                    self.alphas_.append(1.0)
                break
            alpha = float(np.log((1.0 - err) / err) + np.log(k - 1))
            self.stumps_.append(stump)
            self.alphas_.append(alpha)
            weights = weights * np.exp(alpha * wrong)
            weights /= weights.sum()
        return self

    def _scores(self, X, n_stumps=None) -> np.ndarray:
        scores = np.zeros((X.shape[0], len(self.classes_)))
        pairs = list(zip(self.stumps_, self.alphas_))[:n_stumps]
        for stump, alpha in pairs:
            pred = _stump_predict(stump, X)
            scores[np.arange(X.shape[0]), pred] += alpha
        return scores

    def predict(self, X) -> np.ndarray:
        X = prepare_predict(self, X)
        return self.classes_[argmax_rows(self._scores(X))]

    def staged_predict(self, X):
        """Yield predictions of the first m stumps for m = 1..len(stumps)."""
        X = prepare_predict(self, X)
        for m in range(1, len(self.stumps_) + 1):
            yield self.classes_[argmax_rows(self._scores(X, n_stumps=m))]

    def to_dict(self) -> dict:
        return {
            "kind": "adaboost",
            "params": {"n_rounds": int(self.n_rounds)},
            "state": {
                "classes": self.classes_.tolist(),
                "stumps": self.stumps_,
                "alphas": [float(a) for a in self.alphas_],
                "n_features": int(self.n_features_in_),
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "AdaBoost":
        est = cls(**payload["params"])
        state = payload["state"]
        est.classes_ = np.asarray(state["classes"], dtype=str)
        est.stumps_ = state["stumps"]
        est.alphas_ = [float(a) for a in state["alphas"]]
        est.n_features_in_ = int(state["n_features"])
        return est
