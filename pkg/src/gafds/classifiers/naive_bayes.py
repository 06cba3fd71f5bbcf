"""Gaussian naive Bayes with a variance floor."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._common import argmax_rows, prepare_fit, prepare_predict


class GaussianNaiveBayes(BaseEstimator, ClassifierMixin):
    """Per-class independent Gaussians (ddof=0), log-prior weighted.

    Variances are floored at var_floor so constant features cannot produce
    infinities.
    """

    def __init__(self, var_floor: float = 1e-9):
        self.var_floor = var_floor

    def fit(self, X, y):
        X, codes = prepare_fit(self, X, y)
        k = len(self.classes_)
        counts = np.bincount(codes, minlength=k)
        self.theta_ = np.vstack([X[codes == ci].mean(axis=0) for ci in range(k)])
        self.var_ = np.vstack(
            [np.maximum(X[codes == ci].var(axis=0), float(self.var_floor)) for ci in range(k)]
        )
        self.priors_ = counts / X.shape[0]
        return self

    def log_joint(self, X) -> np.ndarray:
        X = prepare_predict(self, X)
        scores = np.empty((X.shape[0], len(self.classes_)))
        for ci in range(len(self.classes_)):
            diff = X - self.theta_[ci]
            scores[:, ci] = (
                np.log(self.priors_[ci])
                - 0.5 * np.sum(np.log(2.0 * np.pi * self.var_[ci]))
                - 0.5 * np.sum(diff**2 / self.var_[ci], axis=1)
            )
        return scores

    def predict_proba(self, X) -> np.ndarray:
        lj = self.log_joint(X)
        lj -= lj.max(axis=1, keepdims=True)
        p = np.exp(lj)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        scores = self.log_joint(X)
        return self.classes_[argmax_rows(scores)]

    def to_dict(self) -> dict:
        return {
            "kind": "nb",
            "params": {"var_floor": float(self.var_floor)},
            "state": {
                "classes": self.classes_.tolist(),
                "theta": self.theta_.tolist(),
                "var": self.var_.tolist(),
                "priors": self.priors_.tolist(),
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "GaussianNaiveBayes":
        est = cls(**payload["params"])
        state = payload["state"]
        est.classes_ = np.asarray(state["classes"], dtype=str)
        est.theta_ = np.asarray(state["theta"], dtype=float)
        est.var_ = np.asarray(state["var"], dtype=float)
        est.priors_ = np.asarray(state["priors"], dtype=float)
        est.n_features_in_ = est.theta_.shape[1]
        return est
