"""Linear discriminant classifier with pooled within-class covariance."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..errors import InsufficientDataError
from ._common import argmax_rows, prepare_fit, prepare_predict


class LinearDiscriminant(BaseEstimator, ClassifierMixin):
    """Gaussian discriminant with one shared covariance across classes.

    delta_c(x) = x.w_c - 0.5 mu_c.w_c + ln(prior_c) with w_c solving
    Sigma w_c = mu_c; Sigma is the pooled within-class covariance
    (ddof = n - K) plus ridge * I for numerical safety.

    For two classes, weights_[1] - weights_[0] is parallel to
    Sigma^-1 (mu_1 - mu_0), the Fisher direction.
    """

    def __init__(self, ridge: float = 1e-6):
        self.ridge = ridge

    def fit(self, X, y):
        X, codes = prepare_fit(self, X, y)
        n, d = X.shape
        k = len(self.classes_)
        counts = np.bincount(codes, minlength=k)
        if counts.min() < 2:
            raise InsufficientDataError("each class needs at least 2 training rows")
        means = np.vstack([X[codes == ci].mean(axis=0) for ci in range(k)])
        scatter = np.zeros((d, d))
        for ci in range(k):
            centered = X[codes == ci] - means[ci]
            scatter += centered.T @ centered
        dof = n - k if n > k else n
        cov = scatter / dof + float(self.ridge) * np.eye(d)
        weights = np.linalg.solve(cov, means.T).T  # row c: Sigma^-1 mu_c
        priors = counts / n
        self.means_ = means
        self.covariance_ = cov
        self.weights_ = weights
        self.intercepts_ = -0.5 * np.sum(means * weights, axis=1) + np.log(priors)
        self.priors_ = priors
        return self

    def decision_scores(self, X) -> np.ndarray:
        X = prepare_predict(self, X)
        return X @ self.weights_.T + self.intercepts_

    def predict(self, X) -> np.ndarray:
        scores = self.decision_scores(X)
        return self.classes_[argmax_rows(scores)]

    def to_dict(self) -> dict:
        return {
            "kind": "lda",
            "params": {"ridge": float(self.ridge)},
            "state": {
                "classes": self.classes_.tolist(),
                "means": self.means_.tolist(),
                "covariance": self.covariance_.tolist(),
                "weights": self.weights_.tolist(),
                "intercepts": self.intercepts_.tolist(),
                "priors": self.priors_.tolist(),
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "LinearDiscriminant":
        est = cls(**payload["params"])
        state = payload["state"]
        est.classes_ = np.asarray(state["classes"], dtype=str)
        est.means_ = np.asarray(state["means"], dtype=float)
        est.covariance_ = np.asarray(state["covariance"], dtype=float)
        est.weights_ = np.asarray(state["weights"], dtype=float)
        est.intercepts_ = np.asarray(state["intercepts"], dtype=float)
        est.priors_ = np.asarray(state["priors"], dtype=float)
        est.n_features_in_ = est.means_.shape[1]
        return est
