"""Single-hidden-layer perceptron: tanh units, softmax cross-entropy,
full-batch gradient descent."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..validation import require
from ._common import argmax_rows, prepare_fit, prepare_predict


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


class MultilayerPerceptron(BaseEstimator, ClassifierMixin):
    """d -> hidden tanh units -> K softmax, trained by full-batch GD.

    Weights start from seeded Gaussians scaled by 1/sqrt(fan_in), biases
    at zero; the loss is mean cross-entropy. `_loss_and_grad` is the exact
    function the training loop steps on, so external gradient checks
    exercise the real path.

    Inputs are standardized per feature inside fit (stored and reapplied
    at predict time), as the common toolbox implementations do; without
    it, tanh units saturate on features that sit far from zero.
    """

    def __init__(
        self,
        hidden_units: int = 16,
        learning_rate: float = 0.05,
        epochs: int = 500,
        seed: int = 0,
    ):
        self.hidden_units = hidden_units
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed

    # -- parameter packing -------------------------------------------------
    def _shapes(self, d, k):
        h = int(self.hidden_units)
        return [(d, h), (h,), (h, k), (k,)]

    def _unpack(self, flat, d, k):
        parts = []
        pos = 0
        for shape in self._shapes(d, k):
            size = int(np.prod(shape))
            parts.append(flat[pos : pos + size].reshape(shape))
            pos += size
        return parts

    def _init_params(self, d, k) -> np.ndarray:
        h = int(self.hidden_units)
        rng = np.random.default_rng(self.seed)
        w1 = rng.standard_normal((d, h)) / np.sqrt(d)
        b1 = np.zeros(h)
        w2 = rng.standard_normal((h, k)) / np.sqrt(h)
        b2 = np.zeros(k)
        return np.concatenate([w1.ravel(), b1, w2.ravel(), b2])

    def _loss_and_grad(self, flat, X, onehot):
        """Mean cross-entropy and its gradient w.r.t. the flat parameters."""
        n, d = X.shape
        k = onehot.shape[1]
        w1, b1, w2, b2 = self._unpack(flat, d, k)
        hidden = np.tanh(X @ w1 + b1)
        probs = _softmax(hidden @ w2 + b2)
        loss = -float(np.mean(np.sum(onehot * np.log(probs + 1e-300), axis=1)))
        dlogits = (probs - onehot) / n
        gw2 = hidden.T @ dlogits
        gb2 = dlogits.sum(axis=0)
        dhidden = (dlogits @ w2.T) * (1.0 - hidden**2)
        gw1 = X.T @ dhidden
        gb1 = dhidden.sum(axis=0)
        grad = np.concatenate([gw1.ravel(), gb1, gw2.ravel(), gb2])
        return loss, grad

    # -- estimator API -----------------------------------------------------
    def fit(self, X, y):
        require(int(self.hidden_units) >= 1, "hidden_units must be >= 1")
        require(float(self.learning_rate) > 0, "learning_rate must be positive")
        require(int(self.epochs) >= 1, "epochs must be >= 1")
        X, codes = prepare_fit(self, X, y)
        self.input_offset_ = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0  # constant features pass through unscaled
        self.input_scale_ = scale
        X = (X - self.input_offset_) / self.input_scale_
        k = len(self.classes_)
        onehot = np.zeros((X.shape[0], k))
        onehot[np.arange(X.shape[0]), codes] = 1.0
        flat = self._init_params(X.shape[1], k)
        lr = float(self.learning_rate)
        history = []
        for _ in range(int(self.epochs)):
            loss, grad = self._loss_and_grad(flat, X, onehot)
            history.append(loss)
            flat = flat - lr * grad
        self.params_ = flat
        self.loss_history_ = np.asarray(history)
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = prepare_predict(self, X)
        X = (X - self.input_offset_) / self.input_scale_
        w1, b1, w2, b2 = self._unpack(self.params_, X.shape[1], len(self.classes_))
        return _softmax(np.tanh(X @ w1 + b1) @ w2 + b2)

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        return self.classes_[argmax_rows(probs)]

    def to_dict(self) -> dict:
        return {
            "kind": "mlp",
            "params": {
                "hidden_units": int(self.hidden_units),
                "learning_rate": float(self.learning_rate),
                "epochs": int(self.epochs),
                "seed": int(self.seed),
            },
            "state": {
                "classes": self.classes_.tolist(),
                "flat_params": self.params_.tolist(),
                "n_features": int(self.n_features_in_),
                "input_offset": self.input_offset_.tolist(),
                "input_scale": self.input_scale_.tolist(),
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "MultilayerPerceptron":
        est = cls(**payload["params"])
        state = payload["state"]
        est.classes_ = np.asarray(state["classes"], dtype=str)
        est.params_ = np.asarray(state["flat_params"], dtype=float)
        est.n_features_in_ = int(state["n_features"])
        est.input_offset_ = np.asarray(state["input_offset"], dtype=float)
        est.input_scale_ = np.asarray(state["input_scale"], dtype=float)
        return est
