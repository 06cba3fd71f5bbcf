"""Shared label handling for the from-scratch classifiers.

Classes are kept lexicographically sorted and score ties are broken by
taking the first maximum, so the lexicographically smallest label wins.
"""

from __future__ import annotations

import numpy as np

from ..validation import check_classification_inputs, check_feature_matrix, check_is_fitted


def encode_labels(y) -> tuple[np.ndarray, np.ndarray]:
    """Return (sorted unique classes, integer codes)."""
    classes, codes = np.unique(np.asarray(y, dtype=str), return_inverse=True)
    return classes, codes


def prepare_fit(estimator, X, y):
    """Validate a training pair and stash classes_/n_features_in_."""
    X, y = check_classification_inputs(X, y)
    classes, codes = encode_labels(y)
    estimator.classes_ = classes
    estimator.n_features_in_ = X.shape[1]
    return X, codes


def prepare_predict(estimator, X) -> np.ndarray:
    """Validate prediction input against the fitted feature arity."""
    check_is_fitted(estimator, "classes_")
    X = check_feature_matrix(X)
    if X.shape[1] != estimator.n_features_in_:
        raise ValueError(
            f"expected {estimator.n_features_in_} features, got {X.shape[1]}"
        )
    return X


def argmax_rows(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax; np.argmax takes the first maximum on exact ties,
    which maps to the lexicographically smallest class."""
    return np.argmax(scores, axis=1)
