"""Input validation helpers shared by functional APIs and estimators."""

from __future__ import annotations

import numpy as np

from .errors import InsufficientDataError, NotFittedError


def as_float_array(values, name: str = "values", ndim: int | None = None) -> np.ndarray:
    """Coerce to a float ndarray and reject non-finite entries.

    Parameters
    ----------
    values : array-like
        Input data.
    name : str
        Name used in error messages.
    ndim : int, optional
        Required dimensionality; mismatches raise ValueError.
    """
    arr = np.asarray(values, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_signal_matrix(X, name: str = "X") -> np.ndarray:
    """Validate a 2-D (n_records, n_samples) float matrix with >= 2 columns."""
    X = as_float_array(X, name=name, ndim=2)
    if X.shape[0] == 0:
        raise InsufficientDataError(f"{name} has no rows")
    if X.shape[1] < 2:
        raise InsufficientDataError(f"{name} rows need at least 2 samples")
    return X


def check_feature_matrix(X, name: str = "X") -> np.ndarray:
    """Validate a 2-D (n_records, n_features) float matrix."""
    X = as_float_array(X, name=name, ndim=2)
    if X.shape[0] == 0:
        raise InsufficientDataError(f"{name} has no rows")
    if X.shape[1] == 0:
        raise InsufficientDataError(f"{name} has no columns")
    return X


def check_labels(y, n_rows: int | None = None) -> np.ndarray:
    """Coerce labels to a 1-D string array, optionally checking row count."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"labels must be 1-dimensional, got shape {y.shape}")
    y = y.astype(str)
    if n_rows is not None and len(y) != n_rows:
        raise ValueError(f"got {len(y)} labels for {n_rows} rows")
    return y


def check_classification_inputs(X, y):
    """Validate a (features, labels) training pair with >= 2 classes."""
    X = check_feature_matrix(X)
    y = check_labels(y, n_rows=X.shape[0])
    if len(np.unique(y)) < 2:
        raise InsufficientDataError("training data must contain at least 2 classes")
    return X, y


def check_is_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted; call fit first"
        )


def require(condition: bool, message: str, exc=ValueError) -> None:
    """Raise exc(message) when condition is false."""
    if not condition:
        raise exc(message)
