"""Six from-scratch classifiers behind a common fit/predict protocol.

The registry maps short kinds to classes; `make_classifier` builds one
from (kind, params) and `model_to_dict`/`model_from_dict` give a JSON-safe
round-trip of a fitted model.
"""

from __future__ import annotations

import json
from pathlib import Path

from .adaboost import AdaBoost
from .knn import KNearestNeighbors
from .lda import LinearDiscriminant
from .mlp import MultilayerPerceptron
from .naive_bayes import GaussianNaiveBayes
from .tree import DecisionTree

CLASSIFIER_REGISTRY = {
    "knn": KNearestNeighbors,
    "lda": LinearDiscriminant,
    "dtree": DecisionTree,
    "mlp": MultilayerPerceptron,
    "adaboost": AdaBoost,
    "nb": GaussianNaiveBayes,
}

# canonical report order
DEFAULT_CLASSIFIER_KINDS = ("knn", "lda", "dtree", "mlp", "adaboost", "nb")


def make_classifier(kind: str, **params):
    """Instantiate a classifier by kind with keyword hyperparameters."""
    if kind not in CLASSIFIER_REGISTRY:
        raise ValueError(
            f"unknown classifier kind '{kind}'; choose from {sorted(CLASSIFIER_REGISTRY)}"
        )
    return CLASSIFIER_REGISTRY[kind](**params)


def model_to_dict(model) -> dict:
    return model.to_dict()


def model_from_dict(payload: dict):
    kind = payload.get("kind")
    if kind not in CLASSIFIER_REGISTRY:
        raise ValueError(f"unknown classifier kind '{kind}' in payload")
    return CLASSIFIER_REGISTRY[kind].from_dict(payload)


def save_model(model, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_model(path):
    with open(Path(path), "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


__all__ = [
    "AdaBoost",
    "KNearestNeighbors",
    "LinearDiscriminant",
    "MultilayerPerceptron",
    "GaussianNaiveBayes",
    "DecisionTree",
    "CLASSIFIER_REGISTRY",
    "DEFAULT_CLASSIFIER_KINDS",
    "make_classifier",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]
