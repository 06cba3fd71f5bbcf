"""Class-separation distances, min-max normalization, stratified
cross-validation, detection rates, and the tabular evaluation report."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin, clone

from .dataset import FoldPlan, make_folds
from .errors import DataFormatError, InsufficientDataError
from .features import FeatureMatrix
from .validation import (
    check_feature_matrix,
    check_is_fitted,
    check_labels,
    require,
)


# ---------------------------------------------------------------------------
# Distances and the ratio table
# ---------------------------------------------------------------------------

def _cross_mean_squared_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared Euclidean distance over all ordered pairs of rows
    (including coincident ones when a row appears in both sets)."""
    d2 = (
        np.sum(a**2, axis=1)[:, None]
        - 2.0 * a @ b.T
        + np.sum(b**2, axis=1)[None, :]
    )
    return float(np.mean(d2))


def intra_class_distance(vectors) -> float:
    """Mean squared distance over all n^2 ordered row pairs (i = j included)."""
    v = check_feature_matrix(np.asarray(vectors, dtype=float), name="vectors")
    require(v.shape[0] >= 2, "need at least 2 vectors", InsufficientDataError)
    return _cross_mean_squared_distance(v, v)


def inter_class_distance(a, b) -> float:
    """Mean squared distance over all n*m cross pairs."""
    a = check_feature_matrix(np.asarray(a, dtype=float), name="a")
    b = check_feature_matrix(np.asarray(b, dtype=float), name="b")
    require(a.shape[1] == b.shape[1], "vector sets must share dimensionality")
    return _cross_mean_squared_distance(a, b)


@dataclass(frozen=True)
class DistanceRatioTable:
    """ratios[i][j] = inter(class_i, class_j) / intra(class_i).

    The diagonal is exactly 1 because both sides of the division are the
    same number (intra is computed by the cross-pair routine on (c, c)).
    """

    class_labels: tuple[str, ...]
    ratios: np.ndarray
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        k = len(self.class_labels)
        arr = np.asarray(self.ratios, dtype=float)
        require(arr.shape == (k, k), "ratios must be K x K")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "ratios", arr)

    def ratio(self, from_label: str, to_label: str) -> float:
        i = self.class_labels.index(from_label)
        j = self.class_labels.index(to_label)
        return float(self.ratios[i, j])


def distance_ratio_table(features: FeatureMatrix, names=None) -> DistanceRatioTable:
    """Pairwise separation ratios over the given feature columns.

    Every class needs >= 2 records and nonzero intra-class spread.
    """
    sub = features.select(names) if names is not None else features
    labels = sub.label_array()
    classes = sub.class_labels()
    groups = {}
    for cls in classes:
        rows = sub.values[labels == cls]
        require(rows.shape[0] >= 2, f"class '{cls}' needs >= 2 records",
                InsufficientDataError)
        groups[cls] = rows
    intra = {cls: _cross_mean_squared_distance(groups[cls], groups[cls]) for cls in classes}
    for cls, v in intra.items():
        require(v > 0, f"class '{cls}' has zero intra-class spread")
    k = len(classes)
    ratios = np.empty((k, k))
    for i, ci in enumerate(classes):
        for j, cj in enumerate(classes):
            ratios[i, j] = _cross_mean_squared_distance(groups[ci], groups[cj]) / intra[ci]
    return DistanceRatioTable(class_labels=tuple(classes), ratios=ratios,
                              feature_names=tuple(sub.names))


def export_ratio_table_csv(table: DistanceRatioTable, path) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", *table.class_labels])
        for i, cls in enumerate(table.class_labels):
            writer.writerow([cls, *[repr(float(v)) for v in table.ratios[i]]])


# ---------------------------------------------------------------------------
# Min-max normalization
# ---------------------------------------------------------------------------

def minmax_fit(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    values = check_feature_matrix(values)
    return values.min(axis=0), values.max(axis=0)


def minmax_apply(values: np.ndarray, mins: np.ndarray, maxs: np.ndarray) -> np.ndarray:
    """(x - min) / (max - min); constant columns map to 0.5; outputs are
    intentionally not clamped, so unseen rows can leave [0, 1]."""
    values = check_feature_matrix(values)
    span = maxs - mins
    out = np.empty_like(values, dtype=float)
    constant = span == 0
    if np.any(~constant):
        out[:, ~constant] = (values[:, ~constant] - mins[~constant]) / span[~constant]
    if np.any(constant):
        out[:, constant] = 0.5
    return out


class MinMaxNormalizer(BaseEstimator, TransformerMixin):
    """Column-wise min-max scaler fitted on training rows only."""

    def fit(self, X, y=None):
        self.mins_, self.maxs_ = minmax_fit(np.asarray(X, dtype=float))
        self.n_features_in_ = len(self.mins_)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "mins_")
        X = check_feature_matrix(np.asarray(X, dtype=float))
        require(X.shape[1] == self.n_features_in_,
                f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return minmax_apply(X, self.mins_, self.maxs_)


# ---------------------------------------------------------------------------
# Confusion, rates, cross-validation
# ---------------------------------------------------------------------------

def pooled_confusion(true_labels, predicted_labels, classes) -> np.ndarray:
    """Count matrix with rows = true class, columns = predicted class."""
    classes = [str(c) for c in classes]
    index = {c: i for i, c in enumerate(classes)}
    true_labels = check_labels(true_labels)
    predicted_labels = check_labels(predicted_labels, n_rows=len(true_labels))
    confusion = np.zeros((len(classes), len(classes)), dtype=int)
    for t, p in zip(true_labels, predicted_labels):
        if t not in index or p not in index:
            raise ValueError(f"label outside the class set: true={t!r} pred={p!r}")
        confusion[index[t], index[p]] += 1
    return confusion


def fpr_tpr(confusion, classes=None, positive_label: str | None = None):
    """(false-positive rate, true-positive rate) from a confusion matrix.

    Two classes: the standard binary rates for the positive class, which
    defaults to the lexicographically largest label. Three or more:
    macro averages of one-vs-rest rates; classes with zero test instances
    are excluded with a warning.
    """
    confusion = np.asarray(confusion, dtype=float)
    require(confusion.ndim == 2 and confusion.shape[0] == confusion.shape[1],
            "confusion must be square")
    k = confusion.shape[0]
    require(k >= 2, "need at least 2 classes")
    if classes is None:
        classes = [str(i) for i in range(k)]
    classes = [str(c) for c in classes]
    require(len(classes) == k, "one class per confusion row")
    total = confusion.sum()
    require(total > 0, "empty confusion matrix")

    def one_vs_rest(ci: int):
        tp = confusion[ci, ci]
        fn = confusion[ci].sum() - tp
        fp = confusion[:, ci].sum() - tp
        tn = total - tp - fn - fp
        pos = tp + fn
        neg = fp + tn
        tpr = tp / pos if pos > 0 else None
        fpr = fp / neg if neg > 0 else None
        return fpr, tpr, pos

    if k == 2:
        if positive_label is None:
            positive_label = max(classes)
        require(positive_label in classes, f"unknown positive label '{positive_label}'")
        ci = classes.index(positive_label)
        fpr, tpr, pos = one_vs_rest(ci)
        if pos == 0:
            warnings.warn(
                f"positive class '{positive_label}' has zero test instances; "
                "falling back to the other class's view",
                stacklevel=2,
            )
            fpr, tpr, _ = one_vs_rest(1 - ci)
        # a view with no negatives has no false positives to rate
        if fpr is None:
            fpr = 0.0
        return float(fpr), float(tpr)

    fprs, tprs = [], []
    for ci, cls in enumerate(classes):
        fpr, tpr, pos = one_vs_rest(ci)
        if pos == 0:
            warnings.warn(f"class '{cls}' has zero test instances; excluded from macro rates",
                          stacklevel=2)
            continue
        fprs.append(fpr)
        tprs.append(tpr)
    require(len(tprs) > 0, "no class has test instances")
    return float(np.mean(fprs)), float(np.mean(tprs))


@dataclass(frozen=True)
class CrossValidationResult:
    """Per-fold accuracies, their mean, and the pooled confusion matrix."""

    k: int
    fold_accuracies: tuple[float, ...]
    mean_accuracy: float
    classes: tuple[str, ...]
    confusion: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.confusion, dtype=int)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "confusion", arr)

    def rates(self, positive_label: str | None = None) -> tuple[float, float]:
        return fpr_tpr(self.confusion, self.classes, positive_label=positive_label)


def cross_validate(
    estimator,
    features,
    labels=None,
    folds: FoldPlan | int = 5,
    seed: int = 0,
    normalize: bool = False,
) -> CrossValidationResult:
    """Stratified k-fold accuracy of a cloned estimator.

    Accuracy is averaged over folds (each fold's accuracy weighted
    equally); confusions are pooled across folds. With normalize=True a
    min-max scaler is fitted on each fold's training rows only.
    """
    if isinstance(features, FeatureMatrix):
        values = features.values
        labels = features.label_array() if labels is None else labels
    else:
        values = check_feature_matrix(np.asarray(features, dtype=float))
        require(labels is not None, "labels are required with a plain matrix")
    labels = check_labels(labels, n_rows=values.shape[0])
    plan = folds if isinstance(folds, FoldPlan) else make_folds(labels, folds, seed)
    require(len(plan) == len(labels), "fold plan does not match the rows")
    classes = sorted(set(labels.tolist()))
    accuracies = []
    confusion = np.zeros((len(classes), len(classes)), dtype=int)
    for fold in range(plan.k):
        train = plan.train_indices(fold)
        test = plan.test_indices(fold)
        x_train, x_test = values[train], values[test]
        if normalize:
            scaler = MinMaxNormalizer().fit(x_train)
            x_train = scaler.transform(x_train)
            x_test = scaler.transform(x_test)
        model = clone(estimator).fit(x_train, labels[train])
        pred = model.predict(x_test)
        accuracies.append(float(np.mean(pred == labels[test])))
        confusion += pooled_confusion(labels[test], pred, classes)
    return CrossValidationResult(
        k=plan.k,
        fold_accuracies=tuple(accuracies),
        mean_accuracy=float(np.mean(accuracies)),
        classes=tuple(classes),
        confusion=confusion,
    )


# ---------------------------------------------------------------------------
# Evaluation report
# ---------------------------------------------------------------------------

@dataclass
class EvaluationReport:
    """Mean CV accuracy per (classifier kind, fold count) plus details."""

    task: str
    feature_names: tuple[str, ...]
    fold_counts: tuple[int, ...]
    classifier_kinds: tuple[str, ...]
    seed: int
    results: dict = field(default_factory=dict)  # kind -> {k -> CrossValidationResult}

    def add(self, kind: str, result: CrossValidationResult) -> None:
        self.results.setdefault(kind, {})[result.k] = result

    def accuracy(self, kind: str, k: int) -> float:
        return self.results[kind][k].mean_accuracy

    def to_dict(self) -> dict:
        payload = {
            "task": self.task,
            "feature_names": list(self.feature_names),
            "fold_counts": list(self.fold_counts),
            "classifier_kinds": list(self.classifier_kinds),
            "seed": int(self.seed),
            "results": {},
        }
        for kind, by_k in sorted(self.results.items()):
            payload["results"][kind] = {}
            for k, res in sorted(by_k.items()):
                fpr, tpr = res.rates()
                payload["results"][kind][str(k)] = {
                    "mean_accuracy": res.mean_accuracy,
                    "fold_accuracies": list(res.fold_accuracies),
                    "classes": list(res.classes),
                    "confusion": res.confusion.tolist(),
                    "fpr": fpr,
                    "tpr": tpr,
                }
        return payload


def export_report_csv(report: EvaluationReport, path) -> None:
    """Rows = classifier kinds, columns = fold counts, cells = mean accuracy."""
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["classifier", *[f"{k}-fold" for k in report.fold_counts]])
        for kind in report.classifier_kinds:
            row = [kind]
            for k in report.fold_counts:
                row.append(repr(float(report.accuracy(kind, k))))
            writer.writerow(row)


def export_report_json(report: EvaluationReport, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def import_report_csv(path) -> dict:
    """Read back a report CSV as {kind: {k: accuracy}}."""
    path = Path(path)
    out: dict[str, dict[int, float]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "classifier":
            raise DataFormatError(f"{path}: expected a classifier/fold header")
        try:
            ks = [int(h.removesuffix("-fold")) for h in header[1:]]
        except ValueError:
            raise DataFormatError(f"{path}: bad fold columns {header[1:]}") from None
        for row in reader:
            if not row:
                continue
            out[row[0]] = {k: float(v) for k, v in zip(ks, row[1:])}
    return out
