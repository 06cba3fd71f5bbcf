"""Named feature matrices with labels and record ids, plus CSV round-trips."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .validation import check_feature_matrix, check_labels, require


@dataclass(frozen=True)
class FeatureMatrix:
    """records x named features, with a class label per row.

    Invariants: values finite, one name per column (unique), one label and
    one unique record id per row.
    """

    names: tuple[str, ...]
    values: np.ndarray
    labels: tuple[str, ...]
    record_ids: tuple[str, ...]

    def __post_init__(self):
        values = check_feature_matrix(self.values, name="values")
        names = tuple(str(n) for n in self.names)
        require(len(names) == values.shape[1], "one name per column")
        require(len(set(names)) == len(names), "feature names must be unique")
        labels = tuple(str(x) for x in self.labels)
        ids = tuple(str(x) for x in self.record_ids)
        require(len(labels) == values.shape[0], "one label per row")
        require(len(ids) == values.shape[0], "one record id per row")
        require(len(set(ids)) == len(ids), "record_ids must be unique")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "record_ids", ids)

    @property
    def n_records(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def label_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=object)

    def class_labels(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels)))

    def column(self, name: str) -> np.ndarray:
        if name not in self.names:
            raise KeyError(f"unknown feature name: {name!r}")
        return self.values[:, self.names.index(name)]

    def select(self, names) -> "FeatureMatrix":
        """Project onto the given feature names (in the given order)."""
        names = [str(n) for n in names]
        missing = [n for n in names if n not in self.names]
        if missing:
            raise KeyError(f"unknown feature names: {missing}")
        cols = [self.names.index(n) for n in names]
        return FeatureMatrix(
            names=tuple(names),
            values=self.values[:, cols],
            labels=self.labels,
            record_ids=self.record_ids,
        )

    def select_mask(self, mask) -> "FeatureMatrix":
        mask = np.asarray(mask, dtype=bool)
        require(mask.shape == (self.n_features,), "mask length must equal n_features")
        require(bool(mask.any()), "mask selects no features")
        return self.select([n for n, keep in zip(self.names, mask) if keep])

    def hstack(self, other: "FeatureMatrix") -> "FeatureMatrix":
        """Column-concatenate two matrices over identical records."""
        require(self.record_ids == other.record_ids, "record ids must match")
        require(self.labels == other.labels, "labels must match")
        return FeatureMatrix(
            names=self.names + other.names,
            values=np.hstack([self.values, other.values]),
            labels=self.labels,
            record_ids=self.record_ids,
        )

    def rows(self, indices) -> "FeatureMatrix":
        indices = list(indices)
        return FeatureMatrix(
            names=self.names,
            values=self.values[indices],
            labels=tuple(self.labels[i] for i in indices),
            record_ids=tuple(self.record_ids[i] for i in indices),
        )


def export_features_csv(features: FeatureMatrix, path) -> None:
    """Write record_id,label,<feature names...> with round-trip floats."""
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["record_id", "label", *features.names])
        for rid, label, row in zip(features.record_ids, features.labels, features.values):
            writer.writerow([rid, label, *[repr(float(v)) for v in row]])


def import_features_csv(path) -> FeatureMatrix:
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"{path}: no such file")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["record_id", "label"] or len(header) < 3:
            raise DataFormatError(
                f"{path}: expected header starting with record_id,label and >= 1 feature"
            )
        names = tuple(header[2:])
        ids, labels, rows = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(f"{path}: line {lineno}: expected {len(header)} columns")
            ids.append(row[0])
            labels.append(row[1])
            try:
                rows.append([float(v) for v in row[2:]])
            except ValueError:
                raise DataFormatError(f"{path}: line {lineno}: bad number") from None
    if not rows:
        raise DataFormatError(f"{path}: no feature rows")
    try:
        return FeatureMatrix(
            names=names,
            values=np.asarray(rows, dtype=float),
            labels=tuple(labels),
            record_ids=tuple(ids),
        )
    except ValueError as e:
        raise DataFormatError(f"{path}: {e}") from None
