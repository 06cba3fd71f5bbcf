"""Labeled signal collections: loading, synthesis, folds, and CSV round-trips.

A record is a uniformly sampled scalar series with a sample rate in Hz.
Datasets pair records with string class labels and stable record ids so
every downstream artifact (feature rows, reports) can be traced back.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError, InsufficientDataError
from .validation import as_float_array, check_labels, require


@dataclass(frozen=True)
class TimeSeries:
    """A finite, uniformly sampled scalar signal.

    Invariants: at least 2 samples, all finite, sample_rate > 0.
    """

    values: np.ndarray
    sample_rate: float

    def __post_init__(self):
        values = as_float_array(self.values, name="values", ndim=1)
        if len(values) < 2:
            raise InsufficientDataError("a series needs at least 2 samples")
        if not (math.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def nyquist(self) -> float:
        return self.sample_rate / 2.0

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self.values) / self.sample_rate


@dataclass(frozen=True)
class LabeledDataset:
    """Immutable collection of records with class labels and unique ids."""

    records: tuple[TimeSeries, ...]
    labels: tuple[str, ...]
    record_ids: tuple[str, ...]
    class_labels: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        require(len(self.records) > 0, "dataset is empty", InsufficientDataError)
        require(
            len(self.records) == len(self.labels) == len(self.record_ids),
            "records, labels, and record_ids must have equal length",
        )
        require(all(isinstance(x, TimeSeries) for x in self.records), "records must be TimeSeries")
        if len(set(self.record_ids)) != len(self.record_ids):
            raise ValueError("record_ids must be unique")
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(self, "record_ids", tuple(str(x) for x in self.record_ids))
        object.__setattr__(self, "class_labels", tuple(sorted(set(self.labels))))

    def __len__(self) -> int:
        return len(self.records)

    def label_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=object)

    def class_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {c: 0 for c in self.class_labels}
        for lab in self.labels:
            counts[lab] += 1
        return counts

    def indices_of(self, label: str) -> np.ndarray:
        return np.asarray([i for i, lab in enumerate(self.labels) if lab == label])

    def subset(self, indices) -> "LabeledDataset":
        indices = list(indices)
        return LabeledDataset(
            records=tuple(self.records[i] for i in indices),
            labels=tuple(self.labels[i] for i in indices),
            record_ids=tuple(self.record_ids[i] for i in indices),
        )

    def restrict_to(self, labels) -> "LabeledDataset":
        """Keep only records whose label is in `labels` (order preserved)."""
        wanted = set(labels)
        missing = wanted - set(self.class_labels)
        if missing:
            raise ValueError(f"unknown labels: {sorted(missing)}")
        keep = [i for i, lab in enumerate(self.labels) if lab in wanted]
        if not keep:
            raise InsufficientDataError("restriction removed every record")
        return self.subset(keep)

    def regroup(self, groups: dict[str, list[str]]) -> "LabeledDataset":
        """Merge classes: {new_label: [old labels]}; record order preserved.

        Old labels not mentioned keep their name. Each old label may appear
        in at most one group.
        """
        seen: dict[str, str] = {}
        for new, olds in groups.items():
            require(len(olds) > 0, f"group '{new}' is empty")
            for old in olds:
                if old not in self.class_labels:
                    raise ValueError(f"group '{new}' references unknown label '{old}'")
                if old in seen:
                    raise ValueError(f"label '{old}' appears in more than one group")
                seen[old] = str(new)
        new_labels = tuple(seen.get(lab, lab) for lab in self.labels)
        return LabeledDataset(records=self.records, labels=new_labels, record_ids=self.record_ids)


@dataclass(frozen=True)
class FoldPlan:
    """A stratified k-fold assignment of record indices.

    assignments[i] is the fold (0..k-1) where record i is a *test* record.
    """

    k: int
    assignments: np.ndarray
    seed: int

    def __post_init__(self):
        require(self.k >= 2, "k must be >= 2")
        arr = np.asarray(self.assignments, dtype=int)
        require(arr.ndim == 1 and len(arr) > 0, "assignments must be a non-empty vector")
        require(arr.min() >= 0 and arr.max() < self.k, "fold ids out of range")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "assignments", arr)

    def __len__(self) -> int:
        return len(self.assignments)

    def test_indices(self, fold: int) -> np.ndarray:
        require(0 <= fold < self.k, f"fold must be in [0, {self.k})")
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        require(0 <= fold < self.k, f"fold must be in [0, {self.k})")
        return np.flatnonzero(self.assignments != fold)


def stratified_fold_assignments(labels, k: int, seed: int) -> np.ndarray:
    """Assign each row a fold so per-class counts differ by at most 1.

    Rows of each class are shuffled with a seeded generator and dealt
    round-robin; classes are processed in lexicographic order so the
    result is a pure function of (labels, k, seed).
    """
    labels = check_labels(labels)
    require(k >= 2, "k must be >= 2", InsufficientDataError)
    rng = np.random.default_rng(seed)
    assignments = np.empty(len(labels), dtype=int)
    for cls in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < k:
            raise InsufficientDataError(
                f"class '{cls}' has {len(idx)} records, fewer than k={k}"
            )
        order = rng.permutation(len(idx))
        for pos, row in enumerate(idx[order]):
            assignments[row] = pos % k
    return assignments


def make_folds(dataset_or_labels, k: int, seed: int) -> FoldPlan:
    """Build a stratified FoldPlan for a dataset or a label vector."""
    if isinstance(dataset_or_labels, LabeledDataset):
        labels = dataset_or_labels.label_array()
    else:
        labels = dataset_or_labels
    return FoldPlan(k=k, assignments=stratified_fold_assignments(labels, k, seed), seed=seed)


# ---------------------------------------------------------------------------
# Directory loading (one text file per record, one sample per line)
# ---------------------------------------------------------------------------

def _read_record_file(path: Path) -> np.ndarray:
    values: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {lineno}: could not parse '{text}' as a number"
                ) from None
    if len(values) < 2:
        raise DataFormatError(f"{path}: record has fewer than 2 samples")
    return np.asarray(values, dtype=float)


def load_label_directory(path, label: str, sample_rate: float) -> LabeledDataset:
    """Load every plain-text record file in a directory under one label.

    Files are taken in sorted name order; each file holds one record, one
    sample per line (blank lines ignored). Record ids are '<label>:<stem>'.
    """
    path = Path(path)
    if not path.is_dir():
        raise DataFormatError(f"{path}: not a directory")
    files = sorted(p for p in path.iterdir() if p.is_file() and not p.name.startswith("."))
    if not files:
        raise DataFormatError(f"{path}: no record files found")
    records, ids = [], []
    for p in files:
        records.append(TimeSeries(_read_record_file(p), sample_rate))
        ids.append(f"{label}:{p.stem}")
    return LabeledDataset(
        records=tuple(records),
        labels=tuple(label for _ in records),
        record_ids=tuple(ids),
    )


def load_directories(class_dirs: dict[str, str], sample_rate: float) -> LabeledDataset:
    """Load {label: directory} into one dataset (labels in sorted order)."""
    require(len(class_dirs) > 0, "no class directories given", DataFormatError)
    parts = [load_label_directory(class_dirs[label], label, sample_rate)
             for label in sorted(class_dirs)]
    return concat_datasets(parts)


def concat_datasets(parts) -> LabeledDataset:
    parts = list(parts)
    require(len(parts) > 0, "nothing to concatenate", InsufficientDataError)
    return LabeledDataset(
        records=tuple(r for d in parts for r in d.records),
        labels=tuple(lab for d in parts for lab in d.labels),
        record_ids=tuple(rid for d in parts for rid in d.record_ids),
    )


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------

def synthesize_record(
    tones,
    noise_sigma: float,
    length: int,
    sample_rate: float,
    seed,
) -> TimeSeries:
    """Sum of sinusoids with random phases plus white Gaussian noise.

    tones is a sequence of (frequency_hz, amplitude). Phases are drawn
    uniformly from [0, 2*pi) first, then the noise vector, from a single
    generator seeded with `seed`, so output is a pure function of the
    arguments. Tone frequencies must lie strictly below Nyquist.
    """
    require(length >= 2, "length must be >= 2", InsufficientDataError)
    require(sample_rate > 0, "sample_rate must be positive")
    require(noise_sigma >= 0, "noise_sigma must be >= 0")
    tones = [(float(f), float(a)) for f, a in tones]
    nyq = sample_rate / 2.0
    for f, _ in tones:
        if not 0 <= f < nyq:
            raise ValueError(f"tone frequency {f} Hz not in [0, Nyquist={nyq} Hz)")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(tones))
    noise = rng.standard_normal(length)
    t = np.arange(length) / sample_rate
    x = np.zeros(length)
    for (f, a), phi in zip(tones, phases):
        x += a * np.sin(2.0 * np.pi * f * t + phi)
    x += noise_sigma * noise
    return TimeSeries(x, sample_rate)


def synthesize_dataset(
    class_specs: dict[str, dict],
    length: int,
    sample_rate: float,
    seed: int,
) -> LabeledDataset:
    """Build a labeled dataset of synthetic records.

    class_specs maps label -> {"tones": [(hz, amp), ...], "noise_sigma": s,
    "count": n}. Classes are generated in sorted label order; each record
    gets its own integer seed drawn sequentially from a generator seeded
    with `seed`, so the dataset is reproducible record-by-record.
    """
    require(len(class_specs) > 0, "no classes specified")
    rng = np.random.default_rng(seed)
    records, labels, ids = [], [], []
    for label in sorted(class_specs):
        spec = class_specs[label]
        count = int(spec["count"])
        require(count > 0, f"class '{label}' count must be positive")
        for i in range(count):
            rec_seed = int(rng.integers(0, 2**63 - 1))
            records.append(
                synthesize_record(
                    spec.get("tones", []),
                    float(spec.get("noise_sigma", 0.0)),
                    length,
                    sample_rate,
                    rec_seed,
                )
            )
            labels.append(label)
            ids.append(f"{label}:{i:04d}")
    return LabeledDataset(records=tuple(records), labels=tuple(labels), record_ids=tuple(ids))


# ---------------------------------------------------------------------------
# Records CSV round-trip
# ---------------------------------------------------------------------------

RECORDS_HEADER = ["record_id", "label", "sample_index", "value"]


def _meta_path(csv_path: Path) -> Path:
    return csv_path.with_name(csv_path.name + ".meta.json")


def export_records_csv(dataset: LabeledDataset, path) -> None:
    """Write long-form records CSV plus a sidecar meta JSON with rates.

    Columns: record_id,label,sample_index,value. Values use shortest
    round-trip float formatting so a read-back is bit-exact.
    """
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORDS_HEADER)
        for rid, label, rec in zip(dataset.record_ids, dataset.labels, dataset.records):
            for i, v in enumerate(rec.values):
                writer.writerow([rid, label, i, repr(float(v))])
    meta = {"sample_rates": {rid: rec.sample_rate
                             for rid, rec in zip(dataset.record_ids, dataset.records)}}
    with open(_meta_path(path), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def import_records_csv(path, sample_rate: float | None = None) -> LabeledDataset:
    """Read a records CSV written by export_records_csv.

    Sample rates come from the sidecar meta JSON; `sample_rate` is the
    fallback when the sidecar is absent.
    """
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"{path}: no such file")
    rates: dict[str, float] = {}
    meta_file = _meta_path(path)
    if meta_file.is_file():
        try:
            with open(meta_file, "r", encoding="utf-8") as fh:
                rates = {str(k): float(v) for k, v in json.load(fh)["sample_rates"].items()}
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise DataFormatError(f"{meta_file}: bad sidecar meta ({e})") from None

    order: list[str] = []
    values: dict[str, list[float]] = {}
    label_of: dict[str, str] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RECORDS_HEADER:
            raise DataFormatError(f"{path}: expected header {RECORDS_HEADER}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataFormatError(f"{path}: line {lineno}: expected 4 columns")
            rid, label, idx_s, val_s = row
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise DataFormatError(f"{path}: line {lineno}: bad number") from None
            if rid not in values:
                order.append(rid)
                values[rid] = []
                label_of[rid] = label
            elif label_of[rid] != label:
                raise DataFormatError(f"{path}: line {lineno}: record '{rid}' has conflicting labels")
            if idx != len(values[rid]):
                raise DataFormatError(
                    f"{path}: line {lineno}: sample_index {idx} out of order for '{rid}'"
                )
            values[rid].append(val)
    if not order:
        raise DataFormatError(f"{path}: no records")

    records, labels, ids = [], [], []
    for rid in order:
        rate = rates.get(rid, sample_rate)
        if rate is None:
            raise DataFormatError(
                f"{path}: no sample rate for '{rid}' (missing sidecar meta and no fallback given)"
            )
        records.append(TimeSeries(np.asarray(values[rid]), float(rate)))
        labels.append(label_of[rid])
        ids.append(rid)
    return LabeledDataset(records=tuple(records), labels=tuple(labels), record_ids=tuple(ids))
