"""Experiment configuration: strict JSON schema, defaults, seed derivation.

Unknown keys anywhere in the document are errors, so typos fail loudly
instead of silently falling back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .classifiers import CLASSIFIER_REGISTRY, DEFAULT_CLASSIFIER_KINDS
from .errors import ConfigError
from .search import FITNESS_MODES, SPLIT_ACCURACY
from .selection import CORRECTED, OBJECTIVE_MODES
from .spectrum import FOURIER, SOURCES

# Offsets added to the master seed when a stage seed is not pinned.
SEED_STAGE_OFFSETS = {
    "dataset": 1,
    "search": 2,
    "selection": 3,
    "evaluation": 4,
    "mlp": 5,
}


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}; allowed keys are {sorted(allowed)}")


def _get(section: dict, key: str, default, types, where: str):
    value = section.get(key, default)
    if value is None:
        return None
    if types is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}.{key}: expected a boolean, got {value!r}")
        return value
    if types is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}.{key}: expected an integer, got {value!r}")
        return value
    if types is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
        return float(value)
    if types is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}.{key}: expected a string, got {value!r}")
        return value
    raise AssertionError(f"bad types spec for {where}.{key}")


@dataclass(frozen=True)
class DatasetConfig:
    kind: str  # "synthetic" | "directories" | "records_csv"
    sample_rate: float | None
    length: int | None
    classes: dict = field(default_factory=dict)
    path: str | None = None
    seed: int = 0


@dataclass(frozen=True)
class TaskConfig:
    name: str
    classes: tuple[str, ...] | None  # restriction, applied before grouping
    groups: dict  # new label -> [old labels]


@dataclass(frozen=True)
class SearchConfig:
    enabled: bool
    n_intervals: int
    population_size: int
    max_generations: int
    crossover_prob: float
    mutation_prob: float
    mutation_sigma: float | None
    elitism_count: int
    penalty: float
    stagnation_window: int | None
    fitness_mode: str
    n_jobs: int
    seed: int


@dataclass(frozen=True)
class NonlinearConfig:
    enabled: bool
    n_jobs: int
    sampen_m: int
    sampen_tolerance_scale: float
    sampen_length: int | None


@dataclass(frozen=True)
class SelectionConfig:
    enabled: bool
    population_size: int
    max_generations: int
    crossover_prob: float
    mutation_prob: float | None
    objective: str
    positive_label: str | None
    seed: int


@dataclass(frozen=True)
class EvaluationConfig:
    folds: tuple[int, ...]
    normalize: bool
    seed: int


@dataclass(frozen=True)
class RatiosConfig:
    enabled: bool
    feature_names: tuple[str, ...] | None


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    dataset: DatasetConfig
    task: TaskConfig
    spectrum_source: str
    search: SearchConfig
    nonlinear: NonlinearConfig
    selection: SelectionConfig
    classifiers: tuple[tuple[str, dict], ...]
    evaluation: EvaluationConfig
    ratios: RatiosConfig

    def to_dict(self) -> dict:
        # only the keys that apply to the dataset kind, so the result re-parses
        dataset: dict = {"kind": self.dataset.kind, "seed": self.dataset.seed}
        if self.dataset.sample_rate is not None:
            dataset["sample_rate"] = self.dataset.sample_rate
        if self.dataset.length is not None:
            dataset["length"] = self.dataset.length
        if self.dataset.classes:
            dataset["classes"] = self.dataset.classes
        if self.dataset.path is not None:
            dataset["path"] = self.dataset.path
        return {
            "seed": self.seed,
            "dataset": dataset,
            "task": {
                "name": self.task.name,
                "classes": list(self.task.classes) if self.task.classes else None,
                "groups": self.task.groups,
            },
            "spectrum": {"source": self.spectrum_source},
            "search": vars(self.search).copy(),
            "nonlinear": vars(self.nonlinear).copy(),
            "selection": vars(self.selection).copy(),
            "classifiers": [{"kind": kind, **params} for kind, params in self.classifiers],
            "evaluation": {
                "folds": list(self.evaluation.folds),
                "normalize": self.evaluation.normalize,
                "seed": self.evaluation.seed,
            },
            "ratios": {
                "enabled": self.ratios.enabled,
                "feature_names": list(self.ratios.feature_names)
                if self.ratios.feature_names
                else None,
            },
        }


def _parse_dataset(section, master_seed: int) -> DatasetConfig:
    where = "dataset"
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected an object")
    kind = _get(section, "kind", None, str, where)
    if kind is None:
        raise ConfigError(f"{where}.kind is required")
    seed = _get(section, "seed", None, int, where)
    if seed is None:
        seed = master_seed + SEED_STAGE_OFFSETS["dataset"]
    if kind == "synthetic":
        _check_keys(section, {"kind", "sample_rate", "length", "classes", "seed"}, where)
        rate = _get(section, "sample_rate", None, float, where)
        length = _get(section, "length", None, int, where)
        classes = section.get("classes")
        if rate is None or length is None or not isinstance(classes, dict) or not classes:
            raise ConfigError(f"{where}: synthetic needs sample_rate, length, classes")
        parsed = {}
        for label, spec in classes.items():
            cw = f"{where}.classes.{label}"
            if not isinstance(spec, dict):
                raise ConfigError(f"{cw}: expected an object")
            _check_keys(spec, {"tones", "noise_sigma", "count"}, cw)
            tones = spec.get("tones", [])
            if not isinstance(tones, list) or not all(
                isinstance(t, (list, tuple)) and len(t) == 2 for t in tones
            ):
                raise ConfigError(f"{cw}.tones: expected a list of [hz, amplitude] pairs")
            count = _get(spec, "count", None, int, cw)
            if count is None or count < 1:
                raise ConfigError(f"{cw}.count: expected a positive integer")
            parsed[str(label)] = {
                "tones": [[float(f), float(a)] for f, a in tones],
                "noise_sigma": _get(spec, "noise_sigma", 0.0, float, cw),
                "count": count,
            }
        return DatasetConfig(kind=kind, sample_rate=rate, length=length,
                             classes=parsed, seed=seed)
    if kind == "directories":
        _check_keys(section, {"kind", "sample_rate", "classes", "seed"}, where)
        rate = _get(section, "sample_rate", None, float, where)
        classes = section.get("classes")
        if rate is None or not isinstance(classes, dict) or not classes:
            raise ConfigError(f"{where}: directories needs sample_rate and classes")
        for label, path in classes.items():
            if not isinstance(path, str):
                raise ConfigError(f"{where}.classes.{label}: expected a directory path string")
        return DatasetConfig(kind=kind, sample_rate=rate, length=None,
                             classes={str(k): v for k, v in classes.items()}, seed=seed)
    if kind == "records_csv":
        _check_keys(section, {"kind", "path", "sample_rate", "seed"}, where)
        path = _get(section, "path", None, str, where)
        if path is None:
            raise ConfigError(f"{where}: records_csv needs path")
        return DatasetConfig(kind=kind, sample_rate=_get(section, "sample_rate", None, float, where),
                             length=None, path=path, seed=seed)
    raise ConfigError(f"{where}.kind: unknown kind '{kind}' "
                      "(expected synthetic, directories, or records_csv)")


def _parse_task(section) -> TaskConfig:
    where = "task"
    section = section or {}
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected an object")
    _check_keys(section, {"name", "classes", "groups"}, where)
    name = _get(section, "name", "all-classes", str, where)
    classes = section.get("classes")
    if classes is not None:
        if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
            raise ConfigError(f"{where}.classes: expected a list of labels")
        classes = tuple(classes)
    groups = section.get("groups", {})
    if not isinstance(groups, dict):
        raise ConfigError(f"{where}.groups: expected an object")
    for new, olds in groups.items():
        if not isinstance(olds, list) or not olds or not all(isinstance(o, str) for o in olds):
            raise ConfigError(f"{where}.groups.{new}: expected a non-empty list of labels")
    return TaskConfig(name=name, classes=classes,
                      groups={str(k): list(v) for k, v in groups.items()})


def _parse_search(section, master_seed: int) -> SearchConfig:
    where = "search"
    section = section or {}
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected an object")
    _check_keys(
        section,
        {"enabled", "n_intervals", "population_size", "max_generations", "crossover_prob",
         "mutation_prob", "mutation_sigma", "elitism_count", "penalty",
         "stagnation_window", "fitness_mode", "n_jobs", "seed"},
        where,
    )
    seed = _get(section, "seed", None, int, where)
    mode = _get(section, "fitness_mode", SPLIT_ACCURACY, str, where)
    if mode not in FITNESS_MODES:
        raise ConfigError(f"{where}.fitness_mode: expected one of {FITNESS_MODES}")
    return SearchConfig(
        enabled=_get(section, "enabled", True, bool, where),
        n_intervals=_get(section, "n_intervals", 4, int, where),
        population_size=_get(section, "population_size", 100, int, where),
        max_generations=_get(section, "max_generations", 100, int, where),
        crossover_prob=_get(section, "crossover_prob", 0.8, float, where),
        mutation_prob=_get(section, "mutation_prob", 0.1, float, where),
        mutation_sigma=_get(section, "mutation_sigma", None, float, where),
        elitism_count=_get(section, "elitism_count", 1, int, where),
        penalty=_get(section, "penalty", 1.0, float, where),
        stagnation_window=_get(section, "stagnation_window", 25, int, where),
        fitness_mode=mode,
        n_jobs=_get(section, "n_jobs", 1, int, where),
        seed=seed if seed is not None else master_seed + SEED_STAGE_OFFSETS["search"],
    )


def _parse_nonlinear(section) -> NonlinearConfig:
    where = "nonlinear"
    section = section or {}
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected an object")
    _check_keys(section, {"enabled", "n_jobs", "sampen_m", "sampen_tolerance_scale",
                          "sampen_length"}, where)
    return NonlinearConfig(
        enabled=_get(section, "enabled", True, bool, where),
        n_jobs=_get(section, "n_jobs", 1, int, where),
        sampen_m=_get(section, "sampen_m", 2, int, where),
        sampen_tolerance_scale=_get(section, "sampen_tolerance_scale", 0.2, float, where),
        sampen_length=_get(section, "sampen_length", None, int, where),
    )


def _parse_selection(section, master_seed: int) -> SelectionConfig:
    where = "selection"
    section = section or {}
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected an object")
    _check_keys(section, {"enabled", "population_size", "max_generations", "crossover_prob",
                          "mutation_prob", "objective", "positive_label", "seed"}, where)
    objective = _get(section, "objective", CORRECTED, str, where)
    if objective not in OBJECTIVE_MODES:
        raise ConfigError(f"{where}.objective: expected one of {OBJECTIVE_MODES}")
    seed = _get(section, "seed", None, int, where)
    return SelectionConfig(
        enabled=_get(section, "enabled", False, bool, where),
        population_size=_get(section, "population_size", 50, int, where),
        max_generations=_get(section, "max_generations", 60, int, where),
        crossover_prob=_get(section, "crossover_prob", 0.8, float, where),
        mutation_prob=_get(section, "mutation_prob", None, float, where),
        objective=objective,
        positive_label=_get(section, "positive_label", None, str, where),
        seed=seed if seed is not None else master_seed + SEED_STAGE_OFFSETS["selection"],
    )


def _parse_classifiers(section, master_seed: int) -> tuple[tuple[str, dict], ...]:
    where = "classifiers"
    if section is None:
        section = [{"kind": kind} for kind in DEFAULT_CLASSIFIER_KINDS]
    if not isinstance(section, list) or not section:
        raise ConfigError(f"{where}: expected a non-empty list of classifier objects")
    out = []
    for i, spec in enumerate(section):
        cw = f"{where}[{i}]"
        if not isinstance(spec, dict):
            raise ConfigError(f"{cw}: expected an object")
        kind = spec.get("kind")
        if kind not in CLASSIFIER_REGISTRY:
            raise ConfigError(
                f"{cw}.kind: unknown classifier '{kind}'; choose from {sorted(CLASSIFIER_REGISTRY)}"
            )
        params = {k: v for k, v in spec.items() if k != "kind"}
        allowed = set(CLASSIFIER_REGISTRY[kind]().get_params())
        unknown = sorted(set(params) - allowed)
        if unknown:
            raise ConfigError(f"{cw}: unknown parameters {unknown} for '{kind}'; "
                              f"allowed are {sorted(allowed)}")
        if kind == "mlp" and "seed" not in params:
            params["seed"] = master_seed + SEED_STAGE_OFFSETS["mlp"]
        out.append((kind, params))
    return tuple(out)


def _parse_evaluation(section, master_seed: int) -> EvaluationConfig:
    where = "evaluation"
    section = section or {}
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected an object")
    _check_keys(section, {"folds", "normalize", "seed"}, where)
    folds = section.get("folds", [5])
    if (not isinstance(folds, list) or not folds
            or not all(isinstance(k, int) and not isinstance(k, bool) and k >= 2 for k in folds)):
        raise ConfigError(f"{where}.folds: expected a list of integers >= 2")
    seed = _get(section, "seed", None, int, where)
    return EvaluationConfig(
        folds=tuple(folds),
        normalize=_get(section, "normalize", False, bool, where),
        seed=seed if seed is not None else master_seed + SEED_STAGE_OFFSETS["evaluation"],
    )


def _parse_ratios(section) -> RatiosConfig:
    where = "ratios"
    section = section or {}
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected an object")
    _check_keys(section, {"enabled", "feature_names"}, where)
    names = section.get("feature_names")
    if names is not None:
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            raise ConfigError(f"{where}.feature_names: expected a list of names")
        names = tuple(names)
    return RatiosConfig(enabled=_get(section, "enabled", False, bool, where),
                        feature_names=names)


TOP_LEVEL_KEYS = {
    "seed", "dataset", "task", "spectrum", "search", "nonlinear",
    "selection", "classifiers", "evaluation", "ratios",
}


def parse_config(document: dict) -> ExperimentConfig:
    """Validate a config document and resolve every default and seed."""
    if not isinstance(document, dict):
        raise ConfigError("config root must be an object")
    _check_keys(document, TOP_LEVEL_KEYS, "config")
    master_seed = _get(document, "seed", 0, int, "config")
    if "dataset" not in document:
        raise ConfigError("config.dataset is required")

    spectrum = document.get("spectrum") or {}
    if not isinstance(spectrum, dict):
        raise ConfigError("spectrum: expected an object")
    _check_keys(spectrum, {"source"}, "spectrum")
    source = _get(spectrum, "source", FOURIER, str, "spectrum")
    if source not in SOURCES:
        raise ConfigError(f"spectrum.source: expected one of {SOURCES}")

    config = ExperimentConfig(
        seed=master_seed,
        dataset=_parse_dataset(document["dataset"], master_seed),
        task=_parse_task(document.get("task")),
        spectrum_source=source,
        search=_parse_search(document.get("search"), master_seed),
        nonlinear=_parse_nonlinear(document.get("nonlinear")),
        selection=_parse_selection(document.get("selection"), master_seed),
        classifiers=_parse_classifiers(document.get("classifiers"), master_seed),
        evaluation=_parse_evaluation(document.get("evaluation"), master_seed),
        ratios=_parse_ratios(document.get("ratios")),
    )
    if not (config.search.enabled or config.nonlinear.enabled):
        raise ConfigError("at least one of search/nonlinear must be enabled "
                          "or there are no features to evaluate")
    return config


def default_search_section(master_seed: int = 0) -> SearchConfig:
    return _parse_search({}, master_seed)


def default_selection_section(master_seed: int = 0) -> SelectionConfig:
    return _parse_selection({}, master_seed)


def default_evaluation_section(master_seed: int = 0) -> EvaluationConfig:
    return _parse_evaluation({}, master_seed)


def default_classifier_specs(master_seed: int = 0) -> tuple[tuple[str, dict], ...]:
    return _parse_classifiers(None, master_seed)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such config file")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: bad JSON ({e})") from None
    return parse_config(document)
