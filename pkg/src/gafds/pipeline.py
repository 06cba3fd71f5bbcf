"""End-to-end experiment driver: dataset -> spectra -> searched interval
features + nonlinear features -> optional subset selection -> k-fold
evaluation, with every stage artifact persisted in the output directory.

Reruns with the same config produce byte-identical artifacts; only the
log carries timestamps. CLI subcommands call the same stage functions so
a chained run reproduces `run` exactly.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from pathlib import Path

from .classifiers import make_classifier
from .config import ExperimentConfig
from .dataset import (
    LabeledDataset,
    import_records_csv,
    load_directories,
    make_folds,
    export_records_csv,
    synthesize_dataset,
)
from .errors import GafdsError, StageError
from .evaluation import (
    EvaluationReport,
    cross_validate,
    distance_ratio_table,
    export_ratio_table_csv,
    export_report_csv,
    export_report_json,
)
from .features import FeatureMatrix, export_features_csv
from .nonlinear import extract_nonlinear_features, nonlinear_feature_names
from .search import (
    GaConfig,
    SearchResult,
    extract_interval_features,
    interval_feature_names,
    run_search,
    save_search_result,
)
from .selection import SelectionResult, run_selection, save_selection_result
from .spectrum import spectra_of_dataset

logger = logging.getLogger("gafds")


def _stage(name: str):
    """Wrap a stage body so failures surface the stage name."""

    def decorator(fn):
        def wrapper(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except Exception as e:
                raise StageError(name, str(e)) from e

        wrapper.__name__ = fn.__name__
        return wrapper

    return decorator


@_stage("dataset")
def stage_dataset(config: ExperimentConfig) -> LabeledDataset:
    ds = config.dataset
    if ds.kind == "synthetic":
        dataset = synthesize_dataset(ds.classes, ds.length, ds.sample_rate, ds.seed)
    elif ds.kind == "directories":
        dataset = load_directories(ds.classes, ds.sample_rate)
    elif ds.kind == "records_csv":
        dataset = import_records_csv(ds.path, sample_rate=ds.sample_rate)
    else:
        raise GafdsError(f"unknown dataset kind '{ds.kind}'")
    logger.info("dataset: %d records, classes %s", len(dataset), dataset.class_counts())
    return dataset


@_stage("task")
def stage_task(dataset: LabeledDataset, config: ExperimentConfig) -> LabeledDataset:
    task = config.task
    if task.classes:
        dataset = dataset.restrict_to(task.classes)
    if task.groups:
        dataset = dataset.regroup(task.groups)
    logger.info("task '%s': classes %s", task.name, dataset.class_counts())
    return dataset


@_stage("search")
def stage_search(dataset: LabeledDataset, config: ExperimentConfig) -> SearchResult:
    spectra = spectra_of_dataset(dataset, config.spectrum_source)
    ga = GaConfig(
        population_size=config.search.population_size,
        max_generations=config.search.max_generations,
        crossover_prob=config.search.crossover_prob,
        mutation_prob=config.search.mutation_prob,
        mutation_sigma=config.search.mutation_sigma,
        elitism_count=config.search.elitism_count,
        penalty=config.search.penalty,
        stagnation_window=config.search.stagnation_window,
        seed=config.search.seed,
        n_jobs=config.search.n_jobs,
        fitness_mode=config.search.fitness_mode,
    )
    result = run_search(spectra, dataset.label_array(), n_intervals=config.search.n_intervals,
                        config=ga)
    logger.info(
        "search: fitness %.4f after %d generations, %d/%d usable intervals",
        result.fitness, len(result.history), len(result.intervals),
        result.genome.n_intervals,
    )
    return result


@_stage("interval-features")
def stage_interval_features(
    dataset: LabeledDataset, search_result: SearchResult, config: ExperimentConfig
) -> FeatureMatrix:
    spectra = spectra_of_dataset(dataset, config.spectrum_source)
    features = extract_interval_features(
        search_result.intervals,
        spectra,
        dataset.labels,
        dataset.record_ids,
        names=interval_feature_names(len(search_result.intervals)),
    )
    logger.info("interval features: %s", list(features.names))
    return features


@_stage("nonlinear-features")
def stage_nonlinear_features(
    dataset: LabeledDataset, config: ExperimentConfig, name_start: int
) -> FeatureMatrix:
    nl = config.nonlinear
    features = extract_nonlinear_features(
        dataset,
        name_start=name_start,
        n_jobs=nl.n_jobs,
        sampen_m=nl.sampen_m,
        sampen_tolerance_scale=nl.sampen_tolerance_scale,
        sampen_length=nl.sampen_length,
    )
    logger.info("nonlinear features: %s", list(features.names))
    return features


def nonlinear_name_start(n_intervals: int) -> int:
    """Nonlinear names continue after the interval features, but never
    start below the conventional f_5."""
    return max(5, n_intervals + 1)


@_stage("selection")
def stage_selection(features: FeatureMatrix, config: ExperimentConfig) -> SelectionResult:
    sel = config.selection
    ga = GaConfig(
        population_size=sel.population_size,
        max_generations=sel.max_generations,
        crossover_prob=sel.crossover_prob,
        mutation_prob=sel.mutation_prob if sel.mutation_prob is not None
        else 1.0 / features.n_features,
        mutation_sigma=0.0,
        elitism_count=1,
        penalty=0.0,
        stagnation_window=None,
        seed=sel.seed,
    )
    result = run_selection(features, config=ga, mode=sel.objective,
                           positive_label=sel.positive_label)
    logger.info("selection: objective %.4f, kept %s", result.objective,
                list(result.selected_names()))
    return result


def evaluate_features(
    features: FeatureMatrix,
    classifier_specs,
    fold_counts,
    seed: int,
    normalize: bool = False,
    task: str = "task",
) -> EvaluationReport:
    """Cross-validate every classifier spec at every fold count."""
    kinds = tuple(kind for kind, _ in classifier_specs)
    report = EvaluationReport(
        task=task,
        feature_names=features.names,
        fold_counts=tuple(fold_counts),
        classifier_kinds=kinds,
        seed=seed,
    )
    labels = features.label_array()
    for k in fold_counts:
        plan = make_folds(labels, k, seed)
        for kind, params in classifier_specs:
            clf = make_classifier(kind, **params)
            result = cross_validate(clf, features, folds=plan, normalize=normalize)
            report.add(kind, result)
            logger.info("evaluation: %s %d-fold accuracy %.4f", kind, k, result.mean_accuracy)
    return report


@_stage("evaluation")
def stage_evaluation(features: FeatureMatrix, config: ExperimentConfig) -> EvaluationReport:
    ev = config.evaluation
    return evaluate_features(
        features,
        config.classifiers,
        ev.folds,
        ev.seed,
        normalize=ev.normalize,
        task=config.task.name,
    )


@_stage("ratios")
def stage_ratios(features: FeatureMatrix, config: ExperimentConfig):
    names = config.ratios.feature_names
    table = distance_ratio_table(features, names=names)
    logger.info("ratio table over %s for classes %s", list(table.feature_names),
                list(table.class_labels))
    return table


def _config_hash(config: ExperimentConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def run_pipeline(config: ExperimentConfig, out_dir) -> dict:
    """Execute every enabled stage and persist artifacts under out_dir.

    Returns the manifest (also written as manifest.json). On stage
    failure, a manifest.partial.json names the completed stages before
    the StageError propagates.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    handler = logging.FileHandler(out / "pipeline.log", mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.INFO)
    started = time.time()

    artifacts: dict[str, str] = {}
    completed: list[str] = []

    def partial_manifest(error: StageError):
        payload = {
            "status": "failed",
            "failed_stage": error.stage,
            "cause": error.cause,
            "completed_stages": completed,
            "artifacts": artifacts,
            "config": config.to_dict(),
            "config_sha256": _config_hash(config),
        }
        with open(out / "manifest.partial.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")

    try:
        dataset = stage_dataset(config)
        export_records_csv(dataset, out / "records.csv")
        artifacts["records"] = "records.csv"
        completed.append("dataset")

        dataset = stage_task(dataset, config)
        completed.append("task")

        feature_blocks: list[FeatureMatrix] = []
        if config.search.enabled:
            search_result = stage_search(dataset, config)
            save_search_result(search_result, out / "search.json")
            artifacts["search"] = "search.json"
            completed.append("search")
            feature_blocks.append(stage_interval_features(dataset, search_result, config))
            completed.append("interval-features")
            name_start = nonlinear_name_start(search_result.genome.n_intervals)
        else:
            name_start = 5

        if config.nonlinear.enabled:
            feature_blocks.append(stage_nonlinear_features(dataset, config, name_start))
            completed.append("nonlinear-features")

        features = feature_blocks[0]
        for block in feature_blocks[1:]:
            features = features.hstack(block)
        export_features_csv(features, out / "features.csv")
        artifacts["features"] = "features.csv"

        eval_features = features
        if config.selection.enabled:
            selection_result = stage_selection(features, config)
            save_selection_result(selection_result, out / "mask.json")
            artifacts["mask"] = "mask.json"
            completed.append("selection")
            eval_features = features.select_mask(selection_result.mask)

        if config.ratios.enabled:
            table = stage_ratios(features, config)
            export_ratio_table_csv(table, out / "ratios.csv")
            artifacts["ratios"] = "ratios.csv"
            completed.append("ratios")

        report = stage_evaluation(eval_features, config)
        export_report_csv(report, out / "report.csv")
        export_report_json(report, out / "report.json")
        artifacts["report_csv"] = "report.csv"
        artifacts["report_json"] = "report.json"
        completed.append("evaluation")

        manifest = {
            "status": "ok",
            "stages": completed,
            "artifacts": artifacts,
            "config": config.to_dict(),
            "config_sha256": _config_hash(config),
            "seeds": {
                "master": config.seed,
                "dataset": config.dataset.seed,
                "search": config.search.seed,
                "selection": config.selection.seed,
                "evaluation": config.evaluation.seed,
            },
            "n_records": len(dataset),
            "class_counts": dataset.class_counts(),
            "feature_names": list(features.names),
            "evaluated_feature_names": list(eval_features.names),
        }
        with open(out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")
        logger.info("pipeline finished in %.1fs", time.time() - started)
        return manifest
    except StageError as e:
        logger.error("pipeline failed at stage '%s': %s", e.stage, e.cause)
        partial_manifest(e)
        raise
    finally:
        logger.removeHandler(handler)
        handler.close()
