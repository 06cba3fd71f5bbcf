"""Command-line entry points.

Subcommands mirror the pipeline stages and call the same stage functions,
so chaining them with explicit seeds reproduces `run` byte for byte.
Failures exit nonzero with a one-line JSON error on stderr.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .classifiers import CLASSIFIER_REGISTRY, make_classifier, save_model
from .config import (
    default_classifier_specs,
    default_evaluation_section,
    default_search_section,
    default_selection_section,
    load_config,
    parse_config,
)
from .dataset import export_records_csv, import_records_csv, load_directories
from .errors import ConfigError, GafdsError, StageError
from .evaluation import (
    distance_ratio_table,
    export_ratio_table_csv,
    export_report_csv,
    export_report_json,
)
from .features import export_features_csv, import_features_csv
from .nonlinear import export_multifractal_csv, extract_nonlinear_features, mfdfa
from .pipeline import (
    evaluate_features,
    nonlinear_name_start,
    run_pipeline,
    stage_dataset,
)
from .search import (
    GaConfig,
    extract_interval_features,
    interval_feature_names,
    load_search_result,
    run_search,
    save_search_result,
)
from .selection import load_selection_result, run_selection, save_selection_result
from .spectrum import (
    export_spectra_csv,
    export_spectrum_csv,
    spectra_of_dataset,
    spectrum_of,
)


def _fail(exc: BaseException):
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    if isinstance(exc, StageError):
        payload["error"]["stage"] = exc.stage
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    sys.exit(1)


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (click.ClickException, click.Abort, KeyboardInterrupt):
            raise
        except Exception as e:
            _fail(e)

    return wrapper


def _echo_json(payload: dict) -> None:
    click.echo(json.dumps(payload, sort_keys=True))


def _load_records(path, rate):
    return import_records_csv(path, sample_rate=rate)


def _apply_task(dataset, classes: str | None, groups: tuple[str, ...]):
    """Apply --classes A,B and repeated --group NEW=A,B mappings."""
    if classes:
        dataset = dataset.restrict_to([c.strip() for c in classes.split(",") if c.strip()])
    for spec in groups:
        if "=" not in spec:
            raise ConfigError(f"--group '{spec}': expected NEW=OLD1,OLD2")
        new, olds = spec.split("=", 1)
        members = [o.strip() for o in olds.split(",") if o.strip()]
        if not new.strip() or not members:
            raise ConfigError(f"--group '{spec}': expected NEW=OLD1,OLD2")
        dataset = dataset.regroup({new.strip(): members})
    return dataset


def _task_from_config(dataset, cfg, classes, groups):
    """Config task applies first; explicit CLI flags then override/add."""
    if cfg is not None and classes is None and not groups:
        if cfg.task.classes:
            dataset = dataset.restrict_to(cfg.task.classes)
        if cfg.task.groups:
            dataset = dataset.regroup(cfg.task.groups)
        return dataset
    return _apply_task(dataset, classes, groups)


def _parse_folds(text: str) -> list[int]:
    try:
        folds = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"--folds '{text}': expected comma-separated integers") from None
    if not folds or any(k < 2 for k in folds):
        raise ConfigError(f"--folds '{text}': every fold count must be >= 2")
    return folds


@click.group()
def main():
    """Frequency-interval search, nonlinear features, and classification."""


# ---------------------------------------------------------------------------


@main.command(name="import")
@click.argument("mappings", nargs=-1, required=True)
@click.option("--rate", type=float, required=True, help="Sample rate in Hz.")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@guarded
def import_cmd(mappings, rate, out_dir):
    """Load LABEL=DIR directories of text records into a records CSV."""
    class_dirs = {}
    for spec in mappings:
        if "=" not in spec:
            raise ConfigError(f"'{spec}': expected LABEL=DIRECTORY")
        label, directory = spec.split("=", 1)
        class_dirs[label] = directory
    dataset = load_directories(class_dirs, rate)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    export_records_csv(dataset, out / "records.csv")
    _echo_json({"records": len(dataset), "classes": dataset.class_counts(),
                "out": str(out / "records.csv")})


@main.command()
@click.option("--config", "config_path", type=click.Path(), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--seed", type=int, default=None, help="Override the master seed.")
@guarded
def synth(config_path, out_dir, seed):
    """Generate the synthetic dataset described by a config file."""
    with open(config_path, "r", encoding="utf-8") as fh:
        document = json.load(fh)
    if seed is not None:
        document["seed"] = seed
    cfg = parse_config(document)
    if cfg.dataset.kind != "synthetic":
        raise ConfigError("synth needs dataset.kind == 'synthetic'")
    dataset = stage_dataset(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    export_records_csv(dataset, out / "records.csv")
    _echo_json({"records": len(dataset), "classes": dataset.class_counts(),
                "seed": cfg.dataset.seed, "out": str(out / "records.csv")})


@main.command()
@click.option("--records", "records_path", type=click.Path(), required=True)
@click.option("--rate", type=float, default=None, help="Fallback sample rate.")
@click.option("--source", type=click.Choice(["fourier", "hilbert_envelope"]),
              default="fourier", show_default=True)
@click.option("--record", "record_id", default=None, help="Single record id.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@guarded
def spectrum(records_path, rate, source, record_id, out_path):
    """Write magnitude spectra (bin,hz,magnitude) for records."""
    dataset = _load_records(records_path, rate)
    if record_id is not None:
        if record_id not in dataset.record_ids:
            raise GafdsError(f"record '{record_id}' not found")
        rec = dataset.records[dataset.record_ids.index(record_id)]
        export_spectrum_csv(spectrum_of(rec, source), out_path)
        _echo_json({"records": 1, "source": source, "out": str(out_path)})
        return
    spectra = spectra_of_dataset(dataset, source)
    export_spectra_csv(spectra, dataset.record_ids, out_path)
    _echo_json({"records": len(spectra), "source": source, "out": str(out_path)})


@main.command()
@click.option("--records", "records_path", type=click.Path(), required=True)
@click.option("--rate", type=float, default=None)
@click.option("--record", "record_id", required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@guarded
def mfspec(records_path, rate, record_id, out_path):
    """Write one record's multifractal spectrum as q,h_q,D_q CSV."""
    dataset = _load_records(records_path, rate)
    if record_id not in dataset.record_ids:
        raise GafdsError(f"record '{record_id}' not found")
    rec = dataset.records[dataset.record_ids.index(record_id)]
    export_multifractal_csv(mfdfa(rec.values), out_path)
    _echo_json({"record": record_id, "out": str(out_path)})


@main.command()
@click.option("--records", "records_path", type=click.Path(), required=True)
@click.option("--rate", type=float, default=None)
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Take GA settings and task mapping from a config file.")
@click.option("--alpha", type=int, default=None, help="Number of intervals.")
@click.option("--population", type=int, default=None)
@click.option("--generations", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--penalty", type=float, default=None)
@click.option("--fitness-mode", type=click.Choice(["split_accuracy", "resubstitution"]),
              default=None)
@click.option("--source", type=click.Choice(["fourier", "hilbert_envelope"]), default=None)
@click.option("--jobs", type=int, default=None)
@click.option("--classes", default=None, help="Comma-separated label restriction.")
@click.option("--group", "groups", multiple=True, help="NEW=OLD1,OLD2 label merge.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@guarded
def search(records_path, rate, config_path, alpha, population, generations, seed,
           penalty, fitness_mode, source, jobs, classes, groups, out_path):
    """Run the genetic interval search and write the result JSON."""
    cfg = load_config(config_path) if config_path else None
    sc = cfg.search if cfg else default_search_section(seed if seed is not None else 0)
    ga = GaConfig(
        population_size=population if population is not None else sc.population_size,
        max_generations=generations if generations is not None else sc.max_generations,
        crossover_prob=sc.crossover_prob,
        mutation_prob=sc.mutation_prob,
        mutation_sigma=sc.mutation_sigma,
        elitism_count=sc.elitism_count,
        penalty=penalty if penalty is not None else sc.penalty,
        stagnation_window=sc.stagnation_window,
        seed=seed if seed is not None else sc.seed,
        n_jobs=jobs if jobs is not None else sc.n_jobs,
        fitness_mode=fitness_mode if fitness_mode is not None else sc.fitness_mode,
    )
    n_intervals = alpha if alpha is not None else sc.n_intervals
    spectrum_source = source or (cfg.spectrum_source if cfg else "fourier")
    dataset = _task_from_config(_load_records(records_path, rate), cfg, classes, groups)
    spectra = spectra_of_dataset(dataset, spectrum_source)
    result = run_search(spectra, dataset.label_array(), n_intervals=n_intervals, config=ga)
    save_search_result(result, out_path)
    _echo_json({
        "fitness": result.fitness,
        "generations": len(result.history),
        "intervals": [[iv.lo_hz, iv.hi_hz] for iv in result.intervals],
        "out": str(out_path),
    })


@main.command()
@click.option("--records", "records_path", type=click.Path(), required=True)
@click.option("--rate", type=float, default=None)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--search", "search_path", type=click.Path(), default=None,
              help="Search result JSON providing the intervals.")
@click.option("--source", type=click.Choice(["fourier", "hilbert_envelope"]), default=None)
@click.option("--nonlinear/--no-nonlinear", "with_nonlinear", default=True,
              show_default=True)
@click.option("--jobs", type=int, default=1)
@click.option("--classes", default=None)
@click.option("--group", "groups", multiple=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@guarded
def extract(records_path, rate, config_path, search_path, source, with_nonlinear,
            jobs, classes, groups, out_path):
    """Build the feature matrix CSV (interval means and/or nonlinear bank)."""
    cfg = load_config(config_path) if config_path else None
    dataset = _task_from_config(_load_records(records_path, rate), cfg, classes, groups)
    spectrum_source = source or (cfg.spectrum_source if cfg else "fourier")
    blocks = []
    name_start = 5
    if search_path:
        result = load_search_result(search_path)
        spectra = spectra_of_dataset(dataset, spectrum_source)
        blocks.append(extract_interval_features(
            result.intervals, spectra, dataset.labels, dataset.record_ids,
            names=interval_feature_names(len(result.intervals)),
        ))
        name_start = nonlinear_name_start(result.genome.n_intervals)
    if with_nonlinear:
        nl = cfg.nonlinear if cfg else None
        blocks.append(extract_nonlinear_features(
            dataset,
            name_start=name_start,
            n_jobs=jobs,
            sampen_m=nl.sampen_m if nl else 2,
            sampen_tolerance_scale=nl.sampen_tolerance_scale if nl else 0.2,
            sampen_length=nl.sampen_length if nl else None,
        ))
    if not blocks:
        raise ConfigError("nothing to extract: give --search and/or keep --nonlinear")
    features = blocks[0]
    for block in blocks[1:]:
        features = features.hstack(block)
    export_features_csv(features, out_path)
    _echo_json({"records": features.n_records, "features": list(features.names),
                "out": str(out_path)})


@main.command()
@click.option("--features", "features_path", type=click.Path(), required=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--population", type=int, default=None)
@click.option("--generations", type=int, default=None)
@click.option("--objective", type=click.Choice(["corrected", "literal"]), default=None)
@click.option("--positive-label", default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@guarded
def select(features_path, config_path, seed, population, generations, objective,
           positive_label, out_path):
    """Evolve a feature-subset mask and write it as JSON."""
    features = import_features_csv(features_path)
    cfg = load_config(config_path) if config_path else None
    sl = cfg.selection if cfg else default_selection_section(seed if seed is not None else 0)
    ga = GaConfig(
        population_size=population if population is not None else sl.population_size,
        max_generations=generations if generations is not None else sl.max_generations,
        crossover_prob=sl.crossover_prob,
        mutation_prob=sl.mutation_prob if sl.mutation_prob is not None
        else 1.0 / features.n_features,
        mutation_sigma=0.0,
        elitism_count=1,
        penalty=0.0,
        stagnation_window=None,
        seed=seed if seed is not None else sl.seed,
    )
    result = run_selection(
        features,
        config=ga,
        mode=objective if objective is not None else sl.objective,
        positive_label=positive_label if positive_label is not None else sl.positive_label,
    )
    save_selection_result(result, out_path)
    _echo_json({"objective": result.objective,
                "selected": list(result.selected_names()), "out": str(out_path)})


@main.command()
@click.option("--features", "features_path", type=click.Path(), required=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--folds", "folds_text", default=None, help="e.g. 2,5,10")
@click.option("--seed", type=int, default=None)
@click.option("--normalize/--no-normalize", default=None)
@click.option("--classifiers", "kinds_text", default=None,
              help="Comma-separated kinds, e.g. knn,lda.")
@click.option("--mask", "mask_path", type=click.Path(), default=None)
@click.option("--save-models", "models_dir", type=click.Path(), default=None,
              help="Also fit each classifier on all rows and save JSON models.")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@guarded
def evaluate(features_path, config_path, folds_text, seed, normalize, kinds_text,
             mask_path, models_dir, out_dir):
    """Cross-validate classifiers over a feature CSV and write reports."""
    features = import_features_csv(features_path)
    if mask_path:
        features = features.select_mask(load_selection_result(mask_path).mask)
    cfg = load_config(config_path) if config_path else None
    ev = cfg.evaluation if cfg else default_evaluation_section(seed if seed is not None else 0)
    specs = cfg.classifiers if cfg else default_classifier_specs(seed if seed is not None else 0)
    if kinds_text is not None:
        wanted = [k.strip() for k in kinds_text.split(",") if k.strip()]
        unknown = [k for k in wanted if k not in CLASSIFIER_REGISTRY]
        if unknown:
            raise ConfigError(f"unknown classifier kinds {unknown}")
        by_kind = dict(specs)
        specs = tuple((k, by_kind.get(k, {})) for k in wanted)
    fold_counts = _parse_folds(folds_text) if folds_text is not None else list(ev.folds)
    eval_seed = seed if seed is not None else ev.seed
    do_normalize = normalize if normalize is not None else ev.normalize
    report = evaluate_features(features, specs, fold_counts, eval_seed,
                               normalize=do_normalize,
                               task=cfg.task.name if cfg else "task")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    export_report_csv(report, out / "report.csv")
    export_report_json(report, out / "report.json")
    if models_dir:
        models_out = Path(models_dir)
        models_out.mkdir(parents=True, exist_ok=True)
        for kind, params in specs:
            model = make_classifier(kind, **params).fit(features.values,
                                                        features.label_array())
            save_model(model, models_out / f"{kind}.json")
    _echo_json({
        "folds": fold_counts,
        "accuracies": {kind: {str(k): report.accuracy(kind, k) for k in fold_counts}
                       for kind, _ in specs},
        "out": str(out / "report.csv"),
    })


@main.command()
@click.option("--features", "features_path", type=click.Path(), required=True)
@click.option("--names", default=None, help="Comma-separated feature subset.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@guarded
def ratios(features_path, names, out_path):
    """Write the class-separation ratio table CSV."""
    features = import_features_csv(features_path)
    subset = [n.strip() for n in names.split(",") if n.strip()] if names else None
    table = distance_ratio_table(features, names=subset)
    export_ratio_table_csv(table, out_path)
    _echo_json({"classes": list(table.class_labels),
                "features": list(table.feature_names), "out": str(out_path)})


@main.command()
@click.option("--config", "config_path", type=click.Path(), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--seed", type=int, default=None, help="Override the master seed.")
@guarded
def run(config_path, out_dir, seed):
    """Run the full pipeline and print the manifest."""
    with open(config_path, "r", encoding="utf-8") as fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{config_path}: bad JSON ({e})") from None
    if seed is not None:
        document["seed"] = seed
    cfg = parse_config(document)
    manifest = run_pipeline(cfg, out_dir)
    _echo_json(manifest)


if __name__ == "__main__":
    main()
