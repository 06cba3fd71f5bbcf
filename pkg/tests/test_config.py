"""Config parsing: strict key checking, defaults, and seed derivation."""

import json

import pytest

from gafds.config import (
    SEED_STAGE_OFFSETS,
    default_classifier_specs,
    default_evaluation_section,
    default_search_section,
    default_selection_section,
    load_config,
    parse_config,
)
from gafds.errors import ConfigError


def _minimal():
    """Smallest useful document: synthetic two-class dataset, all defaults."""
    return {
        "dataset": {
            "kind": "synthetic",
            "sample_rate": 128.0,
            "length": 256,
            "classes": {
                "low": {"tones": [[10.0, 1.0]], "noise_sigma": 0.3, "count": 8},
                "high": {"tones": [[30.0, 1.0]], "noise_sigma": 0.3, "count": 8},
            },
        },
    }


class TestDefaults:
    def test_minimal_document_parses(self):
        config = parse_config(_minimal())
        assert config.seed == 0
        assert config.dataset.kind == "synthetic"
        assert config.spectrum_source == "fourier"

    def test_search_defaults(self):
        search = parse_config(_minimal()).search
        assert search.enabled is True
        assert search.n_intervals == 4
        assert search.population_size == 100
        assert search.max_generations == 100
        assert search.crossover_prob == 0.8
        assert search.mutation_prob == 0.1
        assert search.mutation_sigma is None
        assert search.elitism_count == 1
        assert search.penalty == 1.0
        assert search.stagnation_window == 25
        assert search.fitness_mode == "split_accuracy"
        assert search.n_jobs == 1

    def test_nonlinear_defaults(self):
        nonlinear = parse_config(_minimal()).nonlinear
        assert nonlinear.enabled is True
        assert nonlinear.n_jobs == 1
        assert nonlinear.sampen_m == 2
        assert nonlinear.sampen_tolerance_scale == 0.2
        assert nonlinear.sampen_length is None

    def test_selection_disabled_by_default(self):
        selection = parse_config(_minimal()).selection
        assert selection.enabled is False
        assert selection.population_size == 50
        assert selection.max_generations == 60
        assert selection.crossover_prob == 0.8
        assert selection.mutation_prob is None
        assert selection.objective == "corrected"
        assert selection.positive_label is None

    def test_evaluation_defaults(self):
        evaluation = parse_config(_minimal()).evaluation
        assert evaluation.folds == (5,)
        assert evaluation.normalize is False

    def test_ratios_disabled_by_default(self):
        ratios = parse_config(_minimal()).ratios
        assert ratios.enabled is False
        assert ratios.feature_names is None

    def test_default_classifier_roster(self):
        kinds = [kind for kind, _ in parse_config(_minimal()).classifiers]
        assert kinds == ["knn", "lda", "dtree", "mlp", "adaboost", "nb"]

    def test_task_defaults(self):
        task = parse_config(_minimal()).task
        assert task.name == "all-classes"
        assert task.classes is None
        assert task.groups == {}

    def test_section_helpers_match_empty_sections(self):
        config = parse_config(_minimal())
        assert default_search_section(0) == config.search
        assert default_selection_section(0) == config.selection
        assert default_evaluation_section(0) == config.evaluation
        assert default_classifier_specs(0) == config.classifiers


class TestSeedDerivation:
    def test_stage_offsets_are_distinct(self):
        offsets = list(SEED_STAGE_OFFSETS.values())
        assert len(offsets) == len(set(offsets))

    def test_unpinned_seeds_derive_from_master(self):
        document = _minimal()
        document["seed"] = 100
        config = parse_config(document)
        assert config.seed == 100
        assert config.dataset.seed == 100 + SEED_STAGE_OFFSETS["dataset"]
        assert config.search.seed == 100 + SEED_STAGE_OFFSETS["search"]
        assert config.selection.seed == 100 + SEED_STAGE_OFFSETS["selection"]
        assert config.evaluation.seed == 100 + SEED_STAGE_OFFSETS["evaluation"]

    def test_mlp_gets_derived_seed_parameter(self):
        document = _minimal()
        document["seed"] = 100
        config = parse_config(document)
        params = dict(config.classifiers)["mlp"]
        assert params["seed"] == 100 + SEED_STAGE_OFFSETS["mlp"]

    def test_pinned_seeds_survive(self):
        document = _minimal()
        document["seed"] = 100
        document["dataset"]["seed"] = 7
        document["search"] = {"seed": 8}
        document["classifiers"] = [{"kind": "mlp", "seed": 9}]
        config = parse_config(document)
        assert config.dataset.seed == 7
        assert config.search.seed == 8
        assert dict(config.classifiers)["mlp"]["seed"] == 9

    def test_other_classifiers_get_no_seed_injected(self):
        params = dict(parse_config(_minimal()).classifiers)
        assert "seed" not in params["knn"]
        assert "seed" not in params["lda"]


class TestStrictKeys:
    def test_unknown_top_level_key(self):
        document = _minimal()
        document["serach"] = {}
        with pytest.raises(ConfigError, match="serach"):
            parse_config(document)

    def test_unknown_dataset_key(self):
        document = _minimal()
        document["dataset"]["samplerate"] = 128.0
        with pytest.raises(ConfigError, match="samplerate"):
            parse_config(document)

    def test_unknown_class_spec_key(self):
        document = _minimal()
        document["dataset"]["classes"]["low"]["amp"] = 2.0
        with pytest.raises(ConfigError, match=r"dataset\.classes\.low"):
            parse_config(document)

    @pytest.mark.parametrize(
        "section",
        ["search", "nonlinear", "selection", "evaluation", "ratios", "spectrum"],
    )
    def test_unknown_section_key(self, section):
        document = _minimal()
        document[section] = {"bogus_option": 1}
        with pytest.raises(ConfigError, match="bogus_option"):
            parse_config(document)

    def test_unknown_classifier_parameter(self):
        document = _minimal()
        document["classifiers"] = [{"kind": "knn", "neighbors": 3}]
        with pytest.raises(ConfigError, match="neighbors"):
            parse_config(document)

    def test_error_lists_allowed_keys(self):
        document = _minimal()
        document["search"] = {"bogus_option": 1}
        with pytest.raises(ConfigError, match="population_size"):
            parse_config(document)


class TestTypeChecking:
    def test_root_must_be_object(self):
        with pytest.raises(ConfigError, match="object"):
            parse_config(["not", "a", "dict"])

    def test_seed_must_be_integer(self):
        document = _minimal()
        document["seed"] = 1.5
        with pytest.raises(ConfigError, match="integer"):
            parse_config(document)

    def test_boolean_is_not_an_integer(self):
        document = _minimal()
        document["seed"] = True
        with pytest.raises(ConfigError, match="integer"):
            parse_config(document)

    def test_enabled_must_be_boolean(self):
        document = _minimal()
        document["search"] = {"enabled": 1}
        with pytest.raises(ConfigError, match="boolean"):
            parse_config(document)

    def test_fitness_mode_checked(self):
        document = _minimal()
        document["search"] = {"fitness_mode": "trainacc"}
        with pytest.raises(ConfigError, match="fitness_mode"):
            parse_config(document)

    def test_selection_objective_checked(self):
        document = _minimal()
        document["selection"] = {"objective": "f1"}
        with pytest.raises(ConfigError, match="objective"):
            parse_config(document)

    def test_spectrum_source_checked(self):
        document = _minimal()
        document["spectrum"] = {"source": "wavelet"}
        with pytest.raises(ConfigError, match="source"):
            parse_config(document)

    @pytest.mark.parametrize("folds", [5, [], [1], [True], ["5"], [5.0]])
    def test_bad_folds_rejected(self, folds):
        document = _minimal()
        document["evaluation"] = {"folds": folds}
        with pytest.raises(ConfigError, match="folds"):
            parse_config(document)

    def test_good_folds_accepted(self):
        document = _minimal()
        document["evaluation"] = {"folds": [2, 4, 10]}
        assert parse_config(document).evaluation.folds == (2, 4, 10)


class TestDatasetSection:
    def test_dataset_required(self):
        with pytest.raises(ConfigError, match="dataset"):
            parse_config({"seed": 0})

    def test_kind_required(self):
        document = _minimal()
        del document["dataset"]["kind"]
        with pytest.raises(ConfigError, match="kind"):
            parse_config(document)

    def test_unknown_kind(self):
        document = _minimal()
        document["dataset"]["kind"] = "parquet"
        with pytest.raises(ConfigError, match="parquet"):
            parse_config(document)

    @pytest.mark.parametrize("missing", ["sample_rate", "length", "classes"])
    def test_synthetic_requires_core_fields(self, missing):
        document = _minimal()
        del document["dataset"][missing]
        with pytest.raises(ConfigError):
            parse_config(document)

    def test_tones_must_be_pairs(self):
        document = _minimal()
        document["dataset"]["classes"]["low"]["tones"] = [[10.0]]
        with pytest.raises(ConfigError, match="tones"):
            parse_config(document)

    def test_count_must_be_positive(self):
        document = _minimal()
        document["dataset"]["classes"]["low"]["count"] = 0
        with pytest.raises(ConfigError, match="count"):
            parse_config(document)

    def test_noise_sigma_defaults_to_zero(self):
        document = _minimal()
        del document["dataset"]["classes"]["low"]["noise_sigma"]
        config = parse_config(document)
        assert config.dataset.classes["low"]["noise_sigma"] == 0.0

    def test_directories_kind(self):
        document = _minimal()
        document["dataset"] = {
            "kind": "directories",
            "sample_rate": 173.61,
            "classes": {"A": "data/setA", "E": "data/setE"},
        }
        config = parse_config(document)
        assert config.dataset.classes == {"A": "data/setA", "E": "data/setE"}
        assert config.dataset.length is None

    def test_directories_path_must_be_string(self):
        document = _minimal()
        document["dataset"] = {
            "kind": "directories",
            "sample_rate": 173.61,
            "classes": {"A": 12},
        }
        with pytest.raises(ConfigError, match="directory path"):
            parse_config(document)

    def test_records_csv_needs_path(self):
        document = _minimal()
        document["dataset"] = {"kind": "records_csv", "sample_rate": 128.0}
        with pytest.raises(ConfigError, match="path"):
            parse_config(document)

    def test_records_csv_round(self):
        document = _minimal()
        document["dataset"] = {"kind": "records_csv", "path": "records.csv"}
        config = parse_config(document)
        assert config.dataset.path == "records.csv"
        assert config.dataset.sample_rate is None


class TestTaskSection:
    def test_restriction_and_groups(self):
        document = _minimal()
        document["task"] = {
            "name": "healthy-vs-seizure",
            "classes": ["A", "B", "E"],
            "groups": {"healthy": ["A", "B"], "seizure": ["E"]},
        }
        task = parse_config(document).task
        assert task.name == "healthy-vs-seizure"
        assert task.classes == ("A", "B", "E")
        assert task.groups == {"healthy": ["A", "B"], "seizure": ["E"]}

    def test_classes_must_be_label_list(self):
        document = _minimal()
        document["task"] = {"classes": "A"}
        with pytest.raises(ConfigError, match="classes"):
            parse_config(document)

    def test_group_values_must_be_nonempty_lists(self):
        document = _minimal()
        document["task"] = {"groups": {"healthy": []}}
        with pytest.raises(ConfigError, match="healthy"):
            parse_config(document)


class TestClassifierSection:
    def test_unknown_kind_lists_choices(self):
        document = _minimal()
        document["classifiers"] = [{"kind": "svm"}]
        with pytest.raises(ConfigError, match="adaboost"):
            parse_config(document)

    def test_empty_list_rejected(self):
        document = _minimal()
        document["classifiers"] = []
        with pytest.raises(ConfigError, match="non-empty"):
            parse_config(document)

    def test_non_list_rejected(self):
        document = _minimal()
        document["classifiers"] = {"kind": "knn"}
        with pytest.raises(ConfigError, match="list"):
            parse_config(document)

    def test_parameters_flow_through(self):
        document = _minimal()
        document["classifiers"] = [
            {"kind": "knn", "n_neighbors": 3},
            {"kind": "dtree", "max_depth": 4, "min_leaf": 2},
        ]
        config = parse_config(document)
        assert config.classifiers == (
            ("knn", {"n_neighbors": 3}),
            ("dtree", {"max_depth": 4, "min_leaf": 2}),
        )


class TestCrossSectionRules:
    def test_both_feature_stages_disabled_is_an_error(self):
        document = _minimal()
        document["search"] = {"enabled": False}
        document["nonlinear"] = {"enabled": False}
        with pytest.raises(ConfigError, match="enabled"):
            parse_config(document)

    def test_one_stage_enabled_is_fine(self):
        document = _minimal()
        document["search"] = {"enabled": False}
        parse_config(document)


class TestRoundTrip:
    def test_to_dict_reparses_to_equal_config(self):
        document = _minimal()
        document["seed"] = 42
        document["selection"] = {"enabled": True, "positive_label": "high"}
        document["ratios"] = {"enabled": True, "feature_names": ["f_1", "f_5"]}
        config = parse_config(document)
        assert parse_config(config.to_dict()) == config

    def test_to_dict_is_json_serializable(self):
        config = parse_config(_minimal())
        payload = json.loads(json.dumps(config.to_dict()))
        assert parse_config(payload) == config

    def test_load_config_reads_file(self, tmp_path):
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps(_minimal()))
        assert load_config(path) == parse_config(_minimal())

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="no such config file"):
            load_config(tmp_path / "absent.json")

    def test_load_config_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="bad JSON"):
            load_config(path)
