"""Binary-mask subset selection: objective oracles, GA operators, the loop."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gafds.features import FeatureMatrix
from gafds.search import GaConfig
from gafds.selection import (
    GeneticSubsetSelector,
    SubsetObjective,
    bitflip_mutation,
    default_selection_config,
    load_selection_result,
    run_selection,
    save_selection_result,
    selection_result_from_dict,
    selection_result_to_dict,
    subset_objective,
    uniform_crossover,
)


def _engineered():
    """Column 0 separates the classes perfectly; the rest is noise."""
    rng = np.random.default_rng(0)
    n_per = 10
    informative = np.concatenate(
        [rng.normal(0.0, 0.1, n_per), rng.normal(5.0, 0.1, n_per)]
    )
    noise = rng.standard_normal((2 * n_per, 3))
    X = np.column_stack([informative, noise])
    y = np.asarray(["neg"] * n_per + ["pos"] * n_per)
    return X, y


def _small_config(d, **overrides):
    base = dict(
        population_size=12,
        max_generations=8,
        crossover_prob=0.8,
        mutation_prob=1.0 / d,
        mutation_sigma=0.0,
        elitism_count=1,
        penalty=0.0,
        stagnation_window=None,
        seed=0,
    )
    base.update(overrides)
    return GaConfig(**base)


class TestSubsetObjective:
    def test_perfect_column_scores_zero(self):
        X, y = _engineered()
        obj = SubsetObjective(X, y)
        assert obj(np.array([True, False, False, False])) == pytest.approx(0.0)

    def test_all_zero_mask_is_infinite(self):
        X, y = _engineered()
        obj = SubsetObjective(X, y)
        assert obj(np.zeros(4, dtype=bool)) == float("inf")

    def test_corrected_penalizes_degenerate_literal_rewards_it(self):
        # a constant feature makes the wrapped discriminant predict one
        # class for every row: TPR = FPR = 0. The corrected objective
        # scores that a full unit worse than a perfect subset; the
        # uncorrected (literal) form scores it strictly better.
        X, y = _engineered()
        X = X.copy()
        X[:, 1] = 1.0
        perfect = np.array([True, False, False, False])
        degenerate = np.array([False, True, False, False])
        corrected = SubsetObjective(X, y, mode="corrected")
        literal = SubsetObjective(X, y, mode="literal")
        assert corrected(perfect) == pytest.approx(0.0)
        assert corrected(degenerate) == pytest.approx(1.0)
        assert literal(degenerate) == pytest.approx(-1.0)
        assert literal(degenerate) < literal(perfect)

    def test_mask_arity_checked(self):
        X, y = _engineered()
        obj = SubsetObjective(X, y)
        with pytest.raises(ValueError):
            obj(np.array([True, False]))

    def test_invalid_mode_rejected(self):
        X, y = _engineered()
        with pytest.raises(ValueError):
            SubsetObjective(X, y, mode="other")

    def test_one_shot_helper_matches(self):
        X, y = _engineered()
        mask = np.array([True, False, True, False])
        assert subset_objective(mask, X, y, seed=3) == SubsetObjective(X, y, seed=3)(mask)

    def test_objective_is_pure(self):
        X, y = _engineered()
        obj = SubsetObjective(X, y)
        mask = np.array([True, True, False, False])
        assert obj(mask) == obj(mask)


class TestOperators:
    @given(seed=st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=50, deadline=None)
    def test_uniform_crossover_positionwise(self, seed):
        a = np.array([True, True, False, False, True, False])
        b = np.array([False, True, True, False, False, True])
        c1, c2 = uniform_crossover(a, b, np.random.default_rng(seed))
        for i in range(len(a)):
            assert {bool(c1[i]), bool(c2[i])} == {bool(a[i]), bool(b[i])}

    def test_uniform_crossover_children_complementary(self):
        a = np.zeros(64, dtype=bool)
        b = np.ones(64, dtype=bool)
        c1, c2 = uniform_crossover(a, b, np.random.default_rng(0))
        assert np.array_equal(c1, ~c2)
        # with 64 fair coins both all-keep and all-swap are implausible
        assert 0 < c1.sum() < 64

    def test_bitflip_prob_zero_identity(self):
        mask = np.array([True, False, True])
        out = bitflip_mutation(mask, 0.0, np.random.default_rng(0))
        assert np.array_equal(out, mask)

    def test_bitflip_prob_one_complements(self):
        mask = np.array([True, False, True, False])
        out = bitflip_mutation(mask, 1.0, np.random.default_rng(0))
        assert np.array_equal(out, ~mask)

    @given(seed=st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=50, deadline=None)
    def test_bitflip_output_is_boolean(self, seed):
        mask = np.array([True, False, True, False, False])
        out = bitflip_mutation(mask, 0.4, np.random.default_rng(seed))
        assert out.dtype == bool
        assert out.shape == mask.shape


class TestDefaults:
    def test_default_selection_config(self):
        cfg = default_selection_config(10, seed=4)
        assert cfg.population_size == 50
        assert cfg.max_generations == 60
        assert cfg.crossover_prob == 0.8
        assert cfg.mutation_prob == pytest.approx(0.1)
        assert cfg.elitism_count == 1
        assert cfg.stagnation_window is None
        assert cfg.seed == 4


class TestRunSelection:
    def test_keeps_informative_column(self):
        X, y = _engineered()
        result = run_selection(X, y, config=_small_config(4))
        assert result.mask[0] is True
        assert result.objective == pytest.approx(0.0)

    def test_history_non_increasing(self):
        X, y = _engineered()
        result = run_selection(X, y, config=_small_config(4))
        h = np.asarray(result.history)
        assert np.all(np.diff(h) <= 0)
        assert result.objective == h[-1]

    def test_deterministic(self):
        X, y = _engineered()
        r1 = run_selection(X, y, config=_small_config(4))
        r2 = run_selection(X, y, config=_small_config(4))
        assert r1.mask == r2.mask
        assert r1.history == r2.history

    def test_feature_matrix_input_carries_names(self):
        X, y = _engineered()
        fm = FeatureMatrix(
            names=("band", "n1", "n2", "n3"),
            values=X,
            labels=tuple(y),
            record_ids=tuple(f"r{i}" for i in range(len(y))),
        )
        result = run_selection(fm, config=_small_config(4))
        assert result.feature_names == ("band", "n1", "n2", "n3")
        assert "band" in result.selected_names()

    def test_plain_matrix_default_names(self):
        X, y = _engineered()
        result = run_selection(X, y, config=_small_config(4))
        assert result.feature_names == ("f_1", "f_2", "f_3", "f_4")

    def test_plain_matrix_requires_labels(self):
        X, _ = _engineered()
        with pytest.raises(ValueError):
            run_selection(X, None, config=_small_config(4))


class TestSelectorEstimator:
    def test_fit_transform(self):
        X, y = _engineered()
        sel = GeneticSubsetSelector(population_size=12, max_generations=8, seed=0)
        out = sel.fit(X, y).transform(X)
        assert out.shape[0] == X.shape[0]
        assert out.shape[1] == sel.get_support().sum()
        assert sel.get_support()[0]

    def test_transform_arity_checked(self):
        X, y = _engineered()
        sel = GeneticSubsetSelector(population_size=12, max_generations=8, seed=0)
        sel.fit(X, y)
        with pytest.raises(ValueError):
            sel.transform(X[:, :2])

    def test_get_params_round_trip(self):
        sel = GeneticSubsetSelector(mode="literal", positive_label="S")
        params = sel.get_params()
        sel2 = GeneticSubsetSelector(**params)
        assert sel2.mode == "literal"
        assert sel2.positive_label == "S"


class TestSerialization:
    def test_dict_round_trip(self):
        X, y = _engineered()
        result = run_selection(X, y, config=_small_config(4))
        back = selection_result_from_dict(selection_result_to_dict(result))
        assert back.mask == result.mask
        assert back.objective == result.objective
        assert back.history == result.history
        assert back.feature_names == result.feature_names

    def test_file_round_trip(self, tmp_path):
        X, y = _engineered()
        result = run_selection(X, y, config=_small_config(4))
        path = tmp_path / "mask.json"
        save_selection_result(result, path)
        back = load_selection_result(path)
        assert back.mask == result.mask
        assert back.objective == result.objective
