"""Genetic interval search: operators, fitness, the loop, and round trips."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gafds.errors import InsufficientDataError
from gafds.search import (
    FitnessEvaluator,
    FrequencyIntervalSearch,
    GaConfig,
    IntervalGenome,
    evaluate_fitness,
    extract_interval_features,
    gaussian_mutation,
    genome_features,
    genome_interval_bins,
    interval_feature_names,
    load_search_result,
    resolved_intervals,
    roulette_spin,
    roulette_weights,
    run_search,
    save_search_result,
    search_result_from_dict,
    search_result_to_dict,
    select_parents,
    two_point_crossover,
)
from gafds.spectrum import Spectrum


def _fast_config(**overrides):
    base = dict(
        population_size=20,
        max_generations=10,
        mutation_sigma=2.0,
        stagnation_window=None,
        seed=0,
    )
    base.update(overrides)
    return GaConfig(**base)


class TestGaConfig:
    def test_defaults(self):
        cfg = GaConfig()
        assert cfg.population_size == 100
        assert cfg.max_generations == 100
        assert cfg.crossover_prob == 0.8
        assert cfg.mutation_prob == 0.1
        assert cfg.elitism_count == 1
        assert cfg.penalty == 1.0
        assert cfg.stagnation_window == 25

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            GaConfig(population_size=1)
        with pytest.raises(ValueError):
            GaConfig(crossover_prob=1.5)
        with pytest.raises(ValueError):
            GaConfig(mutation_prob=-0.1)
        with pytest.raises(ValueError):
            GaConfig(elitism_count=-1)
        with pytest.raises(ValueError):
            GaConfig(fitness_mode="other")


class TestGenome:
    def test_pairs(self):
        g = IntervalGenome(np.array([1.0, 2.0, 3.0, 4.0]), max_hz=10.0)
        assert g.n_intervals == 2
        assert g.pairs() == [(1.0, 2.0), (3.0, 4.0)]

    def test_odd_length_rejected(self):
        with pytest.raises(ValueError):
            IntervalGenome(np.array([1.0, 2.0, 3.0]), max_hz=10.0)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            IntervalGenome(np.array([1.0, 11.0]), max_hz=10.0)
        with pytest.raises(ValueError):
            IntervalGenome(np.array([-1.0, 2.0]), max_hz=10.0)


class TestRoulette:
    def test_weight_formula(self):
        w = roulette_weights([1.0, 3.0])
        eps = 1e-6 * 3.0
        assert w[0] == pytest.approx(eps)
        assert w[1] == pytest.approx(2.0 + eps)

    def test_equal_fitness_uniform_wheel(self):
        w = roulette_weights([2.0, 2.0, 2.0])
        assert np.allclose(w, w[0])

    def test_spin_proportions(self):
        # weights 1:3 -> second slot ~75% of draws
        rng = np.random.default_rng(0)
        idx = roulette_spin([1.0, 3.0], 100_000, rng)
        assert np.mean(idx == 1) == pytest.approx(0.75, abs=0.02)

    def test_spin_rejects_zero_wheel(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            roulette_spin([0.0, 0.0], 1, rng)

    def test_select_parents_worst_still_possible(self):
        rng = np.random.default_rng(0)
        idx = select_parents([0.0, 1.0], 200_000, rng)
        # eps floor keeps a sliver of mass on the worst individual
        assert 0 < np.sum(idx == 0) < 2000


class TestCrossover:
    def test_cuts_1_3_swap_middle(self):
        # default_rng(2).choice(5, 2, replace=False) yields cuts (1, 3)
        a = IntervalGenome(np.array([1.0, 2.0, 3.0, 4.0]), max_hz=10.0)
        b = IntervalGenome(np.array([5.0, 6.0, 7.0, 8.0]), max_hz=10.0)
        c1, c2 = two_point_crossover(a, b, np.random.default_rng(2))
        assert c1.bounds.tolist() == [1.0, 6.0, 7.0, 4.0]
        assert c2.bounds.tolist() == [5.0, 2.0, 3.0, 8.0]

    @given(seed=st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=60, deadline=None)
    def test_positionwise_gene_multiset_preserved(self, seed):
        a = IntervalGenome(np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), max_hz=10.0)
        b = IntervalGenome(np.array([9.0, 8.0, 7.0, 6.5, 5.5, 4.5]), max_hz=10.0)
        c1, c2 = two_point_crossover(a, b, np.random.default_rng(seed))
        for i in range(6):
            assert {c1.bounds[i], c2.bounds[i]} == {a.bounds[i], b.bounds[i]}

    @given(seed=st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=60, deadline=None)
    def test_some_segment_always_swaps(self, seed):
        # cuts are distinct, so children never equal the parents verbatim
        a = IntervalGenome(np.zeros(6), max_hz=10.0)
        b = IntervalGenome(np.full(6, 10.0), max_hz=10.0)
        c1, _ = two_point_crossover(a, b, np.random.default_rng(seed))
        assert c1.bounds.max() == 10.0


class TestMutation:
    def _genome(self):
        return IntervalGenome(np.array([2.0, 4.0, 6.0, 8.0]), max_hz=10.0)

    def test_prob_zero_identity(self):
        g = self._genome()
        out = gaussian_mutation(g, 0.0, 5.0, np.random.default_rng(0))
        assert np.array_equal(out.bounds, g.bounds)

    def test_sigma_zero_identity(self):
        g = self._genome()
        out = gaussian_mutation(g, 1.0, 0.0, np.random.default_rng(0))
        assert np.array_equal(out.bounds, g.bounds)

    def test_clamped_to_range(self):
        g = self._genome()
        out = gaussian_mutation(g, 1.0, 1000.0, np.random.default_rng(0))
        assert np.all(out.bounds >= 0.0)
        assert np.all(out.bounds <= 10.0)

    def test_rng_stream_shape_fixed(self):
        # mask and noise are drawn every call, so downstream draws agree
        # whatever the mutation outcome was
        g = self._genome()
        r1 = np.random.default_rng(42)
        gaussian_mutation(g, 0.0, 1.0, r1)
        r2 = np.random.default_rng(42)
        gaussian_mutation(g, 1.0, 1.0, r2)
        assert r1.random() == r2.random()

    @given(seed=st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=50, deadline=None)
    def test_bounds_always_in_range(self, seed):
        g = self._genome()
        out = gaussian_mutation(g, 0.7, 50.0, np.random.default_rng(seed))
        assert np.all((out.bounds >= 0.0) & (out.bounds <= 10.0))


class TestGenomeFeatures:
    def test_bins_and_none_for_invalid(self):
        g = IntervalGenome(np.array([1.0, 2.0, 2.0, 1.0]), max_hz=10.0)
        bins = genome_interval_bins(g, bin_hz=0.5, n_bins=100)
        assert bins == [(2, 4), None]

    def test_feature_values_hand_computed(self):
        g = IntervalGenome(np.array([1.0, 2.0, 2.0, 1.0]), max_hz=2.0)
        mags = np.array([[0.0, 1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0, 9.0]])
        values, valid = genome_features(g, mags, bin_hz=0.5)
        assert valid.tolist() == [True, False]
        # bins 2..4 inclusive: means 3.0 and 8.0
        assert values.shape == (2, 1)
        assert values[:, 0].tolist() == [3.0, 8.0]

    def test_all_invalid_empty_block(self):
        g = IntervalGenome(np.array([2.0, 1.0]), max_hz=10.0)
        mags = np.ones((3, 21))
        values, valid = genome_features(g, mags, bin_hz=0.5)
        assert values.shape == (3, 0)
        assert not valid.any()


class TestFitness:
    def test_separating_interval_scores_one(self, small_spectra, small_dataset):
        ev = FitnessEvaluator(small_spectra, small_dataset.labels, seed=0)
        genome = IntervalGenome(np.array([28.0, 32.0]), max_hz=ev.max_hz)
        assert ev.evaluate(genome) == pytest.approx(1.0)

    def test_invalid_pair_costs_penalty(self, small_spectra, small_dataset):
        ev = FitnessEvaluator(small_spectra, small_dataset.labels, penalty=1.0, seed=0)
        good = IntervalGenome(np.array([28.0, 32.0]), max_hz=ev.max_hz)
        mixed = IntervalGenome(
            np.array([28.0, 32.0, 5.0, 5.0]), max_hz=ev.max_hz
        )
        assert ev.evaluate(mixed) == pytest.approx(ev.evaluate(good) - 1.0)

    def test_all_invalid_scores_minus_penalties(self, small_spectra, small_dataset):
        ev = FitnessEvaluator(small_spectra, small_dataset.labels, penalty=2.0, seed=0)
        bad = IntervalGenome(np.array([5.0, 5.0, 7.0, 7.0]), max_hz=ev.max_hz)
        assert ev.evaluate(bad) == pytest.approx(-4.0)

    def test_same_evaluator_is_pure(self, small_spectra, small_dataset):
        ev = FitnessEvaluator(small_spectra, small_dataset.labels, seed=3)
        g = IntervalGenome(np.array([10.0, 20.0, 25.0, 35.0]), max_hz=ev.max_hz)
        assert ev.evaluate(g) == ev.evaluate(g)

    def test_resubstitution_mode(self, small_spectra, small_dataset):
        ev = FitnessEvaluator(
            small_spectra, small_dataset.labels, fitness_mode="resubstitution"
        )
        genome = IntervalGenome(np.array([28.0, 32.0]), max_hz=ev.max_hz)
        assert ev.evaluate(genome) == pytest.approx(1.0)

    def test_mixed_bin_grids_rejected(self, small_dataset):
        a = Spectrum(magnitudes=np.ones(10), bin_hz=0.5, source="fourier")
        b = Spectrum(magnitudes=np.ones(11), bin_hz=0.5, source="fourier")
        with pytest.raises(ValueError):
            FitnessEvaluator([a, b], ["x", "y"])

    def test_single_class_rejected(self, small_spectra, small_dataset):
        with pytest.raises(InsufficientDataError):
            FitnessEvaluator(small_spectra, ["same"] * len(small_dataset))

    def test_one_shot_helper_matches(self, small_spectra, small_dataset):
        ev = FitnessEvaluator(small_spectra, small_dataset.labels, seed=0)
        g = IntervalGenome(np.array([12.0, 22.0]), max_hz=ev.max_hz)
        assert evaluate_fitness(g, small_spectra, small_dataset.labels) == ev.evaluate(g)


class TestRunSearch:
    def test_finds_separating_band(self, small_spectra, small_dataset):
        result = run_search(
            small_spectra, small_dataset.labels, n_intervals=2, config=_fast_config()
        )
        assert result.fitness == pytest.approx(1.0)
        assert len(result.intervals) >= 1

    def test_history_non_decreasing(self, small_spectra, small_dataset):
        result = run_search(
            small_spectra, small_dataset.labels, n_intervals=2, config=_fast_config()
        )
        h = np.asarray(result.history)
        assert np.all(np.diff(h) >= 0)
        assert result.fitness == h[-1]

    def test_deterministic(self, small_spectra, small_dataset):
        r1 = run_search(small_spectra, small_dataset.labels, 2, _fast_config())
        r2 = run_search(small_spectra, small_dataset.labels, 2, _fast_config())
        assert np.array_equal(r1.genome.bounds, r2.genome.bounds)
        assert r1.history == r2.history

    def test_seed_changes_trajectory(self, small_spectra, small_dataset):
        r1 = run_search(small_spectra, small_dataset.labels, 2, _fast_config(seed=0))
        r2 = run_search(small_spectra, small_dataset.labels, 2, _fast_config(seed=1))
        assert not np.array_equal(r1.genome.bounds, r2.genome.bounds)

    def test_thread_count_does_not_change_result(self, small_spectra, small_dataset):
        r1 = run_search(small_spectra, small_dataset.labels, 2, _fast_config(n_jobs=1))
        r2 = run_search(small_spectra, small_dataset.labels, 2, _fast_config(n_jobs=3))
        assert np.array_equal(r1.genome.bounds, r2.genome.bounds)
        assert r1.history == r2.history

    def test_stagnation_stops_early(self, small_spectra, small_dataset):
        cfg = _fast_config(max_generations=60, stagnation_window=3)
        result = run_search(small_spectra, small_dataset.labels, 2, cfg)
        assert len(result.history) < 60

    def test_genome_within_grid(self, small_spectra, small_dataset):
        result = run_search(small_spectra, small_dataset.labels, 2, _fast_config())
        top = (small_spectra[0].n_bins - 1) * small_spectra[0].bin_hz
        assert np.all(result.genome.bounds >= 0)
        assert np.all(result.genome.bounds <= top)


class TestExtraction:
    def test_names_default(self):
        assert interval_feature_names(3) == ("f_1", "f_2", "f_3")

    def test_extract_matrix(self, small_spectra, small_dataset):
        result = run_search(small_spectra, small_dataset.labels, 2, _fast_config())
        fm = extract_interval_features(
            result.intervals,
            small_spectra,
            small_dataset.labels,
            small_dataset.record_ids,
        )
        assert fm.n_records == len(small_dataset)
        assert fm.n_features == len(result.intervals)
        assert fm.names == interval_feature_names(len(result.intervals))

    def test_resolved_intervals_drop_invalid(self):
        g = IntervalGenome(np.array([1.0, 2.0, 4.0, 3.0]), max_hz=10.0)
        ivs = resolved_intervals(g, bin_hz=0.5, n_bins=100)
        assert len(ivs) == 1
        assert (ivs[0].lo_hz, ivs[0].hi_hz) == (1.0, 2.0)


class TestEstimatorWrapper:
    def test_fit_transform_separates(self, small_dataset):
        X = np.vstack([r.values for r in small_dataset.records])
        y = np.asarray(small_dataset.labels)
        est = FrequencyIntervalSearch(
            n_intervals=2,
            sample_rate=128.0,
            population_size=20,
            max_generations=10,
            mutation_sigma=2.0,
            stagnation_window=None,
            seed=0,
        )
        feats = est.fit(X, y).transform(X)
        assert feats.shape[0] == len(y)
        assert feats.shape[1] == len(est.result_.intervals)

    def test_get_params_round_trip(self):
        est = FrequencyIntervalSearch(n_intervals=3, sample_rate=64.0)
        params = est.get_params()
        est2 = FrequencyIntervalSearch(**params)
        assert est2.n_intervals == 3
        assert est2.sample_rate == 64.0


class TestSerialization:
    def test_dict_round_trip(self, small_spectra, small_dataset):
        result = run_search(small_spectra, small_dataset.labels, 2, _fast_config())
        back = search_result_from_dict(search_result_to_dict(result))
        assert np.array_equal(back.genome.bounds, result.genome.bounds)
        assert back.genome.max_hz == result.genome.max_hz
        assert back.fitness == result.fitness
        assert back.history == result.history
        assert [
            (iv.lo_hz, iv.hi_hz) for iv in back.intervals
        ] == [(iv.lo_hz, iv.hi_hz) for iv in result.intervals]

    def test_file_round_trip(self, tmp_path, small_spectra, small_dataset):
        result = run_search(small_spectra, small_dataset.labels, 2, _fast_config())
        path = tmp_path / "search.json"
        save_search_result(result, path)
        back = load_search_result(path)
        assert np.array_equal(back.genome.bounds, result.genome.bounds)
        assert back.fitness == result.fitness
