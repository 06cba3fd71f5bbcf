"""Genetic search for discriminative frequency intervals.

A genome is a flat vector of 2*alpha Hz bounds; consecutive pairs
(lo, hi) define candidate intervals. Fitness = held-out linear
discriminant accuracy on the interval-mean features minus a penalty per
pair whose bounds collapse after bin mapping. Invalid pairs contribute no
feature column; they are penalized, never repaired.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, TransformerMixin

from .classifiers.lda import LinearDiscriminant
from .dataset import TimeSeries, stratified_fold_assignments
from .errors import DataFormatError, InsufficientDataError
from .features import FeatureMatrix
from .spectrum import (
    FOURIER,
    FrequencyInterval,
    Spectrum,
    hz_to_bin,
    spectrum_of,
)
from .validation import check_labels, check_signal_matrix, require

SPLIT_ACCURACY = "split_accuracy"
RESUBSTITUTION = "resubstitution"
FITNESS_MODES = (SPLIT_ACCURACY, RESUBSTITUTION)


@dataclass(frozen=True)
class GaConfig:
    """Knobs for the generational GA.

    mutation_sigma None means 0.05 * the search band top frequency,
    resolved at run time. stagnation_window None disables early stopping.
    """

    population_size: int = 100
    max_generations: int = 100
    crossover_prob: float = 0.8
    mutation_prob: float = 0.1
    mutation_sigma: float | None = None
    elitism_count: int = 1
    penalty: float = 1.0
    stagnation_window: int | None = 25
    seed: int = 0
    n_jobs: int = 1
    fitness_mode: str = SPLIT_ACCURACY

    def __post_init__(self):
        require(self.population_size >= 2, "population_size must be >= 2")
        require(self.max_generations >= 1, "max_generations must be >= 1")
        require(0.0 <= self.crossover_prob <= 1.0, "crossover_prob must be in [0, 1]")
        require(0.0 <= self.mutation_prob <= 1.0, "mutation_prob must be in [0, 1]")
        if self.mutation_sigma is not None:
            require(self.mutation_sigma >= 0.0, "mutation_sigma must be >= 0")
        require(0 <= self.elitism_count < self.population_size,
                "elitism_count must be in [0, population_size)")
        require(self.penalty >= 0.0, "penalty must be >= 0")
        if self.stagnation_window is not None:
            require(self.stagnation_window >= 1, "stagnation_window must be >= 1")
        require(self.fitness_mode in FITNESS_MODES,
                f"fitness_mode must be one of {FITNESS_MODES}")


@dataclass(frozen=True)
class IntervalGenome:
    """2*alpha interval bounds in Hz, each clamped to [0, max_hz]."""

    bounds: np.ndarray
    max_hz: float

    def __post_init__(self):
        bounds = np.asarray(self.bounds, dtype=float)
        require(bounds.ndim == 1, "bounds must be a vector")
        require(len(bounds) >= 2 and len(bounds) % 2 == 0,
                "bounds length must be a positive even number")
        require(bool(np.all(np.isfinite(bounds))), "bounds must be finite")
        require(math.isfinite(self.max_hz) and self.max_hz > 0, "max_hz must be positive")
        require(bool(np.all((bounds >= 0) & (bounds <= self.max_hz))),
                f"bounds must lie in [0, {self.max_hz}]")
        bounds = bounds.copy()
        bounds.setflags(write=False)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "max_hz", float(self.max_hz))

    @property
    def n_intervals(self) -> int:
        return len(self.bounds) // 2

    def pairs(self) -> list[tuple[float, float]]:
        return [(float(self.bounds[2 * i]), float(self.bounds[2 * i + 1]))
                for i in range(self.n_intervals)]

    def intervals(self) -> list[FrequencyInterval]:
        return [FrequencyInterval(lo, hi) for lo, hi in self.pairs()]


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a run: champion genome, fitness trace, usable intervals."""

    genome: IntervalGenome
    fitness: float
    history: tuple[float, ...]
    intervals: tuple[FrequencyInterval, ...] = field(default_factory=tuple)


# ---------------------------------------------------------------------------
# GA operators
# ---------------------------------------------------------------------------

def roulette_weights(fitnesses) -> np.ndarray:
    """Shift fitnesses to positive wheel weights.

    w_i = f_i - min(f) + eps with eps = 1e-6 * (max(f) - min(f) + 1), so
    the worst individual keeps a sliver of probability and equal fitness
    yields a uniform wheel.
    """
    f = np.asarray(fitnesses, dtype=float)
    require(len(f) > 0, "no fitnesses")
    require(bool(np.all(np.isfinite(f))), "fitnesses must be finite")
    eps = 1e-6 * (f.max() - f.min() + 1.0)
    return f - f.min() + eps


def roulette_spin(weights, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `count` indices with probability proportional to weights."""
    w = np.asarray(weights, dtype=float)
    require(len(w) > 0, "empty wheel")
    require(bool(np.all(np.isfinite(w)) and np.all(w >= 0)), "weights must be >= 0 and finite")
    total = w.sum()
    require(total > 0, "wheel has zero total weight")
    cum = np.cumsum(w)
    draws = rng.random(count) * total
    return np.searchsorted(cum, draws, side="right").clip(0, len(w) - 1)


def select_parents(fitnesses, count: int, rng: np.random.Generator) -> np.ndarray:
    return roulette_spin(roulette_weights(fitnesses), count, rng)


def two_point_crossover(
    a: IntervalGenome, b: IntervalGenome, rng: np.random.Generator
) -> tuple[IntervalGenome, IntervalGenome]:
    """Swap the middle segment between two distinct cuts in {0..len}.

    Cuts (0, len) swap everything, i.e. children are the crossed parents.
    """
    require(len(a.bounds) == len(b.bounds), "genomes must have equal length")
    length = len(a.bounds)
    cuts = np.sort(rng.choice(length + 1, size=2, replace=False))
    c1, c2 = int(cuts[0]), int(cuts[1])
    child1 = np.concatenate([a.bounds[:c1], b.bounds[c1:c2], a.bounds[c2:]])
    child2 = np.concatenate([b.bounds[:c1], a.bounds[c1:c2], b.bounds[c2:]])
    return (
        IntervalGenome(child1, a.max_hz),
        IntervalGenome(child2, b.max_hz),
    )


def gaussian_mutation(
    genome: IntervalGenome,
    prob: float,
    sigma: float,
    rng: np.random.Generator,
) -> IntervalGenome:
    """Per-gene Gaussian perturbation, clamped back into [0, max_hz].

    The mask and noise vectors are drawn for every gene on every call so
    the generator stream advances identically regardless of outcomes;
    prob = 0 or sigma = 0 leave the genome bitwise unchanged.
    """
    mask = rng.random(len(genome.bounds)) < prob
    noise = rng.normal(0.0, 1.0, size=len(genome.bounds))
    mutated = genome.bounds + mask * (sigma * noise)
    return IntervalGenome(np.clip(mutated, 0.0, genome.max_hz), genome.max_hz)


# ---------------------------------------------------------------------------
# Fitness
# ---------------------------------------------------------------------------

def _uniform_magnitude_matrix(spectra: list[Spectrum]) -> tuple[np.ndarray, float]:
    require(len(spectra) > 0, "no spectra", InsufficientDataError)
    n_bins = spectra[0].n_bins
    bin_hz = spectra[0].bin_hz
    for s in spectra:
        if s.n_bins != n_bins or s.bin_hz != bin_hz:
            raise ValueError("all spectra must share one bin grid for interval search")
    return np.vstack([s.magnitudes for s in spectra]), bin_hz


def genome_interval_bins(genome: IntervalGenome, bin_hz: float, n_bins: int):
    """Resolve each pair to (i, j) bins or None when invalid (i >= j)."""
    resolved = []
    for lo, hi in genome.pairs():
        i = hz_to_bin(lo, bin_hz, n_bins)
        j = hz_to_bin(hi, bin_hz, n_bins)
        resolved.append((i, j) if i < j else None)
    return resolved


def genome_features(genome: IntervalGenome, magnitudes: np.ndarray, bin_hz: float):
    """Interval-mean columns for valid pairs only.

    Returns (values (n, n_valid), valid mask (alpha,)). Invalid pairs are
    skipped, matching the penalty-not-repair policy.
    """
    bins = genome_interval_bins(genome, bin_hz, magnitudes.shape[1])
    valid = np.asarray([b is not None for b in bins], dtype=bool)
    cols = []
    for b in bins:
        if b is not None:
            i, j = b
            cols.append(magnitudes[:, i : j + 1].mean(axis=1))
    if cols:
        values = np.column_stack(cols)
    else:
        values = np.empty((magnitudes.shape[0], 0))
    return values, valid


class FitnessEvaluator:
    """Pure genome -> fitness map over a fixed labeled spectrum set.

    The internal stratified 2-fold split is built once from `seed`, so the
    same genome always maps to the same fitness within one evaluator.
    """

    def __init__(
        self,
        spectra: list[Spectrum],
        labels,
        penalty: float = 1.0,
        seed: int = 0,
        fitness_mode: str = SPLIT_ACCURACY,
        ridge: float = 1e-6,
    ):
        self.magnitudes, self.bin_hz = _uniform_magnitude_matrix(spectra)
        self.labels = check_labels(labels, n_rows=self.magnitudes.shape[0])
        require(fitness_mode in FITNESS_MODES, f"fitness_mode must be one of {FITNESS_MODES}")
        classes, counts = np.unique(self.labels, return_counts=True)
        require(len(classes) >= 2, "need at least 2 classes", InsufficientDataError)
        require(int(counts.min()) >= 2, "each class needs at least 2 records",
                InsufficientDataError)
        self.penalty = float(penalty)
        self.fitness_mode = fitness_mode
        self.ridge = float(ridge)
        if fitness_mode == SPLIT_ACCURACY:
            self._fold_of = stratified_fold_assignments(self.labels, 2, seed)
        else:
            self._fold_of = None

    @property
    def max_hz(self) -> float:
        return (self.magnitudes.shape[1] - 1) * self.bin_hz

    def discriminant_score(self, values: np.ndarray) -> float:
        """Linear-discriminant accuracy of a feature block.

        split_accuracy: mean held-out accuracy over the fixed 2-fold
        split; resubstitution: train-on-all accuracy on the same rows.
        Zero feature columns score 0.
        """
        if values.shape[1] == 0:
            return 0.0
        if self.fitness_mode == RESUBSTITUTION:
            clf = LinearDiscriminant(ridge=self.ridge).fit(values, self.labels)
            return float(np.mean(clf.predict(values) == self.labels))
        accs = []
        for fold in (0, 1):
            test = self._fold_of == fold
            train = ~test
            clf = LinearDiscriminant(ridge=self.ridge).fit(values[train], self.labels[train])
            accs.append(float(np.mean(clf.predict(values[test]) == self.labels[test])))
        return float(np.mean(accs))

    def evaluate(self, genome: IntervalGenome) -> float:
        values, valid = genome_features(genome, self.magnitudes, self.bin_hz)
        n_invalid = int(np.sum(~valid))
        return self.discriminant_score(values) - self.penalty * n_invalid


def evaluate_fitness(
    genome: IntervalGenome,
    spectra: list[Spectrum],
    labels,
    config: GaConfig | None = None,
) -> float:
    """One-shot fitness of a genome (builds a fresh evaluator)."""
    config = config or GaConfig()
    return FitnessEvaluator(
        spectra, labels, penalty=config.penalty, seed=config.seed,
        fitness_mode=config.fitness_mode,
    ).evaluate(genome)


# ---------------------------------------------------------------------------
# The search loop
# ---------------------------------------------------------------------------

def _evaluate_population(evaluator, genomes, n_jobs: int) -> np.ndarray:
    if n_jobs == 1:
        return np.asarray([evaluator.evaluate(g) for g in genomes])
    # threading backend + ordered collection: worker count cannot change results
    scores = Parallel(n_jobs=n_jobs, backend="threading")(
        delayed(evaluator.evaluate)(g) for g in genomes
    )
    return np.asarray(scores)


def run_search(
    spectra: list[Spectrum],
    labels,
    n_intervals: int = 4,
    config: GaConfig | None = None,
) -> SearchResult:
    """Evolve interval bounds maximizing penalized discriminant fitness.

    Per generation: elites (by fitness, ties by lower index) are copied,
    the rest are children of roulette-selected parents via two-point
    crossover (probability crossover_prob, otherwise clones) and per-gene
    Gaussian mutation. Stops after max_generations or once the best-ever
    fitness has not improved for stagnation_window generations. The
    history records the best fitness of each evaluated generation and is
    non-decreasing because elites always survive.
    """
    require(n_intervals >= 1, "n_intervals must be >= 1")
    config = config or GaConfig()
    evaluator = FitnessEvaluator(
        spectra, labels, penalty=config.penalty, seed=config.seed,
        fitness_mode=config.fitness_mode,
    )
    max_hz = evaluator.max_hz
    sigma = config.mutation_sigma if config.mutation_sigma is not None else 0.05 * max_hz
    length = 2 * n_intervals
    rng = np.random.default_rng(config.seed)

    population = [
        IntervalGenome(rng.uniform(0.0, max_hz, size=length), max_hz)
        for _ in range(config.population_size)
    ]
    fitnesses = _evaluate_population(evaluator, population, config.n_jobs)

    best_idx = int(np.argmax(fitnesses))
    best_genome, best_fitness = population[best_idx], float(fitnesses[best_idx])
    history = [best_fitness]
    since_improvement = 0

    for _ in range(1, config.max_generations):
        order = np.argsort(-fitnesses, kind="stable")
        next_population = [population[i] for i in order[: config.elitism_count]]
        while len(next_population) < config.population_size:
            pi = select_parents(fitnesses, 2, rng)
            pa, pb = population[int(pi[0])], population[int(pi[1])]
            if rng.random() < config.crossover_prob:
                child1, child2 = two_point_crossover(pa, pb, rng)
            else:
                child1, child2 = pa, pb
            for child in (child1, child2):
                if len(next_population) < config.population_size:
                    next_population.append(
                        gaussian_mutation(child, config.mutation_prob, sigma, rng)
                    )
        population = next_population
        fitnesses = _evaluate_population(evaluator, population, config.n_jobs)
        gen_best = int(np.argmax(fitnesses))
        if float(fitnesses[gen_best]) > best_fitness:
            best_fitness = float(fitnesses[gen_best])
            best_genome = population[gen_best]
            since_improvement = 0
        else:
            since_improvement += 1
        history.append(best_fitness)
        if (
            config.stagnation_window is not None
            and since_improvement >= config.stagnation_window
        ):
            break

    intervals = resolved_intervals(best_genome, evaluator.bin_hz, evaluator.magnitudes.shape[1])
    return SearchResult(
        genome=best_genome,
        fitness=best_fitness,
        history=tuple(history),
        intervals=tuple(intervals),
    )


def resolved_intervals(genome: IntervalGenome, bin_hz: float, n_bins: int):
    """The genome's valid pairs as FrequencyInterval objects, in order."""
    out = []
    for (lo, hi), bins in zip(genome.pairs(), genome_interval_bins(genome, bin_hz, n_bins)):
        if bins is not None:
            out.append(FrequencyInterval(lo, hi))
    return out


def interval_feature_names(n: int) -> tuple[str, ...]:
    return tuple(f"f_{i + 1}" for i in range(n))


def extract_interval_features(
    intervals,
    spectra: list[Spectrum],
    labels,
    record_ids,
    names: tuple[str, ...] | None = None,
) -> FeatureMatrix:
    """Interval-mean feature matrix for already-resolved intervals."""
    intervals = list(intervals)
    require(len(intervals) > 0, "no intervals to extract", InsufficientDataError)
    magnitudes, bin_hz = _uniform_magnitude_matrix(spectra)
    names = names or interval_feature_names(len(intervals))
    require(len(names) == len(intervals), "one name per interval")
    cols = []
    for iv in intervals:
        i = hz_to_bin(iv.lo_hz, bin_hz, magnitudes.shape[1])
        j = hz_to_bin(iv.hi_hz, bin_hz, magnitudes.shape[1])
        require(i < j, f"interval [{iv.lo_hz}, {iv.hi_hz}] Hz is invalid on this grid")
        cols.append(magnitudes[:, i : j + 1].mean(axis=1))
    return FeatureMatrix(
        names=tuple(names),
        values=np.column_stack(cols),
        labels=tuple(check_labels(labels, n_rows=magnitudes.shape[0]).tolist()),
        record_ids=tuple(record_ids),
    )


# ---------------------------------------------------------------------------
# Estimator wrapper
# ---------------------------------------------------------------------------

class FrequencyIntervalSearch(BaseEstimator, TransformerMixin):
    """Supervised transformer: raw signal rows -> searched interval means.

    fit runs the GA on the rows' spectra; transform emits one column per
    resolved (usable) interval of the champion genome.
    """

    def __init__(
        self,
        n_intervals: int = 4,
        sample_rate: float = 1.0,
        source: str = FOURIER,
        population_size: int = 100,
        max_generations: int = 100,
        crossover_prob: float = 0.8,
        mutation_prob: float = 0.1,
        mutation_sigma: float | None = None,
        elitism_count: int = 1,
        penalty: float = 1.0,
        stagnation_window: int | None = 25,
        seed: int = 0,
        n_jobs: int = 1,
        fitness_mode: str = SPLIT_ACCURACY,
    ):
        self.n_intervals = n_intervals
        self.sample_rate = sample_rate
        self.source = source
        self.population_size = population_size
        self.max_generations = max_generations
        self.crossover_prob = crossover_prob
        self.mutation_prob = mutation_prob
        self.mutation_sigma = mutation_sigma
        self.elitism_count = elitism_count
        self.penalty = penalty
        self.stagnation_window = stagnation_window
        self.seed = seed
        self.n_jobs = n_jobs
        self.fitness_mode = fitness_mode

    def _config(self) -> GaConfig:
        return GaConfig(
            population_size=self.population_size,
            max_generations=self.max_generations,
            crossover_prob=self.crossover_prob,
            mutation_prob=self.mutation_prob,
            mutation_sigma=self.mutation_sigma,
            elitism_count=self.elitism_count,
            penalty=self.penalty,
            stagnation_window=self.stagnation_window,
            seed=self.seed,
            n_jobs=self.n_jobs,
            fitness_mode=self.fitness_mode,
        )

    def _spectra(self, X) -> list[Spectrum]:
        X = check_signal_matrix(X)
        return [spectrum_of(TimeSeries(row, self.sample_rate), self.source) for row in X]

    def fit(self, X, y):
        X = check_signal_matrix(X)
        spectra = self._spectra(X)
        y = check_labels(y, n_rows=len(spectra))
        self.n_features_in_ = X.shape[1]
        self.result_ = run_search(spectra, y, n_intervals=self.n_intervals,
                                  config=self._config())
        self.genome_ = self.result_.genome
        self.intervals_ = list(self.result_.intervals)
        self.feature_names_ = interval_feature_names(len(self.intervals_))
        return self

    def transform(self, X) -> np.ndarray:
        from .validation import check_is_fitted

        check_is_fitted(self, "intervals_")
        spectra = self._spectra(X)
        magnitudes, bin_hz = _uniform_magnitude_matrix(spectra)
        cols = []
        for iv in self.intervals_:
            i = hz_to_bin(iv.lo_hz, bin_hz, magnitudes.shape[1])
            j = hz_to_bin(iv.hi_hz, bin_hz, magnitudes.shape[1])
            require(i < j, f"interval [{iv.lo_hz}, {iv.hi_hz}] Hz is invalid on this grid")
            cols.append(magnitudes[:, i : j + 1].mean(axis=1))
        return np.column_stack(cols)


# ---------------------------------------------------------------------------
# JSON round-trip
# ---------------------------------------------------------------------------

def search_result_to_dict(result: SearchResult) -> dict:
    return {
        "genome": {
            "bounds": [float(b) for b in result.genome.bounds],
            "max_hz": result.genome.max_hz,
        },
        "fitness": result.fitness,
        "history": [float(h) for h in result.history],
        "intervals": [{"lo_hz": iv.lo_hz, "hi_hz": iv.hi_hz} for iv in result.intervals],
    }


def search_result_from_dict(payload: dict) -> SearchResult:
    try:
        genome = IntervalGenome(
            np.asarray(payload["genome"]["bounds"], dtype=float),
            float(payload["genome"]["max_hz"]),
        )
        intervals = tuple(
            FrequencyInterval(float(iv["lo_hz"]), float(iv["hi_hz"]))
            for iv in payload["intervals"]
        )
        return SearchResult(
            genome=genome,
            fitness=float(payload["fitness"]),
            history=tuple(float(h) for h in payload["history"]),
            intervals=intervals,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DataFormatError(f"bad search result payload: {e}") from None


def save_search_result(result: SearchResult, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        json.dump(search_result_to_dict(result), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_search_result(path) -> SearchResult:
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"{path}: no such file")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as e:
            raise DataFormatError(f"{path}: bad JSON ({e})") from None
    return search_result_from_dict(payload)
