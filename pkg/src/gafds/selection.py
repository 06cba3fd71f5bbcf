"""Binary-genome GA selecting a feature subset that minimizes
FPR + (1 - TPR) of a cross-validated linear-discriminant wrapper."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .classifiers.lda import LinearDiscriminant
from .dataset import stratified_fold_assignments
from .errors import DataFormatError, InsufficientDataError
from .evaluation import fpr_tpr, pooled_confusion
from .features import FeatureMatrix
from .search import GaConfig, roulette_spin, roulette_weights
from .validation import check_feature_matrix, check_is_fitted, check_labels, require

CORRECTED = "corrected"
LITERAL = "literal"
OBJECTIVE_MODES = (CORRECTED, LITERAL)


def default_selection_config(n_features: int, seed: int = 0) -> GaConfig:
    """Selection defaults: 50 genomes, 60 generations, uniform crossover
    0.8, per-bit mutation 1/n_features, elitism 1, no early stop."""
    require(n_features >= 1, "n_features must be >= 1")
    return GaConfig(
        population_size=50,
        max_generations=60,
        crossover_prob=0.8,
        mutation_prob=1.0 / n_features,
        mutation_sigma=0.0,
        elitism_count=1,
        penalty=0.0,
        stagnation_window=None,
        seed=seed,
    )


class SubsetObjective:
    """Pure mask -> objective map over a fixed feature matrix.

    The wrapper classifier is scored by a seeded stratified 2-fold split;
    fold confusions are pooled before rates are computed. `corrected`
    minimizes FPR + (1 - TPR); `literal` keeps the uncorrected form
    FPR + TPR - 1 (which rewards degenerate all-negative predictions and
    exists only for comparison). The all-zero mask scores +inf.
    """

    def __init__(
        self,
        values,
        labels,
        seed: int = 0,
        mode: str = CORRECTED,
        positive_label: str | None = None,
        ridge: float = 1e-6,
    ):
        self.values = check_feature_matrix(values)
        self.labels = check_labels(labels, n_rows=self.values.shape[0])
        require(mode in OBJECTIVE_MODES, f"mode must be one of {OBJECTIVE_MODES}")
        self.mode = mode
        self.positive_label = positive_label
        self.ridge = float(ridge)
        self.classes = np.asarray(sorted(set(self.labels.tolist())))
        require(len(self.classes) >= 2, "need at least 2 classes", InsufficientDataError)
        self._fold_of = stratified_fold_assignments(self.labels, 2, seed)

    def __call__(self, mask) -> float:
        mask = np.asarray(mask, dtype=bool)
        require(mask.shape == (self.values.shape[1],), "mask length must equal n_features")
        if not mask.any():
            return float("inf")
        X = self.values[:, mask]
        confusions = []
        for fold in (0, 1):
            test = self._fold_of == fold
            train = ~test
            clf = LinearDiscriminant(ridge=self.ridge).fit(X[train], self.labels[train])
            pred = clf.predict(X[test])
            confusions.append(pooled_confusion(self.labels[test], pred, self.classes))
        confusion = np.sum(confusions, axis=0)
        fpr, tpr = fpr_tpr(confusion, self.classes, positive_label=self.positive_label)
        if self.mode == LITERAL:
            return float(fpr + tpr - 1.0)
        return float(fpr + (1.0 - tpr))


def subset_objective(mask, values, labels, seed: int = 0, mode: str = CORRECTED,
                     positive_label: str | None = None) -> float:
    """One-shot objective of a mask (builds a fresh evaluator)."""
    return SubsetObjective(values, labels, seed=seed, mode=mode,
                           positive_label=positive_label)(mask)


@dataclass(frozen=True)
class SelectionResult:
    """Champion mask (lowest objective) and the per-generation best trace."""

    mask: tuple[bool, ...]
    objective: float
    history: tuple[float, ...]
    feature_names: tuple[str, ...] = ()

    def selected_names(self) -> tuple[str, ...]:
        if not self.feature_names:
            return ()
        return tuple(n for n, keep in zip(self.feature_names, self.mask) if keep)


def uniform_crossover(a: np.ndarray, b: np.ndarray, rng: np.random.Generator):
    """Per-bit swap with probability 1/2 (one coin per bit)."""
    swap = rng.random(len(a)) < 0.5
    child1 = np.where(swap, b, a)
    child2 = np.where(swap, a, b)
    return child1, child2


def bitflip_mutation(mask: np.ndarray, prob: float, rng: np.random.Generator) -> np.ndarray:
    flip = rng.random(len(mask)) < prob
    return mask ^ flip


def run_selection(
    features,
    labels=None,
    config: GaConfig | None = None,
    mode: str = CORRECTED,
    positive_label: str | None = None,
) -> SelectionResult:
    """Evolve binary masks minimizing the subset objective.

    `features` is a FeatureMatrix (labels implied) or a plain matrix with
    `labels` given. Roulette weights come from negated objectives
    (+inf masks get weight ~0 through the shift); elites survive, so the
    best objective in the history is non-increasing.
    """
    if isinstance(features, FeatureMatrix):
        names = features.names
        values = features.values
        labels = features.label_array() if labels is None else labels
    else:
        values = check_feature_matrix(features)
        names = tuple(f"f_{i + 1}" for i in range(values.shape[1]))
        require(labels is not None, "labels are required with a plain matrix")
    d = values.shape[1]
    config = config or default_selection_config(d)
    objective = SubsetObjective(values, labels, seed=config.seed, mode=mode,
                                positive_label=positive_label)
    rng = np.random.default_rng(config.seed)

    population = [rng.random(d) < 0.5 for _ in range(config.population_size)]
    scores = np.asarray([objective(m) for m in population])

    best_idx = int(np.argmin(scores))
    best_mask, best_score = population[best_idx].copy(), float(scores[best_idx])
    history = [best_score]

    for _ in range(1, config.max_generations):
        order = np.argsort(scores, kind="stable")
        next_population = [population[i].copy() for i in order[: config.elitism_count]]
        # wheel turns on negated objectives; +inf capped to worst-finite + 1
        # so degenerate masks keep only the epsilon weight
        if np.any(np.isfinite(scores)):
            cap = float(np.max(scores[np.isfinite(scores)])) + 1.0
        else:
            cap = 1.0
        weights = roulette_weights(-np.where(np.isfinite(scores), scores, cap))
        while len(next_population) < config.population_size:
            pi = roulette_spin(weights, 2, rng)
            pa, pb = population[int(pi[0])], population[int(pi[1])]
            if rng.random() < config.crossover_prob:
                child1, child2 = uniform_crossover(pa, pb, rng)
            else:
                child1, child2 = pa.copy(), pb.copy()
            for child in (child1, child2):
                if len(next_population) < config.population_size:
                    next_population.append(bitflip_mutation(child, config.mutation_prob, rng))
        population = next_population
        scores = np.asarray([objective(m) for m in population])
        gen_best = int(np.argmin(scores))
        if float(scores[gen_best]) < best_score:
            best_score = float(scores[gen_best])
            best_mask = population[gen_best].copy()
        history.append(best_score)

    return SelectionResult(
        mask=tuple(bool(b) for b in best_mask),
        objective=best_score,
        history=tuple(history),
        feature_names=tuple(names),
    )


class GeneticSubsetSelector(BaseEstimator, TransformerMixin):
    """Supervised selector: fit evolves a mask, transform projects onto it."""

    def __init__(
        self,
        population_size: int = 50,
        max_generations: int = 60,
        crossover_prob: float = 0.8,
        mutation_prob: float | None = None,
        elitism_count: int = 1,
        seed: int = 0,
        mode: str = CORRECTED,
        positive_label: str | None = None,
    ):
        self.population_size = population_size
        self.max_generations = max_generations
        self.crossover_prob = crossover_prob
        self.mutation_prob = mutation_prob
        self.elitism_count = elitism_count
        self.seed = seed
        self.mode = mode
        self.positive_label = positive_label

    def fit(self, X, y):
        X = check_feature_matrix(X)
        y = check_labels(y, n_rows=X.shape[0])
        d = X.shape[1]
        config = GaConfig(
            population_size=self.population_size,
            max_generations=self.max_generations,
            crossover_prob=self.crossover_prob,
            mutation_prob=self.mutation_prob if self.mutation_prob is not None else 1.0 / d,
            mutation_sigma=0.0,
            elitism_count=self.elitism_count,
            penalty=0.0,
            stagnation_window=None,
            seed=self.seed,
        )
        self.result_ = run_selection(X, y, config=config, mode=self.mode,
                                     positive_label=self.positive_label)
        self.support_mask_ = np.asarray(self.result_.mask, dtype=bool)
        self.n_features_in_ = d
        return self

    def get_support(self) -> np.ndarray:
        check_is_fitted(self, "support_mask_")
        return self.support_mask_.copy()

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "support_mask_")
        X = check_feature_matrix(X)
        require(X.shape[1] == self.n_features_in_,
                f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X[:, self.support_mask_]


# ---------------------------------------------------------------------------
# Mask JSON round-trip
# ---------------------------------------------------------------------------

def selection_result_to_dict(result: SelectionResult) -> dict:
    return {
        "mask": [bool(b) for b in result.mask],
        "objective": float(result.objective),
        "history": [float(h) for h in result.history],
        "feature_names": list(result.feature_names),
        "selected_names": list(result.selected_names()),
    }


def selection_result_from_dict(payload: dict) -> SelectionResult:
    try:
        return SelectionResult(
            mask=tuple(bool(b) for b in payload["mask"]),
            objective=float(payload["objective"]),
            history=tuple(float(h) for h in payload["history"]),
            feature_names=tuple(payload.get("feature_names", ())),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DataFormatError(f"bad selection payload: {e}") from None


def save_selection_result(result: SelectionResult, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        json.dump(selection_result_to_dict(result), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_selection_result(path) -> SelectionResult:
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"{path}: no such file")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as e:
            raise DataFormatError(f"{path}: bad JSON ({e})") from None
    return selection_result_from_dict(payload)
