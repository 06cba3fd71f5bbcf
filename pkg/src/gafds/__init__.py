"""Genetic frequency-interval search, nonlinear signal descriptors, and
from-scratch classification over labeled signal collections."""

from .classifiers import (
    AdaBoost,
    DecisionTree,
    GaussianNaiveBayes,
    KNearestNeighbors,
    LinearDiscriminant,
    MultilayerPerceptron,
    make_classifier,
)
from .dataset import FoldPlan, LabeledDataset, TimeSeries, make_folds
from .evaluation import (
    DistanceRatioTable,
    MinMaxNormalizer,
    cross_validate,
    distance_ratio_table,
    fpr_tpr,
    inter_class_distance,
    intra_class_distance,
)
from .features import FeatureMatrix
from .nonlinear import (
    MultifractalSpectrum,
    NonlinearFeatureExtractor,
    dfa_exponent,
    hurst_exponent,
    largest_lyapunov,
    mfdfa,
    multifractal_point_features,
    sample_entropy,
)
from .search import (
    FrequencyIntervalSearch,
    GaConfig,
    IntervalGenome,
    SearchResult,
    evaluate_fitness,
    run_search,
)
from .selection import GeneticSubsetSelector, SelectionResult, run_selection, subset_objective
from .spectrum import (
    FrequencyInterval,
    Spectrum,
    SpectrumTransformer,
    fft_magnitude,
    hilbert_envelope_spectrum,
    interval_feature,
)

__version__ = "0.1.0"

__all__ = [
    "AdaBoost",
    "DecisionTree",
    "DistanceRatioTable",
    "FeatureMatrix",
    "FoldPlan",
    "FrequencyInterval",
    "FrequencyIntervalSearch",
    "GaConfig",
    "GaussianNaiveBayes",
    "GeneticSubsetSelector",
    "IntervalGenome",
    "KNearestNeighbors",
    "LabeledDataset",
    "LinearDiscriminant",
    "MinMaxNormalizer",
    "MultifractalSpectrum",
    "MultilayerPerceptron",
    "NonlinearFeatureExtractor",
    "SearchResult",
    "SelectionResult",
    "Spectrum",
    "SpectrumTransformer",
    "TimeSeries",
    "cross_validate",
    "dfa_exponent",
    "distance_ratio_table",
    "evaluate_fitness",
    "fft_magnitude",
    "fpr_tpr",
    "hilbert_envelope_spectrum",
    "hurst_exponent",
    "inter_class_distance",
    "interval_feature",
    "intra_class_distance",
    "largest_lyapunov",
    "make_classifier",
    "make_folds",
    "mfdfa",
    "multifractal_point_features",
    "run_search",
    "run_selection",
    "sample_entropy",
    "subset_objective",
]
