"""Shared fixtures: synthetic two-tone datasets and their spectra."""

import numpy as np
import pytest

from gafds.dataset import synthesize_dataset
from gafds.spectrum import spectra_of_dataset


TWO_TONE_SPECS = {
    "L": {"tones": [(10.0, 1.0)], "noise_sigma": 0.5, "count": 50},
    "H": {"tones": [(30.0, 1.0)], "noise_sigma": 0.5, "count": 50},
}


@pytest.fixture(scope="session")
def two_tone_dataset():
    """100 records, 10 Hz vs 30 Hz tones in noise, 1024 samples at 128 Hz."""
    return synthesize_dataset(TWO_TONE_SPECS, length=1024, sample_rate=128.0, seed=1234)


@pytest.fixture(scope="session")
def two_tone_spectra(two_tone_dataset):
    return spectra_of_dataset(two_tone_dataset)


@pytest.fixture(scope="session")
def small_dataset():
    """Quick 2 x 10 variant for GA-heavy tests."""
    specs = {
        "L": {"tones": [(10.0, 1.0)], "noise_sigma": 0.5, "count": 10},
        "H": {"tones": [(30.0, 1.0)], "noise_sigma": 0.5, "count": 10},
    }
    return synthesize_dataset(specs, length=512, sample_rate=128.0, seed=99)


@pytest.fixture(scope="session")
def small_spectra(small_dataset):
    return spectra_of_dataset(small_dataset)


@pytest.fixture(scope="session")
def blob_features():
    """Two well-separated 2-D Gaussian blobs, 40 rows."""
    rng = np.random.default_rng(7)
    a = rng.normal(loc=[0.0, 0.0], scale=0.5, size=(20, 2))
    b = rng.normal(loc=[4.0, 4.0], scale=0.5, size=(20, 2))
    X = np.vstack([a, b])
    y = np.asarray(["a"] * 20 + ["b"] * 20)
    return X, y
