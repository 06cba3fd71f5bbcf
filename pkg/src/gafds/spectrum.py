"""One-sided magnitude spectra and frequency-interval mean features.

The spectrum of an n-sample record is |rfft(x)|: floor(n/2)+1 bins spaced
rate/n Hz apart, DC included, no window, no padding. An interval feature is
the plain mean of the magnitudes over an inclusive bin range obtained by
mapping the interval's Hz bounds to nearest bins.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.signal
from sklearn.base import BaseEstimator, TransformerMixin

from .dataset import LabeledDataset, TimeSeries
from .errors import DataFormatError, InsufficientDataError, InvalidIntervalError
from .validation import as_float_array, check_signal_matrix, require

FOURIER = "fourier"
HILBERT_ENVELOPE = "hilbert_envelope"
SOURCES = (FOURIER, HILBERT_ENVELOPE)


@dataclass(frozen=True)
class Spectrum:
    """Non-negative magnitudes on a uniform frequency grid starting at DC."""

    magnitudes: np.ndarray
    bin_hz: float
    source: str = FOURIER

    def __post_init__(self):
        mags = as_float_array(self.magnitudes, name="magnitudes", ndim=1)
        require(len(mags) >= 2, "a spectrum needs at least 2 bins", InsufficientDataError)
        require(bool(np.all(mags >= 0)), "magnitudes must be non-negative")
        require(
            math.isfinite(self.bin_hz) and self.bin_hz > 0,
            f"bin_hz must be positive, got {self.bin_hz}",
        )
        require(self.source in SOURCES, f"source must be one of {SOURCES}")
        mags = mags.copy()
        mags.setflags(write=False)
        object.__setattr__(self, "magnitudes", mags)
        object.__setattr__(self, "bin_hz", float(self.bin_hz))

    @property
    def n_bins(self) -> int:
        return len(self.magnitudes)

    @property
    def top_hz(self) -> float:
        """Frequency of the highest bin."""
        return (self.n_bins - 1) * self.bin_hz

    def hz(self) -> np.ndarray:
        """Bin center frequencies."""
        return np.arange(self.n_bins) * self.bin_hz


def fft_magnitude(x: TimeSeries) -> Spectrum:
    """One-sided magnitude spectrum of a record.

    Length floor(n/2)+1, bin spacing rate/n; a constant series c yields
    DC magnitude n*c and zeros elsewhere.
    """
    mags = np.abs(np.fft.rfft(x.values))
    return Spectrum(magnitudes=mags, bin_hz=x.sample_rate / len(x.values), source=FOURIER)


def hilbert_envelope_spectrum(x: TimeSeries) -> Spectrum:
    """Magnitude spectrum of the analytic-signal envelope |H(x)|."""
    require(len(x.values) >= 4, "envelope spectrum needs at least 4 samples",
            InsufficientDataError)
    envelope = np.abs(scipy.signal.hilbert(x.values))
    mags = np.abs(np.fft.rfft(envelope))
    return Spectrum(magnitudes=mags, bin_hz=x.sample_rate / len(x.values),
                    source=HILBERT_ENVELOPE)


def spectrum_of(x: TimeSeries, source: str = FOURIER) -> Spectrum:
    if source == FOURIER:
        return fft_magnitude(x)
    if source == HILBERT_ENVELOPE:
        return hilbert_envelope_spectrum(x)
    raise ValueError(f"unknown spectrum source '{source}'")


def spectra_of_dataset(dataset: LabeledDataset, source: str = FOURIER) -> list[Spectrum]:
    return [spectrum_of(rec, source) for rec in dataset.records]


@dataclass(frozen=True)
class FrequencyInterval:
    """A half-interval [lo_hz, hi_hz] in Hz; may be unusable on a given grid."""

    lo_hz: float
    hi_hz: float

    def __post_init__(self):
        for name in ("lo_hz", "hi_hz"):
            v = getattr(self, name)
            require(math.isfinite(v) and v >= 0, f"{name} must be finite and >= 0")
            object.__setattr__(self, name, float(v))


def hz_to_bin(hz: float, bin_hz: float, n_bins: int) -> int:
    """Map a frequency to its nearest bin, round half up, clamped to range."""
    raw = math.floor(hz / bin_hz + 0.5)
    return int(min(max(raw, 0), n_bins - 1))


def interval_bins(spectrum: Spectrum, interval: FrequencyInterval) -> tuple[int, int]:
    """Resolve an interval to an inclusive bin pair (i, j) with i < j.

    Raises InvalidIntervalError when the bounds collapse onto a single bin
    or are reversed after mapping.
    """
    i = hz_to_bin(interval.lo_hz, spectrum.bin_hz, spectrum.n_bins)
    j = hz_to_bin(interval.hi_hz, spectrum.bin_hz, spectrum.n_bins)
    if i >= j:
        raise InvalidIntervalError(
            f"interval [{interval.lo_hz}, {interval.hi_hz}] Hz maps to bins ({i}, {j}); "
            "need lo bin < hi bin"
        )
    return i, j


def interval_is_valid(spectrum: Spectrum, interval: FrequencyInterval) -> bool:
    try:
        interval_bins(spectrum, interval)
    except InvalidIntervalError:
        return False
    return True


def interval_feature(spectrum: Spectrum, interval: FrequencyInterval) -> float:
    """Mean magnitude over the interval's inclusive bin range."""
    i, j = interval_bins(spectrum, interval)
    return float(np.mean(spectrum.magnitudes[i : j + 1]))


class SpectrumTransformer(BaseEstimator, TransformerMixin):
    """Stateless transformer: rows of raw samples -> rows of magnitudes.

    All rows share one sample rate so the output is a regular matrix of
    floor(n/2)+1 magnitude bins per record.
    """

    def __init__(self, sample_rate: float = 1.0, source: str = FOURIER):
        self.sample_rate = sample_rate
        self.source = source

    def fit(self, X, y=None):
        check_signal_matrix(X)
        require(self.source in SOURCES, f"source must be one of {SOURCES}")
        return self

    def transform(self, X) -> np.ndarray:
        X = check_signal_matrix(X)
        rows = [
            spectrum_of(TimeSeries(row, self.sample_rate), self.source).magnitudes
            for row in X
        ]
        return np.vstack(rows)


# ---------------------------------------------------------------------------
# CSV export / import
# ---------------------------------------------------------------------------

SPECTRUM_HEADER = ["bin", "hz", "magnitude"]
MULTI_SPECTRUM_HEADER = ["record_id", "bin", "hz", "magnitude"]


def export_spectrum_csv(spectrum: Spectrum, path) -> None:
    """Write a single spectrum as bin,hz,magnitude rows."""
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SPECTRUM_HEADER)
        for b, (hz, mag) in enumerate(zip(spectrum.hz(), spectrum.magnitudes)):
            writer.writerow([b, repr(float(hz)), repr(float(mag))])


def export_spectra_csv(spectra: list[Spectrum], record_ids, path) -> None:
    """Write several spectra in one CSV keyed by record_id."""
    record_ids = list(record_ids)
    require(len(spectra) == len(record_ids), "one record_id per spectrum")
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MULTI_SPECTRUM_HEADER)
        for rid, spec in zip(record_ids, spectra):
            for b, (hz, mag) in enumerate(zip(spec.hz(), spec.magnitudes)):
                writer.writerow([rid, b, repr(float(hz)), repr(float(mag))])


def import_spectrum_csv(path, source: str = FOURIER) -> Spectrum:
    """Read back a single-spectrum CSV written by export_spectrum_csv."""
    path = Path(path)
    mags: list[float] = []
    hz: list[float] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SPECTRUM_HEADER:
            raise DataFormatError(f"{path}: expected header {SPECTRUM_HEADER}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataFormatError(f"{path}: line {lineno}: expected 3 columns")
            try:
                b, f, m = int(row[0]), float(row[1]), float(row[2])
            except ValueError:
                raise DataFormatError(f"{path}: line {lineno}: bad number") from None
            if b != len(mags):
                raise DataFormatError(f"{path}: line {lineno}: bin {b} out of order")
            hz.append(f)
            mags.append(m)
    if len(mags) < 2:
        raise DataFormatError(f"{path}: fewer than 2 bins")
    bin_hz = hz[1] - hz[0] if hz[1] > hz[0] else None
    if bin_hz is None or bin_hz <= 0:
        raise DataFormatError(f"{path}: non-increasing frequency grid")
    return Spectrum(magnitudes=np.asarray(mags), bin_hz=bin_hz, source=source)
