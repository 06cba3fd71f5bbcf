"""Nonlinear series descriptors: sample entropy, rescaled-range exponent,
largest Lyapunov exponent, detrended fluctuation exponents, and the
multifractal singularity spectrum with its point features.

All estimators work on raw sample vectors; none needs the sample rate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, TransformerMixin

from .dataset import LabeledDataset, TimeSeries
from .errors import DegenerateSeriesError, GafdsError, InsufficientDataError
from .features import FeatureMatrix
from .validation import as_float_array, check_signal_matrix, require

DEFAULT_Q_ORDERS = (-8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0, 8.0)


def _values_of(x) -> np.ndarray:
    if isinstance(x, TimeSeries):
        return np.asarray(x.values, dtype=float)
    return as_float_array(x, name="series", ndim=1)


# ---------------------------------------------------------------------------
# Sample entropy
# ---------------------------------------------------------------------------

def sample_entropy(
    x,
    m: int = 2,
    tolerance_scale: float = 0.2,
    length: int | None = None,
) -> float:
    """-ln(A/B) with template length m, Chebyshev distance, radius
    tolerance_scale * std(ddof=0), self-matches excluded.

    Both the m-match count B and the (m+1)-match count A use the first
    N - m templates, so the counts compare like with like. A constant
    series returns 0.0 (all templates match at both lengths). Zero A or B
    raises InsufficientDataError("insufficient matches ...").
    """
    values = _values_of(x)
    if length is not None:
        require(length >= 2, "length must be >= 2", InsufficientDataError)
        values = values[: int(length)]
    n = len(values)
    require(m >= 1, "m must be >= 1")
    require(tolerance_scale > 0, "tolerance_scale must be positive")
    if n < m + 2:
        raise InsufficientDataError(f"need at least m+2={m + 2} samples, got {n}")
    r = tolerance_scale * float(np.std(values, ddof=0))
    b = _template_match_count(values, m, r, n_templates=n - m)
    a = _template_match_count(values, m + 1, r, n_templates=n - m)
    if b == 0:
        raise InsufficientDataError(
            "insufficient matches: no template pairs within tolerance at length m"
        )
    if a == 0:
        raise InsufficientDataError(
            "insufficient matches: no template pairs within tolerance at length m+1"
        )
    if a == b:
        return 0.0
    return float(-np.log(a / b))


def _template_match_count(values: np.ndarray, m: int, r: float,
                          n_templates: int | None = None) -> int:
    """Ordered count of template pairs (i != j) with Chebyshev distance <= r.

    Counting is chunk-vectorized but integer-exact, so it agrees with a
    double loop bit for bit.
    """
    n = len(values)
    count_templates = n - m + 1 if n_templates is None else n_templates
    if count_templates < 2:
        return 0
    templates = np.lib.stride_tricks.sliding_window_view(values, m)[:count_templates]
    total = 0
    chunk = max(1, int(2**22 // max(1, count_templates * m)))
    for start in range(0, count_templates, chunk):
        block = templates[start : start + chunk]
        # (chunk, all) Chebyshev distances
        d = np.max(np.abs(block[:, None, :] - templates[None, :, :]), axis=2)
        within = d <= r
        rows = np.arange(start, start + block.shape[0])
        within[np.arange(block.shape[0]), rows] = False  # drop self-matches
        total += int(np.count_nonzero(within))
    return total


# ---------------------------------------------------------------------------
# Rescaled-range exponent
# ---------------------------------------------------------------------------

def hurst_exponent(x) -> float:
    """Slope of log mean(R/S) against log window size on dyadic windows.

    Windows are 8, 16, ... up to n/4; each block is demeaned, cumulated,
    R is the profile range and S the sample standard deviation (ddof=1).
    """
    values = _values_of(x)
    n = len(values)
    if n < 64:
        raise InsufficientDataError(f"need at least 64 samples, got {n}")
    if np.std(values) == 0:
        raise DegenerateSeriesError("constant series has no rescaled-range exponent")
    sizes = []
    w = 8
    while w <= n // 4:
        sizes.append(w)
        w *= 2
    log_w, log_rs = [], []
    for w in sizes:
        n_blocks = n // w
        blocks = values[: n_blocks * w].reshape(n_blocks, w)
        demeaned = blocks - blocks.mean(axis=1, keepdims=True)
        profile = np.cumsum(demeaned, axis=1)
        ranges = profile.max(axis=1) - profile.min(axis=1)
        stds = blocks.std(axis=1, ddof=1)
        ok = stds > 0
        if not np.any(ok):
            continue
        rs = ranges[ok] / stds[ok]
        log_w.append(np.log(w))
        log_rs.append(np.log(np.mean(rs)))
    if len(log_w) < 2:
        raise DegenerateSeriesError("too few usable window sizes for a slope")
    slope = np.polyfit(log_w, log_rs, 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# Detrended fluctuation analysis (monofractal and multifractal)
# ---------------------------------------------------------------------------

def _logspace_scales(n: int, lo: int = 16, num: int = 16) -> np.ndarray:
    hi = n // 8
    if hi < lo:
        raise InsufficientDataError(
            f"need at least {8 * lo} samples for fluctuation scales, got {n}"
        )
    raw = np.logspace(np.log10(lo), np.log10(hi), num=num)
    scales = np.unique(np.round(raw).astype(int))
    return scales[scales >= 4]

def _segment_fluctuations(profile: np.ndarray, s: int) -> np.ndarray:
    """Mean squared residuals of order-1 fits over segments taken from
    both ends of the profile (2 * floor(N/s) segments)."""
    n = len(profile)
    n_seg = n // s
    idx = np.arange(s, dtype=float)
    design = np.column_stack([idx, np.ones(s)])
    pinv = np.linalg.pinv(design)
    fluctuations = np.empty(2 * n_seg)
    for v in range(n_seg):
        seg = profile[v * s : (v + 1) * s]
        coeffs = pinv @ seg
        resid = seg - design @ coeffs
        fluctuations[v] = np.mean(resid**2)
        seg = profile[n - (v + 1) * s : n - v * s]
        coeffs = pinv @ seg
        resid = seg - design @ coeffs
        fluctuations[n_seg + v] = np.mean(resid**2)
    return fluctuations


def dfa_exponent(x) -> float:
    """Order-1 detrended fluctuation exponent.

    Profile = cumsum(x - mean); 16 log-spaced integer scales in
    [16, n/8]; F(s) = sqrt(mean over segments of mean squared residual);
    the exponent is the log-log slope.
    """
    values = _values_of(x)
    n = len(values)
    if np.std(values) == 0:
        raise DegenerateSeriesError("constant series has no fluctuation exponent")
    scales = _logspace_scales(n)
    profile = np.cumsum(values - values.mean())
    log_s, log_f = [], []
    for s in scales:
        f2 = _segment_fluctuations(profile, int(s))
        mean_f2 = float(np.mean(f2))
        if mean_f2 <= 0:
            continue
        log_s.append(np.log(s))
        log_f.append(0.5 * np.log(mean_f2))
    if len(log_s) < 2:
        raise DegenerateSeriesError("too few usable scales for a slope")
    return float(np.polyfit(log_s, log_f, 1)[0])


@dataclass(frozen=True)
class MultifractalSpectrum:
    """Generalized exponents h(q) and the Legendre spectrum (alpha, D).

    alpha = d tau / d q via central differences of tau(q) = q h(q) - 1;
    D = q alpha - tau. Arrays all share the q grid's length.
    """

    q_orders: tuple[float, ...]
    generalized_h: tuple[float, ...]
    alphas: tuple[float, ...]
    spectrum_values: tuple[float, ...]

    def __post_init__(self):
        k = len(self.q_orders)
        require(k >= 3, "need at least 3 q orders")
        require(
            len(self.generalized_h) == k
            and len(self.alphas) == k
            and len(self.spectrum_values) == k,
            "q grid and spectra must have equal lengths",
        )

    def width(self) -> float:
        return float(max(self.alphas) - min(self.alphas))


def mfdfa(x, q_orders=DEFAULT_Q_ORDERS) -> MultifractalSpectrum:
    """Multifractal DFA over the given q orders.

    F_q(s) is the order-q mean of segment fluctuations (log-average rule
    at q = 0); h(q) are log-log slopes; the Legendre transform uses
    central differences. Non-finite intermediate values raise
    DegenerateSeriesError.
    """
    values = _values_of(x)
    q_orders = tuple(float(q) for q in q_orders)
    require(len(q_orders) >= 3, "need at least 3 q orders")
    require(len(set(q_orders)) == len(q_orders), "q orders must be distinct")
    require(list(q_orders) == sorted(q_orders), "q orders must be ascending")
    if np.std(values) == 0:
        raise DegenerateSeriesError("constant series has no multifractal spectrum")
    scales = _logspace_scales(len(values))
    profile = np.cumsum(values - values.mean())
    log_s = np.log(scales.astype(float))
    fq = np.empty((len(q_orders), len(scales)))
    for si, s in enumerate(scales):
        f2 = _segment_fluctuations(profile, int(s))
        if np.any(f2 <= 0):
            # a perfectly fit segment would zero a negative-q moment
            f2 = np.maximum(f2, 1e-300)
        for qi, q in enumerate(q_orders):
            if q == 0.0:
                fq[qi, si] = np.exp(0.5 * np.mean(np.log(f2)))
            else:
                fq[qi, si] = np.mean(f2 ** (q / 2.0)) ** (1.0 / q)
    if not np.all(np.isfinite(fq)) or np.any(fq <= 0):
        raise DegenerateSeriesError("fluctuation moments are degenerate")
    hq = np.array([np.polyfit(log_s, np.log(fq[qi]), 1)[0] for qi in range(len(q_orders))])
    if not np.all(np.isfinite(hq)):
        raise DegenerateSeriesError("generalized exponents are not finite")
    q_arr = np.asarray(q_orders)
    tau = q_arr * hq - 1.0
    alpha = np.gradient(tau, q_arr)
    dq = q_arr * alpha - tau
    if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(dq))):
        raise DegenerateSeriesError("singularity spectrum is not finite")
    return MultifractalSpectrum(
        q_orders=q_orders,
        generalized_h=tuple(float(v) for v in hq),
        alphas=tuple(float(v) for v in alpha),
        spectrum_values=tuple(float(v) for v in dq),
    )


def multifractal_point_features(spectrum: MultifractalSpectrum) -> tuple[float, ...]:
    """Five point features: (alpha, D) at min alpha, (alpha, D) at max
    alpha, and alpha at max D (whose D value is a constant 1 and dropped)."""
    alphas = np.asarray(spectrum.alphas)
    dq = np.asarray(spectrum.spectrum_values)
    i_min = int(np.argmin(alphas))
    i_max = int(np.argmax(alphas))
    i_top = int(np.argmax(dq))
    return (
        float(alphas[i_min]),
        float(dq[i_min]),
        float(alphas[i_max]),
        float(dq[i_max]),
        float(alphas[i_top]),
    )


# ---------------------------------------------------------------------------
# Largest Lyapunov exponent (trajectory-tracking estimator)
# ---------------------------------------------------------------------------

def _autocorr_zero_crossing(values: np.ndarray) -> int:
    """Lag of the first non-positive autocorrelation (fallback 1)."""
    centered = values - values.mean()
    n = len(centered)
    size = int(2 ** np.ceil(np.log2(2 * n)))
    spectrum = np.fft.rfft(centered, size)
    acf = np.fft.irfft(spectrum * np.conj(spectrum), size)[: n // 2]
    if acf[0] <= 0:
        return 1
    for lag in range(1, len(acf)):
        if acf[lag] <= 0:
            return lag
    return 1


def _mean_period(values: np.ndarray) -> float:
    """Power-weighted mean period in samples (DC excluded)."""
    mags = np.abs(np.fft.rfft(values - values.mean()))
    power = mags[1:] ** 2
    if power.sum() == 0:
        return float(len(values))
    freqs = np.arange(1, len(mags)) / len(values)  # cycles per sample
    mean_freq = float(np.sum(freqs * power) / np.sum(power))
    return 1.0 / mean_freq


def largest_lyapunov(
    x,
    dim: int = 5,
    lag: int | None = None,
    theiler: int | None = None,
    scale_fraction: float = 0.1,
) -> float:
    """Average exponential divergence rate along a tracked trajectory,
    in nats per sample.

    Delay-embed with dimension `dim` and delay `lag` (default: first
    autocorrelation zero-crossing); follow the nearest temporal-window-
    excluded neighbor one step at a time, accumulating log(d1/d0), and
    re-anchor to a fresh neighbor whenever the pair separates beyond
    scale_fraction of the attractor extent.
    """
    values = _values_of(x)
    n = len(values)
    if n < 500:
        raise InsufficientDataError(f"need at least 500 samples, got {n}")
    if np.std(values) == 0:
        raise DegenerateSeriesError("constant series has no divergence rate")
    require(dim >= 2, "dim must be >= 2")
    require(0 < scale_fraction <= 1, "scale_fraction must be in (0, 1]")
    if lag is None:
        lag = _autocorr_zero_crossing(values)
    require(lag >= 1, "lag must be >= 1")
    if theiler is None:
        theiler = max(1, int(round(_mean_period(values))))

    m_points = n - (dim - 1) * lag
    if m_points < theiler + 10:
        raise InsufficientDataError("series too short for this embedding")
    offsets = np.arange(dim) * lag
    embedded = values[np.arange(m_points)[:, None] + offsets]
    extent = float(np.linalg.norm(embedded.max(axis=0) - embedded.min(axis=0)))
    if extent == 0:
        raise DegenerateSeriesError("embedded attractor has zero extent")
    scale_max = scale_fraction * extent

    tree = cKDTree(embedded)
    last = m_points - 1  # last index that can still evolve one step

    def find_neighbor(i: int):
        """Nearest usable neighbor of point i: temporally separated, able
        to evolve, at a positive distance."""
        k = min(2 * theiler + 4, m_points)
        while True:
            dists, idxs = tree.query(embedded[i], k=k)
            for d, j in zip(np.atleast_1d(dists), np.atleast_1d(idxs)):
                j = int(j)
                if j == i or abs(j - i) <= theiler or j >= last or d <= 0:
                    continue
                return j, float(d)
            if k >= m_points:
                return None, None
            k = min(2 * k, m_points)

    log_sum = 0.0
    steps = 0
    i = 0
    j, d0 = find_neighbor(i)
    while i < last and j is not None:
        i2, j2 = i + 1, j + 1
        d1 = float(np.linalg.norm(embedded[i2] - embedded[j2]))
        if d1 > 0 and d0 > 0:
            log_sum += np.log(d1 / d0)
            steps += 1
        i = i2
        if i >= last:
            break
        if d1 > scale_max or j2 >= last or d1 <= 0:
            j, d0 = find_neighbor(i)
        else:
            j, d0 = j2, d1
    if steps == 0:
        raise DegenerateSeriesError("no divergence steps could be tracked")
    return float(log_sum / steps)


# ---------------------------------------------------------------------------
# Feature bank
# ---------------------------------------------------------------------------

NONLINEAR_FEATURE_COUNT = 9


def nonlinear_feature_names(start: int = 5) -> tuple[str, ...]:
    """Names f_<start>..f_<start+8>: five multifractal point features,
    then sample entropy, rescaled-range exponent, largest Lyapunov
    exponent, and the fluctuation exponent."""
    return tuple(f"f_{start + i}" for i in range(NONLINEAR_FEATURE_COUNT))


def nonlinear_feature_vector(
    values: np.ndarray,
    sampen_m: int = 2,
    sampen_tolerance_scale: float = 0.2,
    sampen_length: int | None = None,
    q_orders=DEFAULT_Q_ORDERS,
) -> np.ndarray:
    mf = multifractal_point_features(mfdfa(values, q_orders))
    vec = np.asarray(
        [
            *mf,
            sample_entropy(values, m=sampen_m, tolerance_scale=sampen_tolerance_scale,
                           length=sampen_length),
            hurst_exponent(values),
            largest_lyapunov(values),
            dfa_exponent(values),
        ],
        dtype=float,
    )
    if not np.all(np.isfinite(vec)):
        raise DegenerateSeriesError("non-finite nonlinear feature value")
    return vec


def extract_nonlinear_features(
    dataset: LabeledDataset,
    name_start: int = 5,
    n_jobs: int = 1,
    sampen_m: int = 2,
    sampen_tolerance_scale: float = 0.2,
    sampen_length: int | None = None,
    q_orders=DEFAULT_Q_ORDERS,
) -> FeatureMatrix:
    """Nine nonlinear descriptors per record as a named feature matrix.

    Any estimator failure is re-raised with the offending record id.
    """

    def one(rid: str, rec: TimeSeries) -> np.ndarray:
        try:
            return nonlinear_feature_vector(
                np.asarray(rec.values),
                sampen_m=sampen_m,
                sampen_tolerance_scale=sampen_tolerance_scale,
                sampen_length=sampen_length,
                q_orders=q_orders,
            )
        except GafdsError as e:
            raise type(e)(f"record '{rid}': {e}") from None

    pairs = list(zip(dataset.record_ids, dataset.records))
    if n_jobs == 1:
        rows = [one(rid, rec) for rid, rec in pairs]
    else:
        rows = Parallel(n_jobs=n_jobs, backend="threading")(
            delayed(one)(rid, rec) for rid, rec in pairs
        )
    return FeatureMatrix(
        names=nonlinear_feature_names(name_start),
        values=np.vstack(rows),
        labels=dataset.labels,
        record_ids=dataset.record_ids,
    )


class NonlinearFeatureExtractor(BaseEstimator, TransformerMixin):
    """Stateless transformer: rows of raw samples -> 9 nonlinear features."""

    def __init__(
        self,
        sampen_m: int = 2,
        sampen_tolerance_scale: float = 0.2,
        sampen_length: int | None = None,
        n_jobs: int = 1,
    ):
        self.sampen_m = sampen_m
        self.sampen_tolerance_scale = sampen_tolerance_scale
        self.sampen_length = sampen_length
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        check_signal_matrix(X)
        return self

    def transform(self, X) -> np.ndarray:
        X = check_signal_matrix(X)

        def one(row):
            return nonlinear_feature_vector(
                row,
                sampen_m=self.sampen_m,
                sampen_tolerance_scale=self.sampen_tolerance_scale,
                sampen_length=self.sampen_length,
            )

        if self.n_jobs == 1:
            rows = [one(row) for row in X]
        else:
            rows = Parallel(n_jobs=self.n_jobs, backend="threading")(
                delayed(one)(row) for row in X
            )
        return np.vstack(rows)


# ---------------------------------------------------------------------------
# Multifractal spectrum CSV
# ---------------------------------------------------------------------------

def export_multifractal_csv(spectrum: MultifractalSpectrum, path) -> None:
    """Write q,h_q,D_q rows; h_q here is the singularity abscissa alpha."""
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q", "h_q", "D_q"])
        for q, a, d in zip(spectrum.q_orders, spectrum.alphas, spectrum.spectrum_values):
            writer.writerow([repr(float(q)), repr(float(a)), repr(float(d))])
