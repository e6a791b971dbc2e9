"""R-peak detection, RR series construction, artifact masking, HRV metrics.

Detection thresholds a rectified, bandpass-filtered lead at a fraction of
its running amplitude percentile, so detections are invariant to positive
rescaling of the record. RR intervals outside physiologic bounds are masked;
intervals landing in artifact windows are replaced by a short-memory
exponentially weighted heart-rate prediction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import find_peaks

from .dsp.fir import FirDesignSpec, apply_fir, design_equiripple
from .errors import ConfigError

RR_BOUNDS_MS = (240.0, 3000.0)
FLAG_MEASURED = "measured"
FLAG_MASKED = "masked"
FLAG_INTERPOLATED = "interpolated"


@dataclass(frozen=True)
class RPeakAnnotations:
    """Strictly increasing R-peak sample indices with confidences."""

    indices: np.ndarray
    sample_rate_hz: float
    source: str = "detected"  # or "ground_truth"
    confidence: np.ndarray = None
    refractory_s: float = 0.2

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=int)
        if indices.size and np.any(np.diff(indices) <= 0):
            raise ConfigError("peak indices must be strictly increasing")
        min_gap = int(round(self.refractory_s * self.sample_rate_hz))
        if indices.size > 1 and np.min(np.diff(indices)) < min_gap:
            raise ConfigError(
                f"peaks violate the {self.refractory_s * 1e3:.0f} ms "
                "refractory period"
            )
        if self.source not in ("detected", "ground_truth"):
            raise ConfigError("source must be 'detected' or 'ground_truth'")
        conf = self.confidence
        if conf is None:
            conf = np.ones(indices.shape[0])
        conf = np.asarray(conf, dtype=float)
        if conf.shape != indices.shape or np.any((conf < 0) | (conf > 1)):
            raise ConfigError("confidence must match indices and lie in [0,1]")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "confidence", conf)

    def times_s(self):
        return self.indices / self.sample_rate_hz

    def __len__(self):
        return self.indices.shape[0]

    def __eq__(self, other):
        if not isinstance(other, RPeakAnnotations):
            return NotImplemented
        return (
            self.source == other.source
            and self.sample_rate_hz == other.sample_rate_hz
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.confidence, other.confidence)
        )


@dataclass(frozen=True)
class RrSeries:
    """Successive R-R intervals in ms with per-interval provenance flags."""

    intervals_ms: np.ndarray
    flags: np.ndarray  # FLAG_MEASURED / FLAG_MASKED / FLAG_INTERPOLATED
    origin_indices: np.ndarray  # (n, 2) bounding peak sample indices

    def __post_init__(self):
        intervals = np.asarray(self.intervals_ms, dtype=float)
        flags = np.asarray(self.flags)
        origins = np.asarray(self.origin_indices, dtype=int)
        if flags.shape != intervals.shape or origins.shape != (
            intervals.shape[0], 2,
        ):
            raise ConfigError("intervals, flags, origins must be consistent")
        valid = {FLAG_MEASURED, FLAG_MASKED, FLAG_INTERPOLATED}
        if intervals.size and not set(np.unique(flags)) <= valid:
            raise ConfigError(f"flags must be within {sorted(valid)}")
        measured = intervals[flags == FLAG_MEASURED]
        if measured.size and (
            measured.min() <= RR_BOUNDS_MS[0] or measured.max() >= RR_BOUNDS_MS[1]
        ):
            raise ConfigError(
                f"measured intervals must lie in {RR_BOUNDS_MS} ms"
            )
        object.__setattr__(self, "intervals_ms", intervals)
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "origin_indices", origins)

    def __len__(self):
        return self.intervals_ms.shape[0]

    def __eq__(self, other):
        if not isinstance(other, RrSeries):
            return NotImplemented
        return (
            np.array_equal(self.intervals_ms, other.intervals_ms)
            and np.array_equal(self.flags, other.flags)
            and np.array_equal(self.origin_indices, other.origin_indices)
        )


@dataclass(frozen=True)
class HrvSummary:
    mean_hr_bpm: float
    sdnn_ms: float
    rmssd_ms: float
    pnn50: float
    count_measured: int
    count_interpolated: int

    def to_dict(self):
        return {
            "mean_hr_bpm": self.mean_hr_bpm,
            "sdnn_ms": self.sdnn_ms,
            "rmssd_ms": self.rmssd_ms,
            "pnn50": self.pnn50,
            "count_measured": self.count_measured,
            "count_interpolated": self.count_interpolated,
        }


@dataclass(frozen=True)
class DetectionParams:
    """Threshold-detection knobs; defaults suit a bandpassed lead II."""

    lead: str = "II"
    threshold_factor: float = 0.6
    percentile: float = 99.0
    percentile_window_s: float = 2.0
    refractory_s: float = 0.2
    assume_prefiltered: bool = False
    prefilter_band_hz: tuple = (5.0, 18.0)
    prefilter_transition_hz: float = 3.0
    prefilter_atten_db: float = 40.0
    max_taps: int = 2001

    def __post_init__(self):
        if not (0.0 < self.threshold_factor < 1.0):
            raise ConfigError("threshold_factor must lie in (0, 1)")
        if not (50.0 <= self.percentile <= 100.0):
            raise ConfigError("percentile must lie in [50, 100]")
        if self.refractory_s <= 0:
            raise ConfigError("refractory period must be positive")


def _running_percentile(x, fs, window_s, q):
    """Blockwise percentile of |x| interpolated to a per-sample curve."""
    n = x.shape[0]
    block = max(1, int(round(window_s * fs)))
    starts = np.arange(0, n, block)
    centers = np.minimum(starts + block // 2, n - 1)
    values = np.array(
        [np.percentile(x[s: s + block], q) for s in starts]
    )
    if values.shape[0] == 1:
        return np.full(n, values[0])
    return np.interp(np.arange(n), centers, values)


def detect_r_peaks(rec, params=None):
    """Threshold-detect R peaks on one lead of a record.

    Returns annotations whose confidence is the relative margin above the
    adaptive threshold, (value - threshold) / value.
    """
    if params is None:
        params = DetectionParams()
    if rec.duration_s < 2.0:
        raise ConfigError("detection needs at least 2 seconds of signal")
    x = rec.lead(params.lead)
    fs = rec.sample_rate_hz
    if not params.assume_prefiltered:
        spec = FirDesignSpec(
            kind="bandpass",
            band_hz=params.prefilter_band_hz,
            sample_rate_hz=fs,
            transition_hz=params.prefilter_transition_hz,
            stop_atten_db=params.prefilter_atten_db,
            max_taps=params.max_taps,
        )
        x = apply_fir(x, design_equiripple(spec), zero_phase=True)
    rectified = np.abs(x)
    threshold = params.threshold_factor * _running_percentile(
        rectified, fs, params.percentile_window_s, params.percentile
    )
    distance = max(1, int(round(params.refractory_s * fs)))
    peaks, props = find_peaks(rectified, height=threshold, distance=distance)
    heights = props["peak_heights"]
    with np.errstate(divide="ignore", invalid="ignore"):
        margin = np.where(
            heights > 0, (heights - threshold[peaks]) / heights, 0.0
        )
    return RPeakAnnotations(
        indices=peaks,
        sample_rate_hz=fs,
        source="detected",
        confidence=np.clip(margin, 0.0, 1.0),
        refractory_s=params.refractory_s,
    )


def build_rr(peaks: RPeakAnnotations):
    """Successive peak spacings in ms, physiologic-bound violations masked."""
    if len(peaks) < 2:
        raise ConfigError("need at least two peaks to build an RR series")
    gaps = np.diff(peaks.indices)
    intervals = gaps * 1000.0 / peaks.sample_rate_hz
    flags = np.where(
        (intervals > RR_BOUNDS_MS[0]) & (intervals < RR_BOUNDS_MS[1]),
        FLAG_MEASURED,
        FLAG_MASKED,
    ).astype("<U12")  # wide enough for the interpolated flag
    origins = np.column_stack([peaks.indices[:-1], peaks.indices[1:]])
    return RrSeries(
        intervals_ms=intervals, flags=flags, origin_indices=origins
    )


def mask_and_interpolate(rr: RrSeries, artifact_windows, history=8,
                         decay=0.75):
    """Replace artifact-window intervals with a heart-rate prediction.

    Any interval with a bounding peak inside an artifact window takes the
    exponentially weighted mean of the last ``history`` measured intervals
    (weights decay ** age); measured entries are never touched, so the
    operation is idempotent for fixed windows.
    """
    windows = [(int(s), int(e)) for s, e in artifact_windows]
    if not windows:
        return replace(rr)

    def in_windows(sample):
        return any(s <= sample < e for s, e in windows)

    affected = np.array(
        [
            in_windows(a) or in_windows(b)
            for a, b in rr.origin_indices
        ]
    )
    measured_mask = rr.flags == FLAG_MEASURED
    usable_history = measured_mask & ~affected
    if not np.any(usable_history):
        raise ConfigError(
            "every interval is masked; nothing left to predict from"
        )
    fallback = float(np.mean(rr.intervals_ms[usable_history]))
    weights = decay ** np.arange(history)

    intervals = rr.intervals_ms.copy()
    flags = rr.flags.astype("<U12")
    recent = []
    for i in range(len(rr)):
        if affected[i]:
            if recent:
                w = weights[: len(recent)]
                intervals[i] = float(
                    np.dot(w, recent[: len(w)]) / np.sum(w)
                )
            else:
                intervals[i] = fallback
            flags[i] = FLAG_INTERPOLATED
        elif measured_mask[i]:
            recent.insert(0, intervals[i])
            del recent[history:]
    return RrSeries(
        intervals_ms=intervals, flags=flags, origin_indices=rr.origin_indices
    )


def hrv_metrics(rr: RrSeries):
    """Time-domain HRV over usable (measured + interpolated) intervals.

    Successive differences are taken only between adjacent usable entries,
    never across a masked gap.
    """
    usable = rr.flags != FLAG_MASKED
    values = rr.intervals_ms[usable]
    if values.shape[0] < 2:
        raise ConfigError("need at least two usable intervals for HRV")
    adjacent = usable[1:] & usable[:-1]
    diffs = np.diff(rr.intervals_ms)[adjacent]
    rmssd = float(np.sqrt(np.mean(diffs**2))) if diffs.size else 0.0
    pnn50 = float(np.mean(np.abs(diffs) > 50.0)) if diffs.size else 0.0
    return HrvSummary(
        mean_hr_bpm=float(60000.0 / np.mean(values)),
        sdnn_ms=float(np.std(values, ddof=1)),
        rmssd_ms=rmssd,
        pnn50=pnn50,
        count_measured=int(np.sum(rr.flags == FLAG_MEASURED)),
        count_interpolated=int(np.sum(rr.flags == FLAG_INTERPOLATED)),
    )


def ground_truth_annotations(indices, sample_rate_hz):
    """Wrap synthesized R-peak indices as ground-truth annotations."""
    return RPeakAnnotations(
        indices=np.asarray(indices, dtype=int),
        sample_rate_hz=sample_rate_hz,
        source="ground_truth",
    )


def match_peaks(truth: RPeakAnnotations, detected: RPeakAnnotations,
                tolerance_s=0.05):
    """Greedy one-to-one matching; returns (tp, fp, fn)."""
    tol = tolerance_s * truth.sample_rate_hz
    t_idx = truth.indices
    d_idx = detected.indices
    used = np.zeros(d_idx.shape[0], dtype=bool)
    tp = 0
    j = 0
    for t in t_idx:
        while j < d_idx.shape[0] and d_idx[j] < t - tol:
            j += 1
        best = None
        for k in range(j, d_idx.shape[0]):
            if d_idx[k] > t + tol:
                break
            if not used[k] and (
                best is None or abs(d_idx[k] - t) < abs(d_idx[best] - t)
            ):
                best = k
        if best is not None:
            used[best] = True
            tp += 1
    fp = int(np.sum(~used))
    fn = int(t_idx.shape[0] - tp)
    return tp, fp, fn


def detection_scores(truth, detected, tolerance_s=0.05):
    """(sensitivity, precision, f1) under the matching tolerance."""
    tp, fp, fn = match_peaks(truth, detected, tolerance_s)
    sensitivity = tp / (tp + fn) if tp + fn else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    denom = sensitivity + precision
    f1 = 2 * sensitivity * precision / denom if denom else 0.0
    return sensitivity, precision, f1
