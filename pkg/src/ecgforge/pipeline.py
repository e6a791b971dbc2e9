"""Recovery stages with the scikit-learn estimator API, composed from JSON.

Every stage is a ``BaseEstimator``/``TransformerMixin`` over
``MultiLeadRecord`` objects: construct with plain parameters, ``fit`` on a
record (filter designs happen here), ``transform`` to get a new record, and
``get_params`` drives the provenance hashes. ``RecordPipeline`` chains
stages from an ordered JSON list of stage specs.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .dsp.comodulation import detect_common_mode
from .dsp.emd import EmdSpec, emd_baseline_remove
from .dsp.fir import FirDesignSpec, apply_fir, design_equiripple
from .dsp.meyer import WaveletSpec, wavelet_denoise
from .dsp.nlms import AdaptiveSpec, adaptive_cancel
from .errors import ConfigError
from .record import MultiLeadRecord
from .synth import ideal_pqrst_template
from .validation import UNITS_COUNTS, UNITS_MV


def _check_record(X):
    if not isinstance(X, MultiLeadRecord):
        raise ConfigError(
            f"pipeline stages operate on MultiLeadRecord, got {type(X)!r}"
        )
    return X


class RecordTransformer(BaseEstimator, TransformerMixin):
    """Base for record-to-record stages; fit is a no-op unless overridden."""

    needs_reference = False

    def fit(self, X, y=None):
        _check_record(X)
        return self

    def config_hash(self):
        params = json.dumps(
            {"stage": type(self).__name__, "params": self.get_params()},
            sort_keys=True, default=list,
        )
        return hashlib.sha256(params.encode()).hexdigest()[:16]


class CountsToMillivolts(RecordTransformer):
    """Undo the amplifier gain; DC offsets are left for later stages."""

    def __init__(self, gain_counts_per_mv=1000.0):
        self.gain_counts_per_mv = gain_counts_per_mv

    def transform(self, X):
        X = _check_record(X)
        if X.units != UNITS_COUNTS:
            raise ConfigError("CountsToMillivolts expects a counts record")
        if self.gain_counts_per_mv <= 0:
            raise ConfigError("gain must be positive")
        return X.with_data(X.data / self.gain_counts_per_mv, units=UNITS_MV)


class _FirStage(RecordTransformer):
    kind = None

    def _spec(self, fs):
        return FirDesignSpec(
            kind=self.kind,
            band_hz=tuple(self.band_hz),
            sample_rate_hz=fs,
            transition_hz=self.transition_hz,
            pass_ripple_db=self.pass_ripple_db,
            stop_atten_db=self.stop_atten_db,
            max_taps=self.max_taps,
        )

    def fit(self, X, y=None):
        X = _check_record(X)
        self.sample_rate_hz_ = X.sample_rate_hz
        self.coefficients_ = design_equiripple(self._spec(X.sample_rate_hz))
        return self

    def transform(self, X):
        X = _check_record(X)
        if (
            not hasattr(self, "coefficients_")
            or X.sample_rate_hz != self.sample_rate_hz_
        ):
            self.fit(X)
        return apply_fir(X, self.coefficients_, zero_phase=self.zero_phase)


class NotchFilter(_FirStage):
    """Equiripple band-reject filter (powerline removal by default)."""

    kind = "notch"

    def __init__(self, band_hz=(48.0, 52.0), transition_hz=2.0,
                 pass_ripple_db=0.05, stop_atten_db=45.0, max_taps=4001,
                 zero_phase=True):
        self.band_hz = band_hz
        self.transition_hz = transition_hz
        self.pass_ripple_db = pass_ripple_db
        self.stop_atten_db = stop_atten_db
        self.max_taps = max_taps
        self.zero_phase = zero_phase


class BandpassFilter(_FirStage):
    """Equiripple bandpass filter."""

    kind = "bandpass"

    def __init__(self, band_hz=(0.5, 40.0), transition_hz=0.5,
                 pass_ripple_db=1.0, stop_atten_db=30.0, max_taps=6001,
                 zero_phase=True):
        self.band_hz = band_hz
        self.transition_hz = transition_hz
        self.pass_ripple_db = pass_ripple_db
        self.stop_atten_db = stop_atten_db
        self.max_taps = max_taps
        self.zero_phase = zero_phase


class WaveletDenoiser(RecordTransformer):
    """Discrete-Meyer shrinkage denoiser."""

    def __init__(self, family="dmey", levels=4, threshold_rule="improved",
                 alpha=1.0, n_taps=62, threshold_scale=1.0):
        self.family = family
        self.levels = levels
        self.threshold_rule = threshold_rule
        self.alpha = alpha
        self.n_taps = n_taps
        self.threshold_scale = threshold_scale

    def transform(self, X):
        X = _check_record(X)
        spec = WaveletSpec(
            family=self.family, levels=self.levels,
            threshold_rule=self.threshold_rule,
            alpha=self.alpha, n_taps=self.n_taps,
            threshold_scale=self.threshold_scale,
        )
        return wavelet_denoise(X, spec)


class BaselineWanderRemover(RecordTransformer):
    """Mode-decomposition baseline subtraction; estimate kept on the stage."""

    def __init__(self, max_imfs=12, sd_threshold=0.3, max_sift_iterations=50,
                 boundary="mirror", cutoff_hz=0.7):
        self.max_imfs = max_imfs
        self.sd_threshold = sd_threshold
        self.max_sift_iterations = max_sift_iterations
        self.boundary = boundary
        self.cutoff_hz = cutoff_hz

    def transform(self, X):
        X = _check_record(X)
        spec = EmdSpec(
            max_imfs=self.max_imfs, sd_threshold=self.sd_threshold,
            max_sift_iterations=self.max_sift_iterations,
            boundary=self.boundary,
        )
        cleaned, baseline = emd_baseline_remove(X, spec, self.cutoff_hz)
        self.baseline_ = baseline
        return cleaned


class MotionArtifactCanceller(RecordTransformer):
    """Accelerometer-referenced NLMS cancellation."""

    needs_reference = True

    def __init__(self, order=8, step_size=0.5, regularization=1e-6):
        self.order = order
        self.step_size = step_size
        self.regularization = regularization
        self._reference = None

    def set_reference(self, accel):
        self._reference = accel
        return self

    def transform(self, X):
        X = _check_record(X)
        if self._reference is None:
            raise ConfigError(
                "MotionArtifactCanceller needs an accelerometer reference; "
                "call set_reference first"
            )
        spec = AdaptiveSpec(
            order=self.order, step_size=self.step_size,
            regularization=self.regularization,
        )
        return adaptive_cancel(X, self._reference, spec)


class TemplateReconstructor(RecordTransformer):
    """Replace co-modulation-flagged windows with template beats.

    Alternative artifact strategy, off by default in presets: inside each
    flagged window every lead is rebuilt from the single-beat template tiled
    at the local RR estimate and scaled to the lead's own R amplitude.
    """

    def __init__(self, window_s=0.25, threshold_factor=1.5,
                 min_lead_fraction=0.8):
        self.window_s = window_s
        self.threshold_factor = threshold_factor
        self.min_lead_fraction = min_lead_fraction

    def transform(self, X):
        X = _check_record(X)
        windows = detect_common_mode(
            X, window_s=self.window_s,
            threshold_factor=self.threshold_factor,
            min_lead_fraction=self.min_lead_fraction,
        )
        self.windows_ = windows
        if not windows:
            return X.with_data(X.data)
        template = ideal_pqrst_template(X.sample_rate_hz)
        beat = template.samples / np.max(np.abs(template.samples))
        beat_len = self._local_beat_length(X, windows, beat.shape[0])
        beat = np.interp(
            np.linspace(0.0, 1.0, beat_len),
            np.linspace(0.0, 1.0, beat.shape[0]),
            beat,
        )
        data = X.data.copy()
        quiet = np.ones(X.n_samples, dtype=bool)
        for s, e in windows:
            quiet[s:e] = False
        for i in range(X.n_leads):
            lead = data[i]
            clean_scale = (
                np.percentile(np.abs(lead[quiet]), 99) if quiet.any() else 1.0
            )
            for s, e in windows:
                tiled = np.tile(beat, int(np.ceil((e - s) / beat.shape[0])))
                data[i, s:e] = clean_scale * tiled[: e - s]
        return X.with_data(data)

    def _local_beat_length(self, X, windows, fallback):
        """Template beat length from the RR estimate of the quiet regions."""
        from .rhythm import DetectionParams, detect_r_peaks

        try:
            peaks = detect_r_peaks(X, DetectionParams())
        except (ConfigError, KeyError):
            return fallback
        outside = [
            p for p in peaks.indices
            if not any(s <= p < e for s, e in windows)
        ]
        if len(outside) < 3:
            return fallback
        return int(np.median(np.diff(outside)))


STAGE_REGISTRY = {
    "counts_to_mv": CountsToMillivolts,
    "notch": NotchFilter,
    "bandpass": BandpassFilter,
    "wavelet": WaveletDenoiser,
    "emd_baseline": BaselineWanderRemover,
    "adaptive": MotionArtifactCanceller,
    "template": TemplateReconstructor,
}


class RecordPipeline:
    """Ordered recovery chain over records.

    ``stages`` is a list of (name, estimator) pairs. ``apply`` runs them in
    order, wiring the accelerometer into reference-hungry stages, optionally
    writing each intermediate record, and returning the provenance entries
    (stage name, config hash, params) that the container format stores.
    """

    def __init__(self, stages):
        self.stages = list(stages)
        for name, est in self.stages:
            if not hasattr(est, "transform"):
                raise ConfigError(f"stage {name!r} is not a transformer")

    @classmethod
    def from_config(cls, stage_list):
        """Build from an ordered JSON-style list of {"stage", "params"}."""
        stages = []
        for entry in stage_list:
            name = entry.get("stage")
            if name not in STAGE_REGISTRY:
                raise ConfigError(
                    f"unknown pipeline stage {name!r}; known: "
                    f"{sorted(STAGE_REGISTRY)}"
                )
            params = entry.get("params", {})
            params = {
                k: tuple(v) if isinstance(v, list) else v
                for k, v in params.items()
            }
            stages.append((name, STAGE_REGISTRY[name](**params)))
        return cls(stages)

    def describe(self):
        return [
            {
                "stage": name,
                "config_hash": est.config_hash(),
                "params": json.loads(
                    json.dumps(est.get_params(), default=list, sort_keys=True)
                ),
            }
            for name, est in self.stages
        ]

    def apply(self, record, accel=None, intermediate_writer=None):
        """Run the chain; returns (record, provenance entries)."""
        provenance = []
        for name, est in self.stages:
            if getattr(est, "needs_reference", False):
                if accel is None:
                    raise ConfigError(
                        f"stage {name!r} needs an accelerometer stream"
                    )
                est.set_reference(accel)
            record = est.fit(record).transform(record)
            provenance.append(
                {"stage": name, "config_hash": est.config_hash()}
            )
            if intermediate_writer is not None:
                intermediate_writer(name, record)
        return record, provenance
