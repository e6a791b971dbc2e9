"""End-to-end experiments: synth -> corrupt -> observe -> recover -> rhythm.

Everything derives from one mandatory master seed, so reruns with the same
config produce byte-identical containers and reports. Stage errors surface
with a stage tag while whatever was already written stays on disk.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSpec, apply_channel, dc_range
from .container import RecordContainer, write_record, write_rr_csv
from .dsp.comodulation import detect_common_mode, windows_to_events
from .errors import ConfigError, EcgForgeError
from .leads import LeadSystem
from .noise import NoiseSpec, apply_noise, snr_db
from .pipeline import RecordPipeline
from .presets import resolve_preset
from .rhythm import (
    DetectionParams, build_rr, detect_r_peaks, detection_scores,
    ground_truth_annotations, hrv_metrics, mask_and_interpolate,
)
from .record import EventLog
from .synth import BeatParams, generate_dipole_trajectory, synthesize_record
from .validation import UNITS_COUNTS


def _resolved(section, kind):
    """Inline config, {"preset": name}, or None -> concrete config."""
    if section is None:
        return None
    if isinstance(section, dict) and "preset" in section:
        base = copy.deepcopy(resolve_preset(kind, section["preset"]))
        overrides = {k: v for k, v in section.items() if k != "preset"}
        if isinstance(base, dict):
            base.update(overrides)
        elif overrides:
            raise ConfigError(
                f"{kind} preset references do not take inline overrides"
            )
        return base
    if isinstance(section, dict) and kind == "pipeline":
        raise ConfigError("pipeline must be a stage list or {'preset': name}")
    return copy.deepcopy(section)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully specified experiment; the master seed is mandatory."""

    master_seed: int
    beat: dict = field(default_factory=lambda: {"preset": "fig2-default"})
    duration_s: float = 60.0
    sample_rate_hz: float = 500.0
    lead_system: dict = None
    channel: dict = None
    noise: dict = None
    pipeline: object = field(default_factory=lambda: {"preset": "standard"})
    detection: dict = field(default_factory=dict)
    trace_name: str = None

    @classmethod
    def from_dict(cls, doc):
        if "master_seed" not in doc or doc["master_seed"] is None:
            raise ConfigError(
                "master_seed is mandatory; experiments never read entropy"
            )
        known = {
            "master_seed", "beat", "duration_s", "sample_rate_hz",
            "lead_system", "channel", "noise", "pipeline", "detection",
            "trace_name",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown experiment config keys {sorted(unknown)}")
        kwargs = {k: doc[k] for k in known if k in doc}
        return cls(**kwargs)

    @classmethod
    def from_preset(cls, name, **overrides):
        doc = dict(resolve_preset("experiment", name))
        doc.update(overrides)
        return cls.from_dict(doc)

    def to_dict(self):
        return {
            "master_seed": self.master_seed,
            "beat": self.beat,
            "duration_s": self.duration_s,
            "sample_rate_hz": self.sample_rate_hz,
            "lead_system": self.lead_system,
            "channel": self.channel,
            "noise": self.noise,
            "pipeline": self.pipeline,
            "detection": self.detection,
            "trace_name": self.trace_name,
        }

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def resolve(self):
        """Materialize every referenced preset; fails fast if unresolvable."""
        beat = BeatParams.from_dict(_resolved(self.beat, "beat"))
        channel_doc = _resolved(self.channel, "channel")
        channel = (
            ChannelSpec.from_dict(channel_doc) if channel_doc else None
        )
        noise_doc = _resolved(self.noise, "noise")
        noise = (
            NoiseSpec.from_dict(noise_doc) if noise_doc else None
        )
        stage_list = _resolved(self.pipeline, "pipeline") or []
        detection = DetectionParams(**self.detection)
        lead_sys = (
            LeadSystem(**self.lead_system) if self.lead_system else LeadSystem()
        )
        return beat, lead_sys, channel, noise, stage_list, detection


def _centered(data):
    return data - data.mean(axis=1, keepdims=True)


def _centered_snr(clean_rec, test_rec):
    return snr_db(_centered(clean_rec.data), _centered(test_rec.data))


def _interval_stats(intervals_ms):
    """HRV-style stats over raw intervals (no masking), for comparison."""
    intervals = np.asarray(intervals_ms, dtype=float)
    diffs = np.diff(intervals)
    return {
        "mean_hr_bpm": float(60000.0 / np.mean(intervals)),
        "sdnn_ms": float(np.std(intervals, ddof=1)) if intervals.size > 1 else 0.0,
        "rmssd_ms": float(np.sqrt(np.mean(diffs**2))) if diffs.size else 0.0,
        "pnn50": float(np.mean(np.abs(diffs) > 50.0)) if diffs.size else 0.0,
    }


def _write_trace_csv(path, rec, decimate=1):
    with open(path + ".tmp", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s"] + list(rec.lead_labels))
        times = rec.times()
        for i in range(0, rec.n_samples, decimate):
            writer.writerow(
                [repr(float(times[i]))]
                + [repr(float(v)) for v in rec.data[:, i]]
            )
    os.replace(path + ".tmp", path)


def _event_overlap_fraction(injected, windows):
    motion = [e for e in injected if e.kind == "motion"]
    if not motion:
        return None
    hit = sum(
        1 for e in motion
        if any(e.overlaps(s, w_end) for s, w_end in windows)
    )
    return hit / len(motion)


def run_experiment(config: ExperimentConfig, out_dir, emit_plots=False):
    """Execute the full chain and emit containers, traces, and report.json.

    Returns the report dict. Any stage failure is re-raised with a stage tag
    prefixed to the message; partial outputs written so far are preserved.
    """
    os.makedirs(out_dir, exist_ok=True)
    beat, lead_sys, channel, noise, stage_list, detection = config.resolve()

    ss = np.random.SeedSequence(config.master_seed)
    synth_seed, noise_seed, channel_seed = (
        int(child.generate_state(1)[0]) for child in ss.spawn(3)
    )
    seeds = {
        "master": int(config.master_seed),
        "synth": synth_seed,
        "noise": noise_seed,
        "channel": channel_seed,
    }

    stage = "synth"
    try:
        traj = generate_dipole_trajectory(
            beat, config.duration_s, config.sample_rate_hz, synth_seed
        )
        clean, truth_indices = synthesize_record(traj, lead_sys)
        truth = ground_truth_annotations(truth_indices, clean.sample_rate_hz)
        write_record(
            os.path.join(out_dir, "clean"),
            RecordContainer(record=clean, annotations=truth, seeds=seeds,
                            provenance=[{"stage": "synth",
                                         "config_hash": config.config_hash()}]),
        )

        stage = "noise"
        events = EventLog()
        accel = None
        corrupted_mv = clean
        if noise is not None:
            corrupted_mv, accel, events = apply_noise(clean, noise, noise_seed)

        stage = "channel"
        observed = corrupted_mv
        if channel is not None:
            observed, channel_events = apply_channel(
                corrupted_mv, channel, channel_seed
            )
            events.extend(channel_events)
        write_record(
            os.path.join(out_dir, "corrupted"),
            RecordContainer(record=observed, events=events, accel=accel,
                            seeds=seeds,
                            provenance=[{"stage": "corrupt",
                                         "config_hash": config.config_hash()}]),
        )

        stage = "pipeline"
        working = observed
        if working.units == UNITS_COUNTS:
            gain = channel.amplifier.gain_counts_per_mv
            stage_list = (
                [{"stage": "counts_to_mv",
                  "params": {"gain_counts_per_mv": gain}}]
                + [s for s in stage_list if s.get("stage") != "counts_to_mv"]
            )
        pipeline = RecordPipeline.from_config(stage_list)

        stage_snrs = []

        def _track(name, rec_after):
            stage_snrs.append(
                {"stage": name, "snr_db": _centered_snr(clean, rec_after)}
            )

        recovered, provenance = pipeline.apply(
            working, accel=accel, intermediate_writer=_track
        )

        stage = "artifact-detection"
        # flag on the gain-restored, mains-filtered signal: powerline would
        # lift the derivative-energy floor and hide genuine co-modulation
        flag_source = observed
        for name, est in pipeline.stages:
            if name not in ("counts_to_mv", "notch", "bandpass"):
                break
            flag_source = est.transform(flag_source)
        windows = detect_common_mode(flag_source)
        events.extend(windows_to_events(windows))

        stage = "rhythm"
        detected = detect_r_peaks(recovered, detection)
        sensitivity, precision, f1 = detection_scores(truth, detected)
        rr = build_rr(detected) if len(detected) >= 2 else None
        hrv_masked = hrv_unmasked = None
        if rr is not None:
            try:
                masked_rr = mask_and_interpolate(rr, windows)
                hrv_masked = hrv_metrics(masked_rr).to_dict()
                write_rr_csv(os.path.join(out_dir, "rr.csv"), masked_rr)
            except ConfigError:
                hrv_masked = None
            hrv_unmasked = _interval_stats(rr.intervals_ms)
        truth_rr_stats = (
            _interval_stats(np.diff(truth.indices) * 1000.0
                            / clean.sample_rate_hz)
            if len(truth) >= 2 else None
        )

        write_record(
            os.path.join(out_dir, "recovered"),
            RecordContainer(record=recovered, annotations=detected,
                            seeds=seeds,
                            provenance=[{"stage": "corrupt",
                                         "config_hash": config.config_hash()}]
                            + provenance),
        )

        if emit_plots:
            trace = config.trace_name or "trace.csv"
            _write_trace_csv(os.path.join(out_dir, trace), observed)

        spans = dc_range(observed)
        report = {
            "config_hash": config.config_hash(),
            "seeds": seeds,
            "stages": provenance,
            "snr_db": {
                "corrupted": _centered_snr(clean, observed)
                if observed.units != UNITS_COUNTS
                else _centered_snr(clean, corrupted_mv),
                "per_stage": stage_snrs,
                "recovered": _centered_snr(clean, recovered),
            },
            "dc_range": {
                "units": observed.units,
                "per_lead": spans.per_lead,
                "across_leads": spans.across_leads,
            },
            "detection": {
                "n_true": len(truth),
                "n_detected": len(detected),
                "sensitivity": sensitivity,
                "precision": precision,
                "f1": f1,
            },
            "artifact_flags": {
                "n_injected_motion": len(
                    [e for e in events.injected() if e.kind == "motion"]
                ),
                "n_windows": len(windows),
                "fraction_events_flagged": _event_overlap_fraction(
                    events.injected(), windows
                ),
            },
            "hrv": {
                "ground_truth": truth_rr_stats,
                "masked": hrv_masked,
                "unmasked": hrv_unmasked,
            },
        }
    except EcgForgeError as err:
        raise type(err)(f"[stage: {stage}] {err}") from err

    report_path = os.path.join(out_dir, "report.json")
    with open(report_path + ".tmp", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(report_path + ".tmp", report_path)
    return report
