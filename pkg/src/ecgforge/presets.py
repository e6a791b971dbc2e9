"""Named configuration presets: beats, channels, noise recipes, pipelines,
and complete experiments.

"with-electrode" and "no-electrode" mirror the two bench conditions (low
contact impedance with small inter-lead bias versus a dry, high-bias,
drifting interface whose worst lead saturates and discharges);
"rest-to-motion" is thirty quiet seconds followed by a dense burst of
motion events.
"""

from __future__ import annotations

from .errors import ConfigError
from .synth import FIG2_DEFAULT

BEAT_PRESETS = {
    "fig2-default": FIG2_DEFAULT,
}

_WITH_ELECTRODE_BIAS = {
    "I": 20000.0, "II": 60000.0, "III": 110000.0,
    "aVR": 160000.0, "aVL": 210000.0, "aVF": 260000.0,
    "V1": 300000.0, "V2": 330000.0, "V3": 350000.0,
    "V4": 370000.0, "V5": 390000.0, "V6": 405000.0,
}

_NO_ELECTRODE_BIAS = {
    "I": 10000.0, "II": 400000.0, "III": 220000.0,
    "aVR": 90000.0, "aVL": 300000.0, "aVF": 160000.0,
    "V1": 480000.0, "V2": 560000.0, "V3": 640000.0,
    "V4": 690000.0, "V5": 720000.0, "V6": 740000.0,
}

CHANNEL_PRESETS = {
    "with-electrode": {
        "default_electrode": {
            "kind": "microneedle",
            "scenario": "human_skin",
            "polarization_offset_mv": 2.0,
            "polarization_walk_step_mv": 0.002,
            "polarization_walk_bound_mv": 2.0,
        },
        "amplifier": {
            "gain_counts_per_mv": 1000.0,
            "rail_counts": 8_000_000.0,
            "discharge_jump_counts": 100_000.0,
            "adc_bits": 24,
            "dc_bias_counts": _WITH_ELECTRODE_BIAS,
        },
        "interface_noise_base_counts": 5.0,
    },
    "no-electrode": {
        "default_electrode": {
            "kind": "dry",
            "scenario": "human_skin",
            "polarization_offset_mv": 20.0,
            "polarization_walk_step_mv": 0.02,
            "polarization_walk_bound_mv": 20.0,
        },
        "amplifier": {
            "gain_counts_per_mv": 1000.0,
            "rail_counts": 1_000_000.0,
            "discharge_jump_counts": 100_000.0,
            "adc_bits": 24,
            "dc_bias_counts": _NO_ELECTRODE_BIAS,
        },
        "interface_noise_base_counts": 5.0,
    },
}

NOISE_PRESETS = {
    "clean": {},
    "mild": {
        "powerline": {"freq_hz": 50.0, "amplitude_mv": 0.1, "phase_rad": 0.0},
        "emg": {"band_hz": [20.0, 150.0], "rms_mv": 0.02},
        "baseline": [[0.15, 0.3], [0.3, 0.2]],
        "motion_events": [],
    },
    "loose-contact": {
        "powerline": {"freq_hz": 50.0, "amplitude_mv": 0.3, "phase_rad": 0.0},
        "emg": {"band_hz": [20.0, 150.0], "rms_mv": 0.08},
        "baseline": [[0.1, 2.0], [0.25, 1.2], [0.4, 0.6]],
        "motion_events": [
            {"onset_s": 18.0, "duration_s": 1.2, "microslip_step_mv": 320.0,
             "common_mode_mv": 2.0, "microphonic_rms_mv": 0.5,
             "affected_leads": ["V6"]},
            {"onset_s": 41.0, "duration_s": 1.0, "microslip_step_mv": -250.0,
             "common_mode_mv": 2.0, "microphonic_rms_mv": 0.4,
             "affected_leads": ["V2", "V3"]},
        ],
    },
    "rest-to-motion": {
        "powerline": {"freq_hz": 50.0, "amplitude_mv": 0.1, "phase_rad": 0.0},
        "emg": {"band_hz": [20.0, 150.0], "rms_mv": 0.03},
        "baseline": [[0.2, 0.3]],
        "motion_events": [
            {"onset_s": 31.0, "duration_s": 1.0, "microslip_step_mv": 420.0,
             "common_mode_mv": 3.0, "microphonic_rms_mv": 1.0,
             "affected_leads": ["V5", "V6"]},
            {"onset_s": 35.5, "duration_s": 0.8, "microslip_step_mv": -180.0,
             "common_mode_mv": 2.5, "microphonic_rms_mv": 0.8,
             "affected_leads": ["II", "III", "aVF"]},
            {"onset_s": 39.0, "duration_s": 1.0, "microslip_step_mv": 260.0,
             "common_mode_mv": 2.5, "microphonic_rms_mv": 1.2,
             "affected_leads": ["V1", "V2"]},
            {"onset_s": 44.0, "duration_s": 0.6, "microslip_step_mv": 0.0,
             "common_mode_mv": 4.0, "microphonic_rms_mv": 0.6,
             "affected_leads": []},
            {"onset_s": 48.0, "duration_s": 1.2, "microslip_step_mv": -350.0,
             "common_mode_mv": 2.5, "microphonic_rms_mv": 1.5,
             "affected_leads": ["I", "aVL", "V4"]},
            {"onset_s": 53.5, "duration_s": 0.8, "microslip_step_mv": 150.0,
             "common_mode_mv": 3.0, "microphonic_rms_mv": 0.9,
             "affected_leads": ["V3"]},
        ],
    },
}

PIPELINE_PRESETS = {
    "standard": [
        {"stage": "notch",
         "params": {"band_hz": [48.0, 52.0], "pass_ripple_db": 0.05,
                    "stop_atten_db": 45.0}},
        {"stage": "wavelet", "params": {"levels": 4}},
        {"stage": "emd_baseline", "params": {}},
    ],
    "motion": [
        {"stage": "notch",
         "params": {"band_hz": [48.0, 52.0], "pass_ripple_db": 0.05,
                    "stop_atten_db": 45.0}},
        {"stage": "adaptive", "params": {"order": 8, "step_size": 0.01}},
        {"stage": "wavelet", "params": {"levels": 4}},
        {"stage": "emd_baseline", "params": {}},
    ],
}

EXPERIMENT_PRESETS = {
    "with-electrode": {
        "beat": {"preset": "fig2-default"},
        "duration_s": 60.0,
        "sample_rate_hz": 500.0,
        "channel": {"preset": "with-electrode"},
        "noise": {"preset": "mild"},
        "pipeline": {"preset": "standard"},
        "detection": {"lead": "II"},
        "master_seed": 20240601,
        "trace_name": "fig9_with_electrode.csv",
    },
    "no-electrode": {
        "beat": {"preset": "fig2-default"},
        "duration_s": 60.0,
        "sample_rate_hz": 500.0,
        "channel": {"preset": "no-electrode"},
        "noise": {"preset": "loose-contact"},
        "pipeline": {"preset": "standard"},
        "detection": {"lead": "II"},
        "master_seed": 20240601,
        "trace_name": "fig8_no_electrode.csv",
    },
    "rest-to-motion": {
        "beat": {"preset": "fig2-default"},
        "duration_s": 60.0,
        "sample_rate_hz": 500.0,
        "channel": {"preset": "with-electrode"},
        "noise": {"preset": "rest-to-motion"},
        "pipeline": {"preset": "motion"},
        "detection": {"lead": "II"},
        "master_seed": 20240601,
        "trace_name": "fig10_rest_to_motion.csv",
    },
}

_REGISTRY = {
    "beat": BEAT_PRESETS,
    "channel": CHANNEL_PRESETS,
    "noise": NOISE_PRESETS,
    "pipeline": PIPELINE_PRESETS,
    "experiment": EXPERIMENT_PRESETS,
}


def resolve_preset(kind, name):
    table = _REGISTRY.get(kind)
    if table is None:
        raise ConfigError(f"unknown preset kind {kind!r}")
    if name not in table:
        raise ConfigError(
            f"unknown {kind} preset {name!r}; known: {sorted(table)}"
        )
    return table[name]


def list_presets():
    return {kind: sorted(table) for kind, table in _REGISTRY.items()}
