"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines as they execute.
"""

import filecmp
import os
import time

import numpy as np
import pytest

from ecgforge import (
    AccelStream, AdaptiveSpec, BeatParams, ExperimentConfig, FirDesignSpec,
    LeadSystem, LimbPotentials, RecordPipeline, WaveletSpec, adaptive_cancel,
    add_emg, add_baseline_wander, add_powerline, apply_fir,
    augmented_from_potentials, design_equiripple, detect_r_peaks,
    emd_baseline_remove, generate_dipole_trajectory,
    ground_truth_annotations, limb_leads_from_potentials, run_experiment,
    snr_db, synthesize_record, wavelet_denoise,
)
from ecgforge.dsp.emd import EmdSpec, emd
from ecgforge.dsp.meyer import wavedec, waverec
from ecgforge.rhythm import DetectionParams, match_peaks


def _line(number, ok, text):
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {number}] {status}: {text}")
    assert ok, f"criterion {number} failed: {text}"


@pytest.fixture(scope="module")
def experiment_reports(tmp_path_factory):
    root = tmp_path_factory.mktemp("experiments")
    reports = {}
    for name in ("with-electrode", "no-electrode", "rest-to-motion"):
        config = ExperimentConfig.from_preset(name)
        reports[name] = run_experiment(
            config, root / name, emit_plots=True
        )
    return root, reports


def test_criterion_1_lead_identities():
    start = time.monotonic()
    rng = np.random.default_rng(12345)
    potentials = LimbPotentials(*(rng.standard_normal((3, 10_000)) * 100.0))
    lead_i, lead_ii, lead_iii = limb_leads_from_potentials(potentials)
    avr, avl, avf = augmented_from_potentials(potentials)
    worst_einthoven = float(np.max(np.abs(lead_i + lead_iii - lead_ii)))
    worst_goldberger = float(np.max(np.abs(avr + avl + avf)))

    traj = generate_dipole_trajectory(
        BeatParams.default(), 30.0, 500.0, seed=1
    )
    rec, _ = synthesize_record(traj, LeadSystem())
    worst_einthoven = max(worst_einthoven, float(np.max(np.abs(
        rec.lead("I") + rec.lead("III") - rec.lead("II")
    ))))
    worst_goldberger = max(worst_goldberger, float(np.max(np.abs(
        rec.lead("aVR") + rec.lead("aVL") + rec.lead("aVF")
    ))))
    elapsed = time.monotonic() - start
    _line(
        1,
        worst_einthoven < 1e-9 and worst_goldberger < 1e-9 and elapsed < 5.0,
        f"II=I+III within {worst_einthoven:.2e} mV, sum(augmented) within "
        f"{worst_goldberger:.2e} mV over 1e4 triples + synthesized record "
        f"({elapsed:.1f}s)",
    )


def test_criterion_2_morphology():
    start = time.monotonic()
    traj = generate_dipole_trajectory(
        BeatParams.default(rr_jitter_fraction=0.0), 10.0, 500.0, seed=2
    )
    rec, truth = synthesize_record(traj)
    r_values = {lead: float(rec.lead(lead)[truth].mean())
                for lead in ("I", "II", "III", "aVR", "aVL", "aVF")}
    qrs = traj.segment_labels == "QRS"
    v1_area = float(np.sum(rec.lead("V1")[qrs]))
    v6_area = float(np.sum(rec.lead("V6")[qrs]))
    dominant = r_values["II"] > 0 and all(
        r_values["II"] >= abs(v) - 1e-12 for v in r_values.values()
    )
    elapsed = time.monotonic() - start
    _line(
        2,
        dominant and v1_area < 0 < v6_area and elapsed < 1.0,
        f"lead II R {r_values['II']:.2f} mV dominant-positive; QRS net area "
        f"V1 {v1_area:.1f} < 0 < V6 {v6_area:.1f} ({elapsed:.2f}s)",
    )


def test_criterion_3_notch_efficacy():
    start = time.monotonic()
    spec = FirDesignSpec(
        kind="notch", band_hz=(48.0, 52.0), sample_rate_hz=500.0,
        transition_hz=2.0, pass_ripple_db=0.05, stop_atten_db=45.0,
    )
    coeffs = design_equiripple(spec)

    # independent DFT evaluation of the realized response
    def mag_db(freq):
        n = np.arange(coeffs.shape[0])
        resp = np.sum(coeffs * np.exp(-2j * np.pi * freq * n / 500.0))
        return 20.0 * np.log10(abs(resp))

    att_50 = -mag_db(50.0)
    passband = [abs(mag_db(f)) for f in
                np.concatenate([np.arange(1.0, 46.0), np.arange(54.0, 249.0)])]
    ripple = max(passband)

    traj = generate_dipole_trajectory(BeatParams.default(), 30.0, 500.0, seed=3)
    clean, _ = synthesize_record(traj)
    amp = np.sqrt(2.0 * np.mean(clean.data**2))
    corrupted, _ = add_powerline(clean, 50.0, amp, seed=4)
    input_snr = snr_db(clean, corrupted)
    recovered_snr = snr_db(clean, apply_fir(corrupted, coeffs))
    elapsed = time.monotonic() - start
    _line(
        3,
        att_50 >= 40.0 and ripple <= 1.0 and abs(input_snr) < 0.1
        and recovered_snr >= 30.0 and elapsed < 5.0,
        f"attenuation {att_50:.1f} dB at 50 Hz, ripple {ripple:.3f} dB, "
        f"{input_snr:.2f} dB in -> {recovered_snr:.1f} dB out ({elapsed:.1f}s)",
    )


def test_criterion_4_emd_baseline(clean_60s):
    start = time.monotonic()
    _, rec, _ = clean_60s
    wandered, _ = add_baseline_wander(rec, [(0.3, 1.0)], seed=5)
    cleaned, baseline = emd_baseline_remove(wandered)
    truth = wandered.data - rec.data
    corr = float(np.corrcoef(baseline.data.ravel(), truth.ravel())[0, 1])

    imfs, residue = emd(wandered.lead("II"), EmdSpec())
    rebuilt = residue + np.sum(imfs, axis=0)
    completeness = float(
        np.linalg.norm(rebuilt - wandered.lead("II"))
        / np.linalg.norm(wandered.lead("II"))
    )
    elapsed = time.monotonic() - start
    _line(
        4,
        corr >= 0.9 and completeness <= 1e-6 and elapsed < 30.0,
        f"wander correlation {corr:.3f}, completeness {completeness:.2e} "
        f"({elapsed:.1f}s)",
    )


def test_criterion_5_wavelet(clean_20s):
    start = time.monotonic()
    rng = np.random.default_rng(6)
    worst = 0.0
    for power in range(8, 15):
        x = rng.standard_normal(1 << power)
        xr = waverec(wavedec(x, 4))
        worst = max(worst, np.linalg.norm(xr - x) / np.linalg.norm(x))

    _, rec, _ = clean_20s
    rms = np.sqrt(np.mean(rec.data**2))
    corrupted, _ = add_emg(rec, (20.0, 150.0), rms / 10 ** 0.25, seed=7)
    gain = (
        snr_db(rec, wavelet_denoise(corrupted, WaveletSpec()))
        - snr_db(rec, corrupted)
    )
    elapsed = time.monotonic() - start
    _line(
        5,
        worst <= 1e-8 and gain >= 5.0 and elapsed < 30.0,
        f"round-trip error {worst:.2e} on 2^8..2^14; EMG denoise gain "
        f"{gain:.1f} dB at 5 dB input ({elapsed:.1f}s)",
    )


def test_criterion_6_adaptive(clean_20s):
    start = time.monotonic()
    _, rec, _ = clean_20s
    rng = np.random.default_rng(8)
    accel = AccelStream(
        rec.sample_rate_hz, rng.standard_normal((rec.n_samples, 3)) * 0.3
    )
    noisy = rec.with_data(
        rec.data + accel.samples @ np.array([0.8, -0.5, 0.3])
    )
    out = adaptive_cancel(noisy, accel, AdaptiveSpec())
    skip = rec.n_samples // 2  # second half: well past convergence
    gain = (
        snr_db(rec.data[:, skip:], out.data[:, skip:]) - snr_db(rec, noisy)
    )
    silent = AccelStream.zeros(rec.sample_rate_hz, rec.n_samples)
    passthrough = np.array_equal(
        adaptive_cancel(rec, silent, AdaptiveSpec()).data, rec.data
    )
    elapsed = time.monotonic() - start
    _line(
        6,
        gain >= 15.0 and passthrough and elapsed < 10.0,
        f"constructed-mix gain {gain:.1f} dB post-convergence; zero-reference "
        f"passthrough bit-exact: {passthrough} ({elapsed:.1f}s)",
    )


def test_criterion_7_detection_monte_carlo():
    start = time.monotonic()
    pipeline_config = [
        {"stage": "notch", "params": {"pass_ripple_db": 0.05,
                                      "stop_atten_db": 45.0}},
        {"stage": "wavelet"},
        {"stage": "emd_baseline"},
    ]
    tp = fp = fn = 0
    for seed in range(20):
        params = BeatParams.default()
        traj = generate_dipole_trajectory(params, 20.0, 500.0, seed=seed)
        clean, truth_idx = synthesize_record(traj)
        rms = np.sqrt(np.mean(clean.data**2))
        corrupted, _ = add_emg(
            clean, (20.0, 150.0), rms / 10 ** 0.5, seed=seed + 1000
        )
        recovered, _ = RecordPipeline.from_config(pipeline_config).apply(
            corrupted
        )
        detected = detect_r_peaks(recovered, DetectionParams())
        truth = ground_truth_annotations(truth_idx, 500.0)
        dtp, dfp, dfn = match_peaks(truth, detected, tolerance_s=0.05)
        tp, fp, fn = tp + dtp, fp + dfp, fn + dfn
    sensitivity = tp / (tp + fn)
    precision = tp / (tp + fp)
    elapsed = time.monotonic() - start
    _line(
        7,
        sensitivity >= 0.95 and precision >= 0.95 and elapsed < 60.0,
        f"sensitivity {sensitivity:.4f}, precision {precision:.4f} over 20 "
        f"records at 10 dB input SNR ({elapsed:.1f}s)",
    )


def test_criterion_8_paper_scenario_orderings(experiment_reports):
    start = time.monotonic()
    _, reports = experiment_reports
    we, ne, rm = (reports[k] for k in
                  ("with-electrode", "no-electrode", "rest-to-motion"))
    dc_ok = (we["dc_range"]["across_leads"] < ne["dc_range"]["across_leads"])
    snr_ok = we["snr_db"]["recovered"] > ne["snr_db"]["recovered"]
    flag_frac = rm["artifact_flags"]["fraction_events_flagged"]
    gt_hr = rm["hrv"]["ground_truth"]["mean_hr_bpm"]
    masked_err = abs(rm["hrv"]["masked"]["mean_hr_bpm"] - gt_hr) / gt_hr
    unmasked_err = abs(rm["hrv"]["unmasked"]["mean_hr_bpm"] - gt_hr) / gt_hr
    elapsed = time.monotonic() - start
    _line(
        8,
        dc_ok and snr_ok and flag_frac >= 0.9
        and masked_err <= 0.10 and masked_err < unmasked_err,
        f"dc range {we['dc_range']['across_leads']:.0f} < "
        f"{ne['dc_range']['across_leads']:.0f} counts; recovered SNR "
        f"{we['snr_db']['recovered']:.1f} > {ne['snr_db']['recovered']:.1f} dB; "
        f"{flag_frac:.0%} events flagged; masked HR error "
        f"{masked_err:.1%} <= 10% < unmasked {unmasked_err:.1%} "
        f"({elapsed:.1f}s)",
    )


def test_criterion_9_determinism(experiment_reports, tmp_path):
    start = time.monotonic()
    root, reports = experiment_reports
    config = ExperimentConfig.from_preset("rest-to-motion")
    rerun = run_experiment(config, tmp_path / "rerun", emit_plots=True)
    identical = rerun == reports["rest-to-motion"]
    first_dir = root / "rest-to-motion"
    mismatches = []
    for name in sorted(os.listdir(first_dir)):
        if not filecmp.cmp(first_dir / name, tmp_path / "rerun" / name,
                           shallow=False):
            mismatches.append(name)
    elapsed = time.monotonic() - start
    _line(
        9,
        identical and not mismatches,
        f"rerun byte-identical across {len(os.listdir(first_dir))} output "
        f"files ({elapsed:.1f}s)"
        + (f"; mismatches: {mismatches}" if mismatches else ""),
    )
