import numpy as np
import pytest

from ecgforge import (
    BeatParams, ConfigError, DipoleTrajectory, generate_dipole_trajectory,
    ideal_pqrst_template, synthesize_record,
)
from ecgforge.synth import SEGMENTS


def test_beat_onsets_at_60_bpm_no_jitter():
    params = BeatParams.default(rr_jitter_fraction=0.0)
    traj = generate_dipole_trajectory(params, 10.0, 500.0, seed=1)
    assert len(traj.beat_onsets) == 10
    np.testing.assert_array_equal(np.diff(traj.beat_onsets), 500)


def test_beat_count_within_one_of_nominal():
    params = BeatParams.default(rr_jitter_fraction=0.05, heart_rate_bpm=72.0)
    for seed in range(5):
        traj = generate_dipole_trajectory(params, 30.0, 500.0, seed=seed)
        nominal = int(30.0 * 72.0 / 60.0)
        assert abs(len(traj.beat_onsets) - nominal) <= 1


def test_zero_jitter_gives_equal_rr():
    params = BeatParams.default(rr_jitter_fraction=0.0, heart_rate_bpm=75.0)
    traj = generate_dipole_trajectory(params, 20.0, 500.0, seed=3)
    assert len(set(np.diff(traj.beat_onsets))) == 1


def test_qrs_peak_dominates_p_wave(clean_20s):
    traj, _, _ = clean_20s
    mag = traj.magnitude()
    qrs_peak = mag[traj.segment_labels == "QRS"].max()
    p_peak = mag[traj.segment_labels == "P"].max()
    assert qrs_peak > 5.0 * p_peak


def test_trajectory_deterministic():
    params = BeatParams.default()
    a = generate_dipole_trajectory(params, 10.0, 500.0, seed=77)
    b = generate_dipole_trajectory(params, 10.0, 500.0, seed=77)
    np.testing.assert_array_equal(a.samples, b.samples)
    np.testing.assert_array_equal(a.segment_labels, b.segment_labels)
    np.testing.assert_array_equal(a.beat_onsets, b.beat_onsets)


def test_segment_labels_cover_and_qrs_contiguous(clean_20s):
    traj, _, _ = clean_20s
    assert set(np.unique(traj.segment_labels)) <= set(SEGMENTS)
    in_qrs = (traj.segment_labels == "QRS").astype(int)
    runs = np.sum(np.diff(in_qrs) == 1) + int(in_qrs[0])
    # the final onset may belong to a beat whose QRS falls past the record end
    assert runs in (len(traj.beat_onsets) - 1, len(traj.beat_onsets))


def test_closed_loop_between_beats(clean_20s):
    traj, _, _ = clean_20s
    mag = traj.magnitude()
    baseline = traj.segment_labels == "baseline"
    assert mag[baseline].max() < 0.05 * mag.max()


def test_annotated_r_peaks_inside_qrs(clean_20s):
    traj, _, truth = clean_20s
    assert len(truth) in (len(traj.beat_onsets) - 1, len(traj.beat_onsets))
    for idx in truth:
        assert traj.segment_labels[idx] == "QRS"


def test_lead_ii_r_positive_and_largest_limb_lead(clean_20s):
    _, rec, truth = clean_20s
    r_values = {lead: rec.lead(lead)[truth].mean()
                for lead in ("I", "II", "III", "aVR", "aVL", "aVF")}
    assert r_values["II"] > 0
    assert all(r_values["II"] >= abs(v) - 1e-12 for v in r_values.values())


def test_qrs_net_area_negative_v1_positive_v6(clean_20s):
    traj, rec, _ = clean_20s
    qrs = traj.segment_labels == "QRS"
    assert np.sum(rec.lead("V1")[qrs]) < 0
    assert np.sum(rec.lead("V6")[qrs]) > 0


def test_zero_trajectory_gives_zero_record():
    traj = DipoleTrajectory(
        sample_rate_hz=500.0,
        samples=np.zeros((1000, 3)),
        segment_labels=np.full(1000, "baseline", dtype="U8"),
        beat_onsets=np.array([0]),
    )
    rec, _ = synthesize_record(traj)
    np.testing.assert_array_equal(rec.data, 0.0)


def test_record_satisfies_einthoven_and_goldberger(clean_20s):
    _, rec, _ = clean_20s
    assert np.max(np.abs(
        rec.lead("I") + rec.lead("III") - rec.lead("II")
    )) < 1e-9
    assert np.max(np.abs(
        rec.lead("aVR") + rec.lead("aVL") + rec.lead("aVF")
    )) < 1e-9


def test_flipping_qrs_amplitudes_negates_qrs_deflections(default_params):
    # leads are linear in the dipole: relative to a record synthesized with
    # the QRS amplitudes zeroed out, flipping them negates the deflection
    doc = default_params.to_dict()

    def variant(scale):
        d = dict(doc)
        d["qrs"] = [
            {**c, "amplitude_mv": [scale * a for a in c["amplitude_mv"]]}
            for c in doc["qrs"]
        ]
        traj = generate_dipole_trajectory(
            BeatParams.from_dict(d), 10.0, 500.0, seed=5
        )
        return synthesize_record(traj)[0].data

    base, flipped, background = variant(1.0), variant(-1.0), variant(0.0)
    np.testing.assert_allclose(
        flipped - background, -(base - background), atol=1e-12
    )


class TestTemplate:
    def test_fiducial_order(self):
        tpl = ideal_pqrst_template(500.0)
        order = [tpl.fiducials[k] for k in ("P", "Q", "R", "S", "T")]
        assert order == sorted(order)
        assert len(set(order)) == 5

    def test_r_normalized_to_one(self):
        tpl = ideal_pqrst_template(500.0)
        assert tpl.samples.max() == pytest.approx(1.0)
        assert int(np.argmax(tpl.samples)) == tpl.fiducials["R"]

    def test_template_matches_synthesized_beat(self, clean_20s):
        # regression bound frozen from the default parameter set: one beat
        # of the default record correlates >= 0.9 with the golden template
        traj, rec, _ = clean_20s
        tpl = ideal_pqrst_template(500.0)
        start = traj.beat_onsets[1]
        beat = rec.lead("II")[start:start + tpl.samples.shape[0]]
        corr = np.corrcoef(beat, tpl.samples)[0, 1]
        assert corr >= 0.9

    def test_rate_below_100_rejected(self):
        with pytest.raises(ConfigError):
            ideal_pqrst_template(50.0)


class TestValidation:
    def test_heart_rate_bounds(self):
        with pytest.raises(ConfigError):
            BeatParams.default(heart_rate_bpm=10.0)
        with pytest.raises(ConfigError):
            BeatParams.default(heart_rate_bpm=300.0)

    def test_wave_order_enforced(self):
        doc = BeatParams.default().to_dict()
        doc["p"][0]["center_rad"] = 5.0  # after the T wave
        with pytest.raises(ConfigError):
            BeatParams.from_dict(doc)

    def test_rate_and_duration_preconditions(self):
        params = BeatParams.default()
        with pytest.raises(ConfigError):
            generate_dipole_trajectory(params, 10.0, 50.0, seed=1)
        with pytest.raises(ConfigError):
            generate_dipole_trajectory(params, 0.5, 500.0, seed=1)
