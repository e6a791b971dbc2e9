import numpy as np
import pytest

from ecgforge import (
    BeatParams, ConfigError, DetectionParams, MultiLeadRecord,
    RPeakAnnotations, build_rr, detect_r_peaks, detection_scores,
    generate_dipole_trajectory, ground_truth_annotations, hrv_metrics,
    mask_and_interpolate, synthesize_record,
)
from ecgforge.rhythm import RrSeries


def peaks_from_ms(intervals_ms, fs=500.0):
    """Build annotations whose successive spacings are the given intervals."""
    samples = np.cumsum(
        [0] + [int(round(v * fs / 1000.0)) for v in intervals_ms]
    )
    return RPeakAnnotations(indices=samples, sample_rate_hz=fs)


class TestDetection:
    def test_clean_60bpm_peaks_within_10ms(self):
        params = BeatParams.default(rr_jitter_fraction=0.0)
        traj = generate_dipole_trajectory(params, 10.0, 500.0, seed=1)
        rec, truth_idx = synthesize_record(traj)
        detected = detect_r_peaks(rec, DetectionParams())
        assert len(detected) == len(truth_idx)
        for t, d in zip(truth_idx, detected.indices):
            assert abs(t - d) <= 5  # 10 ms at 500 Hz

    def test_all_zero_record_yields_no_peaks(self):
        rec = MultiLeadRecord(
            500.0, ("I", "II"), np.zeros((2, 5000))
        )
        assert len(detect_r_peaks(rec, DetectionParams())) == 0

    def test_amplitude_scale_invariance(self, clean_20s):
        _, rec, _ = clean_20s
        base = detect_r_peaks(rec, DetectionParams())
        for scale in (0.01, 7.3, 1000.0):
            scaled = rec.with_data(rec.data * scale)
            out = detect_r_peaks(scaled, DetectionParams())
            np.testing.assert_array_equal(out.indices, base.indices)

    def test_confidence_in_unit_interval(self, clean_20s):
        _, rec, _ = clean_20s
        det = detect_r_peaks(rec, DetectionParams())
        assert np.all((det.confidence >= 0) & (det.confidence <= 1))
        assert np.all(det.confidence > 0)

    def test_short_record_rejected(self):
        rec = MultiLeadRecord(500.0, ("II",), np.zeros((1, 500)))
        with pytest.raises(ConfigError):
            detect_r_peaks(rec, DetectionParams())

    def test_refractory_respected(self, clean_20s):
        _, rec, _ = clean_20s
        det = detect_r_peaks(rec, DetectionParams())
        assert np.min(np.diff(det.indices)) >= int(0.2 * 500)


class TestAnnotations:
    def test_monotonicity_enforced(self):
        with pytest.raises(ConfigError):
            RPeakAnnotations(indices=[100, 100], sample_rate_hz=500.0)

    def test_refractory_enforced(self):
        with pytest.raises(ConfigError):
            RPeakAnnotations(indices=[100, 140], sample_rate_hz=500.0)

    def test_detection_scores_perfect_match(self):
        a = peaks_from_ms([1000.0] * 9)
        sens, prec, f1 = detection_scores(a, a)
        assert (sens, prec, f1) == (1.0, 1.0, 1.0)

    def test_detection_scores_with_misses_and_extras(self):
        truth = peaks_from_ms([1000.0] * 9)
        detected = RPeakAnnotations(
            indices=np.concatenate([truth.indices[:-1], [truth.indices[-1] + 400]]),
            sample_rate_hz=500.0,
        )
        sens, prec, _ = detection_scores(truth, detected)
        assert sens == pytest.approx(9 / 10)
        assert prec == pytest.approx(9 / 10)


class TestBuildRr:
    def test_uniform_spacing(self):
        peaks = peaks_from_ms([1000.0] * 10)
        rr = build_rr(peaks)
        np.testing.assert_allclose(rr.intervals_ms, 1000.0)
        assert all(f == "measured" for f in rr.flags)

    def test_double_detection_masked(self):
        samples = np.array([0, 500, 550, 1050])  # 100 ms gap in the middle
        peaks = RPeakAnnotations(
            indices=samples, sample_rate_hz=500.0, refractory_s=0.05
        )
        rr = build_rr(peaks)
        assert list(rr.flags) == ["measured", "masked", "measured"]

    def test_jittered_mean_matches_generator(self):
        params = BeatParams.default(rr_jitter_fraction=0.04)
        traj = generate_dipole_trajectory(params, 60.0, 500.0, seed=5)
        rec, truth_idx = synthesize_record(traj)
        rr = build_rr(ground_truth_annotations(truth_idx, 500.0))
        assert np.mean(rr.intervals_ms) == pytest.approx(1000.0, rel=0.01)

    def test_two_peak_minimum(self):
        with pytest.raises(ConfigError):
            build_rr(
                RPeakAnnotations(indices=[100], sample_rate_hz=500.0)
            )


class TestMaskAndInterpolate:
    def test_constant_series_predicts_constant(self):
        rr = build_rr(peaks_from_ms([1000.0] * 12))
        window = (rr.origin_indices[5, 0], rr.origin_indices[5, 1] + 1)
        out = mask_and_interpolate(rr, [window])
        assert out.flags[5] == "interpolated"
        assert out.intervals_ms[5] == pytest.approx(1000.0)
        untouched = np.delete(np.arange(len(rr)), [4, 5, 6])
        np.testing.assert_array_equal(
            out.intervals_ms[untouched], rr.intervals_ms[untouched]
        )

    def test_no_windows_identity(self):
        rr = build_rr(peaks_from_ms([900.0, 950.0, 1000.0, 980.0]))
        out = mask_and_interpolate(rr, [])
        assert out == rr

    def test_linear_drift_matches_analytic_ewma(self):
        # analytic oracle: prediction is the decay-weighted mean of the 8
        # most recent measured intervals; the window covers the peak shared
        # by intervals 11 and 12, so both take the same prediction
        intervals = [1000.0 + 5.0 * k for k in range(15)]
        rr = build_rr(peaks_from_ms(intervals))
        window = (
            rr.origin_indices[12, 0],
            rr.origin_indices[12, 0] + 1,
        )
        out = mask_and_interpolate(rr, [window])
        affected = np.flatnonzero(out.flags == "interpolated")
        np.testing.assert_array_equal(affected, [11, 12])
        history = rr.intervals_ms[3:11][::-1]  # most recent first
        weights = 0.75 ** np.arange(8)
        expected = np.dot(weights, history) / np.sum(weights)
        for idx in affected:
            assert out.intervals_ms[idx] == pytest.approx(expected)
            assert abs(out.intervals_ms[idx] - rr.intervals_ms[idx]) <= 25.0

    def test_idempotent(self):
        rr = build_rr(peaks_from_ms([1000.0, 990.0, 1010.0, 1005.0,
                                     995.0, 1000.0]))
        window = (rr.origin_indices[3, 0], rr.origin_indices[3, 0] + 1)
        once = mask_and_interpolate(rr, [window])
        twice = mask_and_interpolate(once, [window])
        assert once == twice

    def test_everything_masked_rejected(self):
        rr = build_rr(peaks_from_ms([1000.0] * 5))
        whole = (0, int(rr.origin_indices[-1, 1]) + 1)
        with pytest.raises(ConfigError):
            mask_and_interpolate(rr, [whole])


class TestHrvMetrics:
    def test_constant_series(self):
        rr = build_rr(peaks_from_ms([1000.0] * 10))
        hrv = hrv_metrics(rr)
        assert hrv.sdnn_ms == 0.0
        assert hrv.rmssd_ms == 0.0
        assert hrv.pnn50 == 0.0
        assert hrv.mean_hr_bpm == pytest.approx(60.0)

    def test_alternating_closed_form(self):
        rr = build_rr(peaks_from_ms([900.0, 1100.0] * 5))
        hrv = hrv_metrics(rr)
        assert hrv.rmssd_ms == pytest.approx(200.0)
        assert hrv.pnn50 == pytest.approx(1.0)

    def test_jitter_sdnn_matches_generator_sigma(self):
        # generator sigma as oracle: 5% jitter at 60 bpm -> SDNN ~= 50 ms
        params = BeatParams.default(rr_jitter_fraction=0.05)
        traj = generate_dipole_trajectory(params, 300.0, 500.0, seed=6)
        rec, truth_idx = synthesize_record(traj)
        rr = build_rr(ground_truth_annotations(truth_idx, 500.0))
        hrv = hrv_metrics(rr)
        assert hrv.sdnn_ms == pytest.approx(50.0, rel=0.15)

    def test_flags_partition_counts(self):
        rr = build_rr(peaks_from_ms([1000.0] * 10))
        window = (rr.origin_indices[4, 0], rr.origin_indices[4, 0] + 1)
        out = mask_and_interpolate(rr, [window])
        hrv = hrv_metrics(out)
        masked = np.sum(out.flags == "masked")
        assert hrv.count_measured + hrv.count_interpolated + masked == len(out)

    def test_insufficient_data_rejected(self):
        rr = RrSeries(
            intervals_ms=np.array([1000.0, 100.0]),
            flags=np.array(["measured", "masked"]),
            origin_indices=np.array([[0, 500], [500, 550]]),
        )
        with pytest.raises(ConfigError):
            hrv_metrics(rr)
