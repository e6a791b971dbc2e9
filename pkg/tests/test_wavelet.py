import numpy as np
import pytest

from ecgforge import ConfigError, WaveletSpec, snr_db, wavelet_denoise
from ecgforge import add_emg
from ecgforge.dsp.meyer import (
    meyer_filter, threshold_coefficients, wavedec, waverec,
)


class TestTransform:
    @pytest.mark.parametrize("power", range(8, 15))
    def test_round_trip_on_dyadic_lengths(self, power):
        rng = np.random.default_rng(power)
        x = rng.standard_normal(1 << power)
        for levels in (1, 4):
            coeffs = wavedec(x, levels)
            err = np.linalg.norm(waverec(coeffs) - x) / np.linalg.norm(x)
            assert err <= 1e-8

    def test_denoise_zero_threshold_is_identity(self, clean_20s):
        _, rec, _ = clean_20s
        spec = WaveletSpec(threshold_scale=0.0)
        out = wavelet_denoise(rec, spec)
        err = np.linalg.norm(out.data - rec.data) / np.linalg.norm(rec.data)
        assert err <= 1e-8

    def test_filter_orthogonality(self):
        h = meyer_filter(62)
        full = np.correlate(h, h, "full")
        evens = full[61::2]
        assert abs(evens[0] - 1.0) < 1e-12
        assert np.max(np.abs(evens[1:])) < 1e-12
        assert abs(h.sum() - np.sqrt(2.0)) < 1e-12

    def test_non_dyadic_length_rejected_by_wavedec(self):
        with pytest.raises(ConfigError):
            wavedec(np.zeros(1000), 4)  # 1000 not divisible by 16

    def test_too_short_signal_rejected(self):
        with pytest.raises(ConfigError):
            wavelet_denoise(np.zeros(8), WaveletSpec(levels=4))


class TestThresholdRules:
    def test_hard(self):
        w = np.array([-3.0, -0.5, 0.0, 0.5, 3.0])
        out = threshold_coefficients(w, 1.0, "hard")
        np.testing.assert_array_equal(out, [-3.0, 0.0, 0.0, 0.0, 3.0])

    def test_soft(self):
        w = np.array([-3.0, -0.5, 0.0, 0.5, 3.0])
        out = threshold_coefficients(w, 1.0, "soft")
        np.testing.assert_allclose(out, [-2.0, 0.0, 0.0, 0.0, 2.0])

    def test_improved_continuous_at_tau(self):
        tau = 1.0
        eps = 1e-9
        below = threshold_coefficients(np.array([tau - eps]), tau, "improved")
        above = threshold_coefficients(np.array([tau + eps]), tau, "improved")
        assert abs(below[0]) < 1e-6 and abs(above[0]) < 1e-6

    def test_improved_asymptotically_unbiased(self):
        big = np.array([50.0])
        out = threshold_coefficients(big, 1.0, "improved", alpha=1.0)
        assert out[0] == pytest.approx(50.0, abs=1e-12)

    def test_improved_zero_below_tau(self):
        w = np.linspace(-0.99, 0.99, 21)
        np.testing.assert_array_equal(
            threshold_coefficients(w, 1.0, "improved"), 0.0
        )

    def test_all_rules_shrink(self):
        rng = np.random.default_rng(1)
        w = rng.standard_normal(1000) * 3.0
        for rule in ("hard", "soft", "improved"):
            out = threshold_coefficients(w, 1.0, rule)
            assert np.all(np.abs(out) <= np.abs(w) + 1e-12)

    def test_unknown_rule_rejected(self):
        with pytest.raises(ConfigError):
            threshold_coefficients(np.zeros(4), 1.0, "garotte")


class TestDenoising:
    def test_pure_noise_heavily_suppressed(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal(8192)
        out = wavelet_denoise(x, WaveletSpec())
        assert np.mean(out**2) < 0.2 * np.mean(x**2)

    def test_output_rms_never_exceeds_input_on_noise(self):
        for seed in range(3):
            x = np.random.default_rng(seed).standard_normal(4096)
            out = wavelet_denoise(x, WaveletSpec())
            assert np.sqrt(np.mean(out**2)) <= np.sqrt(np.mean(x**2)) + 1e-9

    def test_emg_snr_improvement(self, clean_20s):
        # frozen regression bound: >= 5 dB gain at 5 dB input SNR
        _, rec, _ = clean_20s
        rms = np.sqrt(np.mean(rec.data**2))
        corrupted, _ = add_emg(
            rec, (20.0, 150.0), rms / 10 ** (5.0 / 20.0), seed=17
        )
        assert snr_db(rec, corrupted) == pytest.approx(5.0, abs=0.3)
        denoised = wavelet_denoise(corrupted, WaveletSpec())
        assert snr_db(rec, denoised) - snr_db(rec, corrupted) >= 5.0

    def test_noise_estimate_override(self, clean_20s):
        _, rec, _ = clean_20s
        a = wavelet_denoise(rec, WaveletSpec(), noise_estimate=0.0)
        err = np.linalg.norm(a.data - rec.data) / np.linalg.norm(rec.data)
        assert err <= 1e-8  # zero sigma means zero threshold

    def test_spec_validation(self):
        with pytest.raises(ConfigError):
            WaveletSpec(levels=0)
        with pytest.raises(ConfigError, match="family"):
            WaveletSpec(family="db4")  # other families are stubs only
        with pytest.raises(ConfigError):
            WaveletSpec(alpha=-1.0)
        with pytest.raises(ConfigError):
            WaveletSpec(threshold_rule="median")
