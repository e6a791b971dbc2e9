"""Empirical mode decomposition by envelope sifting, and baseline removal.

Each intrinsic mode function is extracted by repeatedly subtracting the mean
of the cubic-spline envelopes through the local maxima and minima until the
normalized change between iterations falls under the SD threshold. Extrema
are mirror-extended past both ends so the envelopes stay sane at the edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import find_peaks

from ..errors import ConfigError, SiftingError
from ..record import MultiLeadRecord

_MIRROR_EXTREMA = 2


@dataclass(frozen=True)
class EmdSpec:
    """Sifting controls: budget, stop criterion, boundary handling."""

    max_imfs: int = 12
    sd_threshold: float = 0.3
    max_sift_iterations: int = 50
    boundary: str = "mirror"

    def __post_init__(self):
        if self.max_imfs < 1:
            raise ConfigError("max_imfs must be >= 1")
        if not (0.0 < self.sd_threshold < 1.0):
            raise ConfigError("sd_threshold must lie in (0, 1)")
        if self.max_sift_iterations < 1:
            raise ConfigError("max_sift_iterations must be >= 1")
        if self.boundary != "mirror":
            raise ConfigError("only the 'mirror' boundary policy is supported")


def _mirrored_envelope(x, locs, vals):
    """Cubic spline through extrema reflected about both signal ends."""
    n = x.shape[0]
    pad = min(_MIRROR_EXTREMA, locs.shape[0])
    left_t = -locs[:pad][::-1]
    left_v = vals[:pad][::-1]
    right_t = 2 * (n - 1) - locs[-pad:][::-1]
    right_v = vals[-pad:][::-1]
    t = np.concatenate([left_t, locs, right_t])
    v = np.concatenate([left_v, vals, right_v])
    keep = np.concatenate([[True], np.diff(t) > 0])
    spline = CubicSpline(t[keep], v[keep])
    return spline(np.arange(n))


def _extrema(x):
    maxima, _ = find_peaks(x)
    minima, _ = find_peaks(-x)
    return maxima, minima


def _sift_one(residual, spec):
    h = residual.copy()
    for _ in range(spec.max_sift_iterations):
        maxima, minima = _extrema(h)
        if maxima.shape[0] < 2 or minima.shape[0] < 2:
            return h, True  # ran out of oscillation: treat as final mode
        upper = _mirrored_envelope(h, maxima, h[maxima])
        lower = _mirrored_envelope(h, minima, h[minima])
        mean = 0.5 * (upper + lower)
        h_next = h - mean
        denom = float(np.sum(h**2))
        sd = float(np.sum((h - h_next) ** 2)) / max(denom, 1e-300)
        h = h_next
        if sd < spec.sd_threshold:
            return h, False
    raise SiftingError(
        f"sifting did not converge within {spec.max_sift_iterations} "
        "iterations"
    )


def emd(x, spec=None):
    """Decompose a 1-D signal into (imfs, residue).

    The components sum back to the input exactly up to float rounding. A
    non-convergent sift raises SiftingError carrying the partial
    decomposition in its ``imfs``/``residue`` attributes.
    """
    if spec is None:
        spec = EmdSpec()
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ConfigError("emd expects a 1-D signal")
    imfs = []
    residual = x.copy()
    for _ in range(spec.max_imfs):
        maxima, minima = _extrema(residual)
        if maxima.shape[0] < 2 or minima.shape[0] < 2:
            break
        try:
            imf, exhausted = _sift_one(residual, spec)
        except SiftingError as err:
            err.imfs = imfs
            err.residue = residual
            raise
        imfs.append(imf)
        residual = residual - imf
        if exhausted:
            break
    return imfs, residual


def _mean_frequency_hz(imf, sample_rate_hz):
    """Zero-crossing-rate estimate of the mean oscillation frequency."""
    signs = np.sign(imf)
    signs = signs[signs != 0]
    if signs.shape[0] < 2:
        return 0.0
    crossings = int(np.sum(signs[1:] != signs[:-1]))
    duration = imf.shape[0] / sample_rate_hz
    return crossings / (2.0 * duration)


def _baseline_one(x, spec, cutoff_hz, sample_rate_hz):
    if np.ptp(x) == 0.0:
        return np.zeros_like(x), x.copy()  # constant: no sifting needed
    imfs, residue = emd(x, spec)
    baseline = residue.copy()
    for imf in imfs:
        if _mean_frequency_hz(imf, sample_rate_hz) < cutoff_hz:
            baseline = baseline + imf
    return x - baseline, baseline


def emd_baseline_remove(rec, spec=None, cutoff_hz=0.7, sample_rate_hz=None):
    """Split a record into (detrended record, baseline estimate).

    The baseline is the residue plus every mode whose mean zero-crossing
    frequency falls below ``cutoff_hz``; a constant input short-circuits to
    baseline = input without sifting. Plain arrays need ``sample_rate_hz``.
    """
    if spec is None:
        spec = EmdSpec()
    if isinstance(rec, MultiLeadRecord):
        baselines = np.empty_like(rec.data)
        cleaned = np.empty_like(rec.data)
        for i in range(rec.n_leads):
            cleaned[i], baselines[i] = _baseline_one(
                rec.data[i], spec, cutoff_hz, rec.sample_rate_hz
            )
        return rec.with_data(cleaned), rec.with_data(baselines)
    if sample_rate_hz is None:
        raise ConfigError("sample_rate_hz is required for array input")
    x = np.asarray(rec, dtype=float)
    return _baseline_one(x, spec, cutoff_hz, sample_rate_hz)
