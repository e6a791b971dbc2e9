"""Minimax (equiripple) linear-phase FIR design and application.

Designs run the Remez exchange via scipy and then verify the realized
response on a dense DFT grid, growing the tap count until the ripple and
attenuation targets are met or ``max_taps`` is exhausted.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import signal as sp_signal

from ..errors import ConfigError, FilterDesignError
from ..record import MultiLeadRecord

_GRID = 1 << 14


@dataclass(frozen=True)
class FirDesignSpec:
    """Design targets for a notch (band-reject) or bandpass filter.

    ``band_hz`` is the rejected band for a notch and the retained band for a
    bandpass; transitions of width ``transition_hz`` sit on each side.
    """

    kind: str
    band_hz: tuple
    sample_rate_hz: float
    transition_hz: float = 2.0
    pass_ripple_db: float = 1.0
    stop_atten_db: float = 40.0
    max_taps: int = 4001

    def __post_init__(self):
        if self.kind not in ("notch", "bandpass"):
            raise ConfigError("filter kind must be 'notch' or 'bandpass'")
        lo, hi = self.band_hz
        nyq = self.sample_rate_hz / 2.0
        if not (0.0 < lo < hi < nyq):
            raise ConfigError(
                f"band edges must be strictly increasing inside (0, {nyq}), "
                f"got {self.band_hz}"
            )
        if self.transition_hz <= 0:
            raise ConfigError("transition width must be positive")
        if self.stop_atten_db <= 0:
            raise ConfigError("stopband attenuation must be positive")
        if self.pass_ripple_db <= 0:
            raise ConfigError("passband ripple must be positive")
        object.__setattr__(self, "band_hz", (float(lo), float(hi)))

    def _bands(self):
        """(edges in Hz, desired gains, weights) for the Remez call."""
        lo, hi = self.band_hz
        tw = self.transition_hz
        nyq = self.sample_rate_hz / 2.0
        delta_p = (10 ** (self.pass_ripple_db / 20.0) - 1.0) / (
            10 ** (self.pass_ripple_db / 20.0) + 1.0
        )
        delta_s = 10 ** (-self.stop_atten_db / 20.0)
        w_pass, w_stop = 1.0 / delta_p, 1.0 / delta_s
        if self.kind == "notch":
            if lo - tw <= 0 or hi + tw >= nyq:
                raise FilterDesignError(
                    "notch transitions extend beyond (0, Nyquist): "
                    f"band {self.band_hz} with transition {tw} Hz"
                )
            edges = [0, lo - tw, lo, hi, hi + tw, nyq]
            desired = [1, 0, 1]
            weights = [w_pass, w_stop, w_pass]
        else:
            if lo - tw <= 0:
                raise FilterDesignError(
                    f"bandpass lower transition reaches DC: passband edge "
                    f"{lo} Hz needs a transition narrower than {lo} Hz"
                )
            if hi + tw >= nyq:
                raise FilterDesignError(
                    "bandpass upper transition reaches Nyquist: edge "
                    f"{hi} Hz with transition {tw} Hz at fs "
                    f"{self.sample_rate_hz} Hz"
                )
            edges = [0, lo - tw, lo, hi, hi + tw, nyq]
            desired = [0, 1, 0]
            weights = [w_stop, w_pass, w_stop]
        return edges, desired, weights, delta_p, delta_s

    def estimated_taps(self):
        """Kaiser's order estimate from the tightest transition."""
        _, _, _, delta_p, delta_s = self._bands()
        df = self.transition_hz / self.sample_rate_hz
        n = (-20.0 * np.log10(np.sqrt(delta_p * delta_s)) - 13.0) / (
            14.6 * df
        ) + 1.0
        n = int(np.ceil(n))
        return n + 1 if n % 2 == 0 else n  # type-I (odd) only

    def key(self):
        return (
            self.kind, self.band_hz, self.sample_rate_hz, self.transition_hz,
            self.pass_ripple_db, self.stop_atten_db, self.max_taps,
        )


def frequency_response(coeffs, sample_rate_hz, n_points=_GRID):
    """(freqs_hz, complex response) of an FIR filter on a dense grid."""
    freqs, h = sp_signal.freqz(coeffs, worN=n_points, fs=sample_rate_hz)
    return freqs, h


def _measure(coeffs, spec):
    """Worst passband ripple and stopband attenuation (both in dB, >= 0)."""
    edges, desired, _, _, _ = spec._bands()
    freqs, h = frequency_response(coeffs, spec.sample_rate_hz)
    mag = np.abs(h)
    worst_ripple = 0.0
    worst_atten = np.inf
    for i, gain in enumerate(desired):
        band = (freqs >= edges[2 * i]) & (freqs <= edges[2 * i + 1])
        if not np.any(band):
            continue
        if gain == 1:
            dev = np.max(np.abs(20.0 * np.log10(np.maximum(mag[band], 1e-12))))
            worst_ripple = max(worst_ripple, dev)
        else:
            atten = -20.0 * np.log10(np.maximum(np.max(mag[band]), 1e-12))
            worst_atten = min(worst_atten, atten)
    return worst_ripple, worst_atten


@lru_cache(maxsize=32)
def _design_cached(key):
    spec = FirDesignSpec(
        kind=key[0], band_hz=key[1], sample_rate_hz=key[2],
        transition_hz=key[3], pass_ripple_db=key[4], stop_atten_db=key[5],
        max_taps=key[6],
    )
    edges, desired, weights, _, _ = spec._bands()
    n_taps = min(spec.estimated_taps(), spec.max_taps | 1)
    if spec.estimated_taps() > spec.max_taps:
        raise FilterDesignError(
            f"estimated order {spec.estimated_taps()} exceeds max_taps "
            f"{spec.max_taps} for transition {spec.transition_hz} Hz"
        )
    last = None
    while n_taps <= spec.max_taps:
        coeffs = sp_signal.remez(
            n_taps, edges, desired, weight=weights, fs=spec.sample_rate_hz
        )
        ripple, atten = _measure(coeffs, spec)
        last = (ripple, atten)
        if ripple <= spec.pass_ripple_db and atten >= spec.stop_atten_db:
            return coeffs
        n_taps = n_taps + max(2, n_taps // 10)
        if n_taps % 2 == 0:
            n_taps += 1
    ripple, atten = last
    if atten < spec.stop_atten_db:
        raise FilterDesignError(
            f"stopband attenuation {atten:.1f} dB below target "
            f"{spec.stop_atten_db} dB at max_taps {spec.max_taps}"
        )
    raise FilterDesignError(
        f"passband ripple {ripple:.2f} dB above target "
        f"{spec.pass_ripple_db} dB at max_taps {spec.max_taps}"
    )


def design_equiripple(spec: FirDesignSpec):
    """Equiripple linear-phase FIR coefficients meeting ``spec``.

    The returned filter has odd length and even symmetry; the realized
    response is re-measured on a dense grid before being accepted, so a
    returned design always meets the ripple/attenuation targets. Raises
    FilterDesignError naming the violated constraint otherwise.
    """
    return _design_cached(spec.key()).copy()


def _odd_extension(x, pad):
    """Antisymmetric (value- and slope-continuous) end extension."""
    left = 2.0 * x[0] - x[pad:0:-1]
    right = 2.0 * x[-1] - x[-2: -pad - 2: -1]
    return np.concatenate([left, x, right])


def _filter_one(x, coeffs, zero_phase):
    n_taps = len(coeffs)
    if zero_phase and n_taps % 2 == 0:
        raise ConfigError("zero-phase application needs an odd-length filter")
    pad = n_taps  # odd extension keeps edge transients in-band
    ext = _odd_extension(x, pad)
    full = sp_signal.fftconvolve(ext, coeffs, mode="full")
    if zero_phase:
        delay = (n_taps - 1) // 2
    else:
        delay = 0
    start = pad + delay
    return full[start:start + x.shape[0]]


def apply_fir(rec, coeffs, zero_phase=True):
    """Filter every lead independently; zero-phase mode preserves peak timing.

    Zero-phase application centers the (odd-length, symmetric) filter, so a
    linear-phase design shifts features by less than one sample.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise ConfigError("filter coefficients must be a non-empty 1-D array")
    if isinstance(rec, MultiLeadRecord):
        if rec.n_samples <= coeffs.size:
            raise ConfigError(
                f"record of {rec.n_samples} samples is too short for a "
                f"{coeffs.size}-tap filter"
            )
        return rec.map_leads(lambda _, x: _filter_one(x, coeffs, zero_phase))
    x = np.asarray(rec, dtype=float)
    if x.shape[-1] <= coeffs.size:
        raise ConfigError("signal too short for this filter")
    return _filter_one(x, coeffs, zero_phase)
