"""Seeded interference injectors with ground-truth logging.

Four interference classes: powerline coupling (common mode), broadband EMG
(independent per lead), sub-0.5 Hz baseline wander, and motion events
(polarization microslip steps, spiky common-mode transients, low-frequency
cable bursts) paired with a synthetic tri-axial accelerometer stream.

Every injector is additive and deterministic per seed, and stores the exact
added waveform on its event so corrupted = clean + sum(components) can be
checked bit-consistently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .record import AccelStream, Event, EventLog, MultiLeadRecord
from .validation import UNITS_MV, check_finite, check_seed


def _require_mv(rec):
    if rec.units != UNITS_MV:
        raise ConfigError(
            f"noise injectors operate on mV records, got {rec.units!r}"
        )


def _band_limited_noise(rng, n, fs, band_hz, rms):
    """Gaussian noise whose spectrum is confined to ``band_hz``, exact RMS."""
    lo, hi = band_hz
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    spectrum[(freqs < lo) | (freqs > hi)] = 0.0
    shaped = np.fft.irfft(spectrum, n)
    power = np.sqrt(np.mean(shaped**2))
    if power == 0.0:
        return shaped
    return shaped * (rms / power)


def add_powerline(rec, freq_hz, amplitude_mv, seed, phase_rad=0.0):
    """Add an identical-phase sinusoid to every lead (common-mode coupling)."""
    _require_mv(rec)
    check_seed(seed)
    if freq_hz >= rec.sample_rate_hz / 2.0:
        raise ConfigError(
            f"powerline frequency {freq_hz} Hz is at or above Nyquist"
        )
    if amplitude_mv < 0:
        raise ConfigError("powerline amplitude must be >= 0")
    if amplitude_mv == 0.0:
        return rec, []
    wave = amplitude_mv * np.sin(
        2.0 * np.pi * freq_hz * rec.times() + phase_rad
    )
    event = Event(
        kind="powerline", source="injected",
        onset_sample=0, duration_samples=rec.n_samples,
        params={"freq_hz": freq_hz, "amplitude_mv": amplitude_mv,
                "phase_rad": phase_rad},
        component={"*": wave},
    )
    return rec.with_data(rec.data + wave), [event]


def add_emg(rec, band_hz, rms_mv, seed):
    """Add independent band-limited Gaussian noise of the given RMS per lead."""
    _require_mv(rec)
    seed = check_seed(seed)
    lo, hi = band_hz
    if not (0.0 < lo < hi):
        raise ConfigError(f"EMG band must satisfy 0 < lo < hi, got {band_hz}")
    if hi >= rec.sample_rate_hz / 2.0:
        raise ConfigError("EMG band upper edge must be below Nyquist")
    if rms_mv < 0:
        raise ConfigError("EMG rms must be >= 0")
    if rms_mv == 0.0:
        return rec, []
    children = np.random.SeedSequence(seed).spawn(rec.n_leads)
    component = {}
    rows = []
    for i, label in enumerate(rec.lead_labels):
        rng = np.random.default_rng(children[i])
        noise = _band_limited_noise(
            rng, rec.n_samples, rec.sample_rate_hz, (lo, hi), rms_mv
        )
        component[label] = noise
        rows.append(rec.data[i] + noise)
    event = Event(
        kind="emg", source="injected",
        onset_sample=0, duration_samples=rec.n_samples,
        params={"band_hz": [lo, hi], "rms_mv": rms_mv},
        component=component,
    )
    return rec.with_data(np.vstack(rows)), [event]


def add_baseline_wander(rec, components, seed):
    """Add a slow per-lead sum of sines; component freqs must be <= 0.5 Hz."""
    _require_mv(rec)
    seed = check_seed(seed)
    components = [(float(f), float(a)) for f, a in components]
    for freq, amp in components:
        if freq > 0.5:
            raise ConfigError(
                f"baseline wander component at {freq} Hz exceeds 0.5 Hz"
            )
        if freq <= 0 or amp < 0:
            raise ConfigError("wander components need freq > 0 and amp >= 0")
    if not components:
        return rec, []
    children = np.random.SeedSequence(seed).spawn(rec.n_leads)
    t = rec.times()
    truth = {}
    rows = []
    for i, label in enumerate(rec.lead_labels):
        rng = np.random.default_rng(children[i])
        wander = np.zeros(rec.n_samples)
        for freq, amp in components:
            phase = rng.uniform(0.0, 2.0 * np.pi)
            wander += amp * np.sin(2.0 * np.pi * freq * t + phase)
        truth[label] = wander
        rows.append(rec.data[i] + wander)
    event = Event(
        kind="baseline", source="injected",
        onset_sample=0, duration_samples=rec.n_samples,
        params={"components": [[f, a] for f, a in components]},
        component=truth,
    )
    return rec.with_data(np.vstack(rows)), [event]


@dataclass(frozen=True)
class MotionEvent:
    """One burst of mechanical disturbance.

    The microslip step persists after onset (a re-formed polarization
    balance), the common-mode transient and the cable burst last for
    ``duration_s``, and the accelerometer registers activity over the same
    window regardless of electrical magnitudes.
    """

    onset_s: float
    duration_s: float
    microslip_step_mv: float = 0.0
    common_mode_mv: float = 0.0
    microphonic_rms_mv: float = 0.0
    microphonic_band_hz: tuple = (1.0, 10.0)
    affected_leads: tuple = ()  # empty means all leads

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ConfigError("motion event duration must be positive")
        check_finite(
            [self.microslip_step_mv, self.common_mode_mv,
             self.microphonic_rms_mv],
            "motion event magnitudes",
        )
        object.__setattr__(self, "affected_leads", tuple(self.affected_leads))
        object.__setattr__(
            self, "microphonic_band_hz", tuple(self.microphonic_band_hz)
        )

    def to_dict(self):
        return {
            "onset_s": self.onset_s,
            "duration_s": self.duration_s,
            "microslip_step_mv": self.microslip_step_mv,
            "common_mode_mv": self.common_mode_mv,
            "microphonic_rms_mv": self.microphonic_rms_mv,
            "microphonic_band_hz": list(self.microphonic_band_hz),
            "affected_leads": list(self.affected_leads),
        }


def _spike_train(rng, n_window, fs, peak_mv):
    """Sharp alternating-sign transient: the electrical signature of a jolt.

    Triangular spikes with ~4 ms edges repeating at roughly 4 Hz under a
    half-sine envelope, scaled to the requested peak.
    """
    wave = np.zeros(n_window)
    half_width = max(1, int(round(0.004 * fs)))
    n_spikes = max(1, int(round(4.0 * n_window / fs)))
    centers = (np.arange(n_spikes) + 0.5) / n_spikes * n_window
    centers += rng.uniform(-0.1, 0.1, n_spikes) * n_window / n_spikes
    tri = 1.0 - np.abs(np.arange(-half_width, half_width + 1)) / half_width
    for k, c in enumerate(np.clip(centers.astype(int), 0, n_window - 1)):
        lo = max(0, c - half_width)
        hi = min(n_window, c + half_width + 1)
        wave[lo:hi] += ((-1.0) ** k) * tri[lo - (c - half_width):
                                           hi - (c - half_width)]
    envelope = np.sin(np.pi * (np.arange(n_window) + 0.5) / n_window)
    wave *= envelope
    peak = np.max(np.abs(wave))
    if peak > 0:
        wave *= peak_mv / peak
    return wave


def add_motion_event(rec, ev: MotionEvent, seed):
    """Apply one motion event; returns (record, accel increment, events).

    The accelerometer increment is a half-sine per axis with additive jitter
    confined to the event window, independent of the electrical magnitudes.
    """
    _require_mv(rec)
    seed = check_seed(seed)
    fs = rec.sample_rate_hz
    onset = int(round((ev.onset_s - rec.t0_s) * fs))
    n_window = int(round(ev.duration_s * fs))
    if onset < 0 or onset + n_window > rec.n_samples:
        raise ConfigError(
            f"motion event [{ev.onset_s}, {ev.onset_s + ev.duration_s}] s "
            "falls outside the record"
        )
    hi_band = min(ev.microphonic_band_hz[1], fs / 2.0 - 1.0)
    affected = ev.affected_leads or rec.lead_labels
    for label in affected:
        if not rec.has_lead(label):
            raise ConfigError(f"motion event names unknown lead {label!r}")

    rng = np.random.default_rng(seed)
    window = slice(onset, onset + n_window)

    common = np.zeros(rec.n_samples)
    if ev.common_mode_mv != 0.0:
        common[window] = _spike_train(rng, n_window, fs, ev.common_mode_mv)

    envelope = np.sin(np.pi * (np.arange(n_window) + 0.5) / n_window)
    component = {}
    rows = rec.data.copy()
    for i, label in enumerate(rec.lead_labels):
        added = common.copy()
        if label in affected:
            if ev.microslip_step_mv != 0.0:
                added[onset:] += ev.microslip_step_mv
            if ev.microphonic_rms_mv != 0.0:
                burst = _band_limited_noise(
                    rng, n_window, fs,
                    (ev.microphonic_band_hz[0], hi_band),
                    ev.microphonic_rms_mv,
                )
                added[window] += burst * envelope
        component[label] = added
        rows[i] = rows[i] + added

    accel = np.zeros((rec.n_samples, 3))
    axis_amp = rng.uniform(0.3, 1.0, 3) * rng.choice([-1.0, 1.0], 3)
    jitter = rng.normal(0.0, 0.02, (n_window, 3))
    accel[window] = axis_amp * envelope[:, None] + jitter

    event = Event(
        kind="motion", source="injected",
        onset_sample=onset, duration_samples=n_window,
        leads=tuple(ev.affected_leads),
        params={
            "microslip_step_mv": ev.microslip_step_mv,
            "common_mode_mv": ev.common_mode_mv,
            "microphonic_rms_mv": ev.microphonic_rms_mv,
        },
        component=component,
    )
    return rec.with_data(rows), accel, [event]


def snr_db(clean, corrupted):
    """10*log10(P_signal / P_noise) with noise = corrupted - clean.

    Accepts records or arrays of equal shape; returns +inf when the noise
    power is exactly zero.
    """
    a = clean.data if isinstance(clean, MultiLeadRecord) else np.asarray(clean)
    b = (
        corrupted.data
        if isinstance(corrupted, MultiLeadRecord)
        else np.asarray(corrupted)
    )
    if a.shape != b.shape:
        raise ConfigError(
            f"snr_db needs equal shapes, got {a.shape} vs {b.shape}"
        )
    noise_power = np.mean((b - a) ** 2)
    if noise_power == 0.0:
        return math.inf
    return 10.0 * np.log10(np.mean(a**2) / noise_power)


@dataclass(frozen=True)
class NoiseSpec:
    """Full interference recipe for one record."""

    powerline: dict = None  # {"freq_hz", "amplitude_mv", "phase_rad"}
    emg: dict = None  # {"band_hz", "rms_mv"}
    baseline: tuple = ()  # ((freq_hz, amplitude_mv), ...)
    motion_events: tuple = ()

    def __post_init__(self):
        object.__setattr__(
            self, "baseline", tuple((f, a) for f, a in self.baseline)
        )
        events = tuple(
            ev if isinstance(ev, MotionEvent) else MotionEvent(**ev)
            for ev in self.motion_events
        )
        object.__setattr__(self, "motion_events", events)

    def to_dict(self):
        return {
            "powerline": self.powerline,
            "emg": self.emg,
            "baseline": [[f, a] for f, a in self.baseline],
            "motion_events": [ev.to_dict() for ev in self.motion_events],
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            powerline=doc.get("powerline"),
            emg=doc.get("emg"),
            baseline=tuple((f, a) for f, a in doc.get("baseline", ())),
            motion_events=tuple(
                MotionEvent(**ev) for ev in doc.get("motion_events", ())
            ),
        )


def apply_noise(rec, spec: NoiseSpec, seed):
    """Run every configured injector with independent child seeds.

    Returns (corrupted record, accelerometer stream, event log). The
    accelerometer is exactly zero outside motion-event windows apart from
    nothing at all: quiet means quiet.
    """
    seed = check_seed(seed)
    children = np.random.SeedSequence(seed).spawn(
        3 + len(spec.motion_events)
    )
    log = EventLog()
    accel_total = np.zeros((rec.n_samples, 3))

    if spec.powerline and spec.powerline.get("amplitude_mv", 0.0) > 0:
        rec, events = add_powerline(
            rec,
            spec.powerline.get("freq_hz", 50.0),
            spec.powerline["amplitude_mv"],
            seed=children[0].generate_state(1)[0],
            phase_rad=spec.powerline.get("phase_rad", 0.0),
        )
        log.extend(events)
    if spec.emg and spec.emg.get("rms_mv", 0.0) > 0:
        rec, events = add_emg(
            rec,
            tuple(spec.emg.get("band_hz", (20.0, 300.0))),
            spec.emg["rms_mv"],
            seed=children[1].generate_state(1)[0],
        )
        log.extend(events)
    if spec.baseline:
        rec, events = add_baseline_wander(
            rec, spec.baseline, seed=children[2].generate_state(1)[0]
        )
        log.extend(events)
    for k, ev in enumerate(spec.motion_events):
        rec, accel_inc, events = add_motion_event(
            rec, ev, seed=children[3 + k].generate_state(1)[0]
        )
        accel_total += accel_inc
        log.extend(events)

    accel = AccelStream(rec.sample_rate_hz, accel_total, t0_s=rec.t0_s)
    return rec, accel, log


def sum_injected_components(events, lead_labels, n_samples):
    """Total waveform added per lead by a set of injected events."""
    total = {label: np.zeros(n_samples) for label in lead_labels}
    for ev in events:
        if ev.component is None:
            continue
        for key, arr in ev.component.items():
            if key == "*":
                for label in lead_labels:
                    total[label] = total[label] + arr
            else:
                total[key] = total[key] + arr
    return total
