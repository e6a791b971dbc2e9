"""Ground-truth dipole trajectories and clean 12-lead records.

The instantaneous cardiac dipole is modeled as a sum of Gaussian bumps in
cardiac phase, one set per wave (P, QRS, T), each bump carrying a 3-D
amplitude vector. Sweeping the phase traces closed P/QRS/T loops; projecting
every sample onto the lead axes yields the familiar waveforms, with lead II
closest to the dominant vector direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .leads import LeadSystem, LimbPotentials, augmented_from_potentials, \
    limb_leads_from_potentials, project_dipole
from .record import MultiLeadRecord, STANDARD_LEADS
from .validation import check_finite, check_seed

SEGMENTS = ("baseline", "P", "PQ", "QRS", "ST", "T")

# Named default parameter set ("fig2-default"): tuned once so that lead II
# shows the textbook PQRST morphology with a dominant 1.5 mV R wave along the
# +60 degree axis, a small septal Q, an rS pattern in V1 and qR in V6.
FIG2_DEFAULT = {
    "heart_rate_bpm": 60.0,
    "rr_jitter_fraction": 0.02,
    "p": [
        {"center_rad": 1.10, "width_rad": 0.16,
         "amplitude_mv": [0.06, 0.10, 0.02]},
    ],
    "qrs": [
        {"center_rad": 1.92, "width_rad": 0.050,
         "amplitude_mv": [-0.08, -0.10, 0.18]},
        {"center_rad": 2.01, "width_rad": 0.065,
         "amplitude_mv": [0.75, 1.30, -0.38]},
        {"center_rad": 2.12, "width_rad": 0.055,
         "amplitude_mv": [-0.12, -0.25, -0.20]},
    ],
    "t": [
        {"center_rad": 3.95, "width_rad": 0.22,
         "amplitude_mv": [0.18, 0.30, 0.05]},
    ],
}

_SPAN_SIGMAS = 3.0  # a wave's segment extends this many widths from center


@dataclass(frozen=True)
class WaveComponent:
    """One Gaussian bump: center phase (rad), angular width, 3-D amplitude."""

    center_rad: float
    width_rad: float
    amplitude_mv: tuple

    def __post_init__(self):
        if self.width_rad <= 0:
            raise ConfigError("wave component width must be positive")
        amp = check_finite(self.amplitude_mv, "amplitude_mv")
        if amp.shape != (3,):
            raise ConfigError("amplitude_mv must be a 3-vector")
        object.__setattr__(self, "amplitude_mv", tuple(float(a) for a in amp))

    def to_dict(self):
        return {
            "center_rad": self.center_rad,
            "width_rad": self.width_rad,
            "amplitude_mv": list(self.amplitude_mv),
        }


@dataclass(frozen=True)
class BeatParams:
    """Per-beat loop descriptors plus rate and beat-to-beat variation."""

    heart_rate_bpm: float = 60.0
    p: tuple = ()
    qrs: tuple = ()
    t: tuple = ()
    rr_jitter_fraction: float = 0.0

    def __post_init__(self):
        if not (20.0 < self.heart_rate_bpm < 250.0):
            raise ConfigError(
                f"heart_rate_bpm must lie in (20, 250), got {self.heart_rate_bpm}"
            )
        # the wave train occupies a fixed fraction of the nominal cycle, so
        # 3-sigma shortening must still leave room for the full PQRST
        if not (0.0 <= self.rr_jitter_fraction <= 0.08):
            raise ConfigError("rr_jitter_fraction must lie in [0, 0.08]")
        for name in ("p", "qrs", "t"):
            comps = tuple(
                c if isinstance(c, WaveComponent) else WaveComponent(**c)
                for c in getattr(self, name)
            )
            if not comps:
                raise ConfigError(f"wave {name!r} needs at least one component")
            object.__setattr__(self, name, comps)
        if not (
            max(c.center_rad for c in self.p)
            < min(c.center_rad for c in self.qrs)
            and max(c.center_rad for c in self.qrs)
            < min(c.center_rad for c in self.t)
        ):
            raise ConfigError("wave centers must be ordered P < QRS < T")

    @classmethod
    def from_dict(cls, doc):
        return cls(
            heart_rate_bpm=doc.get("heart_rate_bpm", 60.0),
            p=tuple(WaveComponent(**c) for c in doc["p"]),
            qrs=tuple(WaveComponent(**c) for c in doc["qrs"]),
            t=tuple(WaveComponent(**c) for c in doc["t"]),
            rr_jitter_fraction=doc.get("rr_jitter_fraction", 0.0),
        )

    @classmethod
    def default(cls, **overrides):
        doc = dict(FIG2_DEFAULT)
        doc.update(overrides)
        return cls.from_dict(doc)

    def to_dict(self):
        return {
            "heart_rate_bpm": self.heart_rate_bpm,
            "rr_jitter_fraction": self.rr_jitter_fraction,
            "p": [c.to_dict() for c in self.p],
            "qrs": [c.to_dict() for c in self.qrs],
            "t": [c.to_dict() for c in self.t],
        }

    def wave_spans(self):
        """Phase interval [lo, hi] per wave; clipped to midpoints on overlap."""
        spans = {}
        for name in ("p", "qrs", "t"):
            comps = getattr(self, name)
            lo = min(c.center_rad - _SPAN_SIGMAS * c.width_rad for c in comps)
            hi = max(c.center_rad + _SPAN_SIGMAS * c.width_rad for c in comps)
            spans[name.upper() if name != "p" else "P"] = [lo, hi]
        for a, b in (("P", "QRS"), ("QRS", "T")):
            if spans[a][1] > spans[b][0]:
                mid = 0.5 * (spans[a][1] + spans[b][0])
                spans[a][1] = spans[b][0] = mid
        return {k: tuple(v) for k, v in spans.items()}


@dataclass(frozen=True)
class DipoleTrajectory:
    """Sampled 3-D cardiac dipole with segment labels and beat onsets."""

    sample_rate_hz: float
    samples: np.ndarray  # (n, 3) in mV
    segment_labels: np.ndarray  # (n,) strings from SEGMENTS
    beat_onsets: np.ndarray  # sample indices, strictly increasing

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        labels = np.asarray(self.segment_labels)
        onsets = np.asarray(self.beat_onsets, dtype=int)
        if samples.ndim != 2 or samples.shape[1] != 3:
            raise ConfigError("trajectory samples must have shape (n, 3)")
        if labels.shape[0] != samples.shape[0]:
            raise ConfigError("segment labels must cover every sample")
        unknown = set(np.unique(labels)) - set(SEGMENTS)
        if unknown:
            raise ConfigError(f"unknown segment labels {sorted(unknown)}")
        if onsets.size and not np.all(np.diff(onsets) > 0):
            raise ConfigError("beat onsets must be strictly increasing")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "segment_labels", labels)
        object.__setattr__(self, "beat_onsets", onsets)

    @property
    def n_samples(self):
        return self.samples.shape[0]

    def magnitude(self):
        return np.linalg.norm(self.samples, axis=1)

    def r_peak_indices(self):
        """True R peaks: the dipole-magnitude maximum inside each QRS segment."""
        mag = self.magnitude()
        in_qrs = self.segment_labels == "QRS"
        edges = np.flatnonzero(np.diff(in_qrs.astype(int)))
        starts = edges[in_qrs[edges + 1]] + 1
        ends = edges[~in_qrs[edges + 1]] + 1
        if in_qrs[0]:
            starts = np.concatenate([[0], starts])
        if in_qrs[-1]:
            ends = np.concatenate([ends, [self.n_samples]])
        return np.array(
            [s + int(np.argmax(mag[s:e])) for s, e in zip(starts, ends)],
            dtype=int,
        )


def _gaussian_sum(phase, components):
    out = np.zeros((phase.shape[0], 3))
    for c in components:
        bump = np.exp(-0.5 * ((phase - c.center_rad) / c.width_rad) ** 2)
        out += bump[:, None] * np.asarray(c.amplitude_mv)
    return out


def generate_dipole_trajectory(params, duration_s, sample_rate_hz, seed):
    """Generate a seeded dipole trajectory of ``duration_s`` seconds.

    RR intervals vary multiplicatively with Gaussian jitter clamped to three
    standard deviations, so beat ordering always stays valid. Wave timing
    within a beat is anchored to the nominal cycle length (beat morphology
    does not stretch with jitter), so R-to-R spacing inherits the injected
    jitter directly. Deterministic for a fixed (params, seed).
    """
    if sample_rate_hz < 100:
        raise ConfigError("sample_rate_hz must be at least 100")
    base_rr = 60.0 / params.heart_rate_bpm
    if duration_s < base_rr:
        raise ConfigError("duration must cover at least one beat")
    rng = np.random.default_rng(check_seed(seed))

    n = int(round(duration_s * sample_rate_hz))
    sigma = params.rr_jitter_fraction
    onset_times = [0.0]
    rr_values = []
    while onset_times[-1] < duration_s:
        jitter = float(np.clip(sigma * rng.standard_normal(), -3 * sigma, 3 * sigma))
        rr = base_rr * (1.0 + jitter)
        rr_values.append(rr)
        onset_times.append(onset_times[-1] + rr)
    onset_times = np.asarray(onset_times)
    rr_values = np.asarray(rr_values)

    times = np.arange(n) / sample_rate_hz
    beat_idx = np.searchsorted(onset_times, times, side="right") - 1
    phase = 2.0 * np.pi * np.minimum(
        (times - onset_times[beat_idx]) / base_rr, 1.0
    )

    samples = (
        _gaussian_sum(phase, params.p)
        + _gaussian_sum(phase, params.qrs)
        + _gaussian_sum(phase, params.t)
    )

    spans = params.wave_spans()
    labels = np.full(n, "baseline", dtype="U8")
    (p_lo, p_hi), (q_lo, q_hi), (t_lo, t_hi) = (
        spans["P"], spans["QRS"], spans["T"],
    )
    labels[(phase >= p_lo) & (phase < p_hi)] = "P"
    labels[(phase >= p_hi) & (phase < q_lo)] = "PQ"
    labels[(phase >= q_lo) & (phase < q_hi)] = "QRS"
    labels[(phase >= q_hi) & (phase < t_lo)] = "ST"
    labels[(phase >= t_lo) & (phase < t_hi)] = "T"

    onsets = np.round(onset_times[:-1] * sample_rate_hz).astype(int)
    onsets = onsets[onsets < n]
    return DipoleTrajectory(
        sample_rate_hz=sample_rate_hz,
        samples=samples,
        segment_labels=labels,
        beat_onsets=onsets,
    )


def synthesize_record(traj, sys=None):
    """Project a dipole trajectory onto all 12 leads.

    Limb potentials are computed at the triangle's electrode directions, then
    the six frontal leads come from their bipolar/augmented definitions, so
    II = I + III and aVR + aVL + aVF = 0 hold to machine precision. Chest
    leads project the horizontal-plane dipole component onto unit axes.

    Returns (record in mV, ground-truth R-peak sample indices).
    """
    if sys is None:
        sys = LeadSystem()
    d = check_finite(traj.samples, "trajectory samples")
    frontal = d[:, :2]
    vecs = sys.electrode_vectors()
    potentials = LimbPotentials(
        ra=frontal @ vecs["ra"],
        la=frontal @ vecs["la"],
        ll=frontal @ vecs["ll"],
    )
    lead_i, lead_ii, lead_iii = limb_leads_from_potentials(potentials)
    avr, avl, avf = augmented_from_potentials(potentials)
    rows = [lead_i, lead_ii, lead_iii, avr, avl, avf]
    rows += [project_dipole(d, sys, v) for v in
             ("V1", "V2", "V3", "V4", "V5", "V6")]
    rec = MultiLeadRecord(
        sample_rate_hz=traj.sample_rate_hz,
        lead_labels=STANDARD_LEADS,
        data=np.vstack(rows),
        units="mV",
    )
    return rec, traj.r_peak_indices()


@dataclass(frozen=True)
class PqrstTemplate:
    """Single-beat lead-II waveform with fiducials, R normalized to 1 mV."""

    sample_rate_hz: float
    samples: np.ndarray
    fiducials: dict = field(default_factory=dict)  # name -> sample index


def ideal_pqrst_template(sample_rate_hz, params=None):
    """One textbook beat on lead II, R amplitude normalized to 1 mV.

    Serves as the golden regression reference and as the waveform used by
    template reconstruction.
    """
    if sample_rate_hz < 100:
        raise ConfigError("sample_rate_hz must be at least 100")
    if params is None:
        params = BeatParams.default(rr_jitter_fraction=0.0)
    else:
        params = BeatParams.from_dict(
            {**params.to_dict(), "rr_jitter_fraction": 0.0}
        )
    duration = 60.0 / params.heart_rate_bpm
    traj = generate_dipole_trajectory(params, duration, sample_rate_hz, seed=0)
    rec, _ = synthesize_record(traj)
    wave = rec.lead("II").copy()

    labels = traj.segment_labels
    qrs = np.flatnonzero(labels == "QRS")
    r_idx = qrs[np.argmax(wave[qrs])]
    p_seg = np.flatnonzero(labels == "P")
    t_seg = np.flatnonzero(labels == "T")
    before_r = qrs[qrs < r_idx]
    after_r = qrs[qrs > r_idx]
    fiducials = {
        "P": int(p_seg[np.argmax(wave[p_seg])]),
        "Q": int(before_r[np.argmin(wave[before_r])]),
        "R": int(r_idx),
        "S": int(after_r[np.argmin(wave[after_r])]),
        "T": int(t_seg[np.argmax(wave[t_seg])]),
    }
    wave /= wave[r_idx]
    return PqrstTemplate(
        sample_rate_hz=sample_rate_hz, samples=wave, fiducials=fiducials
    )
