"""Core data carriers: multi-lead records, event logs, accelerometer streams.

``MultiLeadRecord`` is the currency every stage consumes and produces. It is
immutable: sample arrays are read-only and all mutating operations return a
new record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .validation import UNITS_MV, as_readonly, check_units

STANDARD_LEADS = (
    "I", "II", "III", "aVR", "aVL", "aVF",
    "V1", "V2", "V3", "V4", "V5", "V6",
)


@dataclass(frozen=True)
class MultiLeadRecord:
    """Uniformly sampled multi-channel signal.

    Parameters
    ----------
    sample_rate_hz : float
        Sampling rate, > 0.
    lead_labels : tuple of str
        Channel names, unique, one per row of ``data``.
    data : ndarray, shape (n_leads, n_samples)
        Sample values in the units given by ``units``.
    units : {"mV", "counts"}
    t0_s : float
        Time of the first sample.
    """

    sample_rate_hz: float
    lead_labels: tuple
    data: np.ndarray
    units: str = UNITS_MV
    t0_s: float = 0.0

    def __post_init__(self):
        if self.sample_rate_hz <= 0 or not np.isfinite(self.sample_rate_hz):
            raise ConfigError(
                f"sample_rate_hz must be positive, got {self.sample_rate_hz!r}"
            )
        check_units(self.units)
        labels = tuple(self.lead_labels)
        if len(set(labels)) != len(labels):
            raise ConfigError("lead labels must be unique")
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise ConfigError("data must be 2-D (n_leads, n_samples)")
        if data.shape[0] != len(labels):
            raise ConfigError(
                f"{len(labels)} labels but {data.shape[0]} data rows"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("record samples must be finite")
        object.__setattr__(self, "lead_labels", labels)
        object.__setattr__(self, "data", as_readonly(data))

    @classmethod
    def from_leads(cls, sample_rate_hz, leads, units=UNITS_MV, t0_s=0.0):
        """Build a record from a {label: samples} mapping (order preserved)."""
        labels = tuple(leads.keys())
        data = np.vstack([np.asarray(leads[k], dtype=float) for k in labels])
        return cls(sample_rate_hz, labels, data, units=units, t0_s=t0_s)

    @property
    def n_leads(self):
        return self.data.shape[0]

    @property
    def n_samples(self):
        return self.data.shape[1]

    @property
    def duration_s(self):
        return self.n_samples / self.sample_rate_hz

    @property
    def leads(self):
        """Mapping view: label -> read-only sample array."""
        return {label: self.data[i] for i, label in enumerate(self.lead_labels)}

    def lead(self, label):
        try:
            idx = self.lead_labels.index(label)
        except ValueError:
            raise KeyError(f"record has no lead {label!r}") from None
        return self.data[idx]

    def has_lead(self, label):
        return label in self.lead_labels

    def times(self):
        return self.t0_s + np.arange(self.n_samples) / self.sample_rate_hz

    def with_data(self, data, units=None):
        """Return a copy carrying ``data`` (and optionally different units)."""
        return replace(
            self, data=data, units=self.units if units is None else units
        )

    def map_leads(self, func):
        """Apply ``func(label, samples) -> samples`` independently per lead."""
        rows = [func(label, self.data[i]) for i, label in enumerate(self.lead_labels)]
        return self.with_data(np.vstack(rows))

    def __eq__(self, other):
        if not isinstance(other, MultiLeadRecord):
            return NotImplemented
        return (
            self.sample_rate_hz == other.sample_rate_hz
            and self.lead_labels == other.lead_labels
            and self.units == other.units
            and self.t0_s == other.t0_s
            and self.data.shape == other.data.shape
            and np.array_equal(self.data, other.data)
        )


@dataclass(frozen=True)
class Event:
    """One injected or detected artifact event.

    ``component`` optionally holds the exact waveform this event added to the
    record (per affected lead, or one shared row): it is kept in memory for
    ground-truth reconstruction and scoring but is not serialized.
    """

    kind: str
    source: str  # "injected" or "detected"
    onset_sample: int
    duration_samples: int
    leads: tuple = ()  # empty tuple means "all leads"
    params: dict = field(default_factory=dict)
    component: object = None  # ndarray or {label: ndarray}, never serialized

    @property
    def end_sample(self):
        return self.onset_sample + self.duration_samples

    def overlaps(self, start, end):
        """True if [onset, end) intersects the sample window [start, end)."""
        return self.onset_sample < end and start < self.end_sample

    def to_row(self):
        """Serializable tuple (component payload deliberately excluded)."""
        return (
            self.source,
            self.kind,
            ";".join(self.leads),
            int(self.onset_sample),
            int(self.duration_samples),
            json.dumps(self.params, sort_keys=True),
        )

    @classmethod
    def from_row(cls, row):
        source, kind, leads, onset, duration, params = row
        return cls(
            kind=kind,
            source=source,
            onset_sample=int(onset),
            duration_samples=int(duration),
            leads=tuple(l for l in leads.split(";") if l),
            params=json.loads(params),
        )


class EventLog:
    """Ordered collection of events, merged deterministically."""

    def __init__(self, events=()):
        self._events = list(events)

    def add(self, event):
        self._events.append(event)

    def extend(self, events):
        self._events.extend(events)

    def injected(self):
        return [e for e in self._events if e.source == "injected"]

    def detected(self):
        return [e for e in self._events if e.source == "detected"]

    def of_kind(self, kind):
        return [e for e in self._events if e.kind == kind]

    def sorted(self):
        """Events ordered by (onset sample, lead tuple, kind)."""
        return sorted(
            self._events, key=lambda e: (e.onset_sample, e.leads, e.kind)
        )

    def __iter__(self):
        return iter(self._events)

    def __len__(self):
        return len(self._events)

    def __eq__(self, other):
        if not isinstance(other, EventLog):
            return NotImplemented
        return [e.to_row() for e in self.sorted()] == [
            e.to_row() for e in other.sorted()
        ]


@dataclass(frozen=True)
class AccelStream:
    """Tri-axial accelerometer samples in g, aligned to a record timebase."""

    sample_rate_hz: float
    samples: np.ndarray  # (n_samples, 3)
    t0_s: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 3:
            raise ConfigError("accelerometer samples must have shape (n, 3)")
        if not np.all(np.isfinite(samples)):
            raise ValueError("accelerometer samples must be finite")
        object.__setattr__(self, "samples", as_readonly(samples))

    @classmethod
    def zeros(cls, sample_rate_hz, n_samples, t0_s=0.0):
        return cls(sample_rate_hz, np.zeros((n_samples, 3)), t0_s=t0_s)

    @property
    def n_samples(self):
        return self.samples.shape[0]

    def add(self, increment):
        """Return a stream with ``increment`` (n, 3) summed onto the samples."""
        return AccelStream(
            self.sample_rate_hz, self.samples + increment, t0_s=self.t0_s
        )

    def magnitude(self):
        return np.linalg.norm(self.samples, axis=1)

    def __eq__(self, other):
        if not isinstance(other, AccelStream):
            return NotImplemented
        return (
            self.sample_rate_hz == other.sample_rate_hz
            and self.t0_s == other.t0_s
            and self.samples.shape == other.samples.shape
            and np.array_equal(self.samples, other.samples)
        )
