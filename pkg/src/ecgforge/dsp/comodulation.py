"""Full-lead co-modulation detection of motion artifact windows.

Short-time derivative energy is computed per lead; a window is flagged when
the across-lead median energy is elevated and at least ``min_lead_fraction``
of the leads simultaneously exceed their own adaptive (high-percentile)
thresholds. Cardiac activity alone stays below the thresholds because they
sit above the energy of ordinary QRS windows; a disturbance on a single lead
never reaches the required lead fraction.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..record import Event

MIN_LEADS = 8


def _window_energy(data, win, hop):
    """Short-time energy of the first difference: (n_leads, n_windows)."""
    diff2 = np.diff(data, axis=1) ** 2
    csum = np.concatenate(
        [np.zeros((data.shape[0], 1)), np.cumsum(diff2, axis=1)], axis=1
    )
    starts = np.arange(0, diff2.shape[1] - win + 1, hop)
    return csum[:, starts + win] - csum[:, starts], starts


def detect_common_mode(
    rec,
    window_s=0.25,
    hop_s=0.125,
    threshold_factor=1.5,
    percentile=92.0,
    min_lead_fraction=0.8,
):
    """Flag sample windows where most leads jump together.

    Returns a list of merged ``(start_sample, end_sample)`` tuples. Requires
    at least 8 leads.
    """
    if rec.n_leads < MIN_LEADS:
        raise ConfigError(
            f"co-modulation detection needs >= {MIN_LEADS} leads, got "
            f"{rec.n_leads}"
        )
    fs = rec.sample_rate_hz
    win = max(2, int(round(window_s * fs)))
    hop = max(1, int(round(hop_s * fs)))
    if rec.n_samples < win + 1:
        return []

    energy, starts = _window_energy(rec.data, win, hop)
    lead_thresholds = threshold_factor * np.percentile(energy, percentile, axis=1)
    exceed = energy > lead_thresholds[:, None]
    fraction = exceed.mean(axis=0)

    median_series = np.median(energy, axis=0)
    median_threshold = threshold_factor * np.percentile(median_series, percentile)
    flagged = (fraction >= min_lead_fraction) & (
        median_series > median_threshold
    )

    windows = []
    for idx in np.flatnonzero(flagged):
        start, end = int(starts[idx]), int(starts[idx] + win)
        if windows and start <= windows[-1][1]:
            windows[-1][1] = max(windows[-1][1], end)
        else:
            windows.append([start, end])
    return [(s, e) for s, e in windows]


def windows_to_events(windows):
    """Wrap flagged windows as detected events for logging."""
    return [
        Event(
            kind="motion", source="detected",
            onset_sample=start, duration_samples=end - start,
        )
        for start, end in windows
    ]
