"""Normalized LMS cancellation of accelerometer-correlated interference.

Each lead runs its own filter; the three accelerometer axes are stacked into
one tapped-delay-line regressor. Weights start at zero, so a silent
reference passes the record through bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..record import AccelStream


@dataclass(frozen=True)
class AdaptiveSpec:
    """NLMS configuration; the step size is held inside the stable range.

    The small default step keeps weight noise low enough that a reference
    uncorrelated with the record leaks under 1% of its power.
    """

    order: int = 8
    step_size: float = 0.01
    regularization: float = 1e-6

    def __post_init__(self):
        if self.order < 1:
            raise ConfigError("filter order must be >= 1")
        if not (0.0 < self.step_size < 2.0):
            raise ConfigError(
                f"step_size must lie in (0, 2) for stability, got "
                f"{self.step_size}"
            )
        if self.regularization <= 0:
            raise ConfigError("regularization must be positive")


def _embed_reference(reference, order):
    """Delay-embed (n, n_axes) into (n, n_axes * order) regressor rows."""
    n, n_axes = reference.shape
    padded = np.vstack([np.zeros((order - 1, n_axes)), reference])
    cols = [
        padded[order - 1 - k: order - 1 - k + n] for k in range(order)
    ]
    return np.concatenate(cols, axis=1)


def _nlms_one(desired, regressors, denom, mu):
    n, width = regressors.shape
    w = np.zeros(width)
    out = np.empty(n)
    for i in range(n):
        u = regressors[i]
        y = u @ w
        e = desired[i] - y
        out[i] = e
        w += (mu * e / denom[i]) * u
    return out


def adaptive_cancel(rec, accel, spec=None):
    """Subtract the accelerometer-predictable component from every lead.

    The reference must already share the record's rate and length. Returns a
    record; a zero reference returns the input samples unchanged (the update
    never moves the zero-initialized weights).
    """
    if spec is None:
        spec = AdaptiveSpec()
    if not isinstance(accel, AccelStream):
        raise ConfigError("adaptive_cancel needs an AccelStream reference")
    if accel.sample_rate_hz != rec.sample_rate_hz:
        raise ConfigError(
            "accelerometer must be resampled to the record rate "
            f"({accel.sample_rate_hz} vs {rec.sample_rate_hz} Hz)"
        )
    if accel.n_samples != rec.n_samples:
        raise ConfigError(
            "accelerometer and record lengths differ "
            f"({accel.n_samples} vs {rec.n_samples})"
        )
    if not np.any(accel.samples):
        return rec.with_data(rec.data)

    regressors = _embed_reference(accel.samples, spec.order)
    denom = spec.regularization + np.sum(regressors**2, axis=1)
    return rec.map_leads(
        lambda _, x: _nlms_one(x, regressors, denom, spec.step_size)
    )
