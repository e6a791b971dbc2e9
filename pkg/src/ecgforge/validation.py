"""Input validation helpers used by the public API surfaces."""

import numpy as np

from .errors import ConfigError

UNITS_MV = "mV"
UNITS_COUNTS = "counts"
VALID_UNITS = (UNITS_MV, UNITS_COUNTS)


def check_finite(value, name):
    """Raise ValueError if ``value`` (scalar or array) contains NaN/Inf."""
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got non-finite values")
    return arr


def check_positive(value, name):
    if not np.isfinite(value) or value <= 0:
        raise ConfigError(f"{name} must be positive and finite, got {value!r}")
    return float(value)


def check_in_range(value, lo, hi, name, inclusive=False):
    ok = (lo <= value <= hi) if inclusive else (lo < value < hi)
    if not ok:
        bounds = "[{}, {}]" if inclusive else "({}, {})"
        raise ConfigError(
            f"{name} must lie in {bounds.format(lo, hi)}, got {value!r}"
        )
    return float(value)


def check_units(units):
    if units not in VALID_UNITS:
        raise ConfigError(f"units must be one of {VALID_UNITS}, got {units!r}")
    return units


def check_seed(seed):
    """Seeds are mandatory everywhere randomness is used; None is rejected."""
    if seed is None:
        raise ConfigError("a seed is required; entropy defaults are not allowed")
    return int(seed)


def as_readonly(arr, dtype=float):
    """Return a C-contiguous read-only float array backed by a private copy."""
    out = np.array(arr, dtype=dtype, order="C", copy=True)
    out.setflags(write=False)
    return out
