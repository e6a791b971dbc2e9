"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2,
data-integrity problems exit 3, numeric failures exit 4.
"""


class EcgForgeError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(EcgForgeError):
    """A spec, preset, or configuration value is invalid or unresolvable."""


class FilterDesignError(ConfigError):
    """An FIR design spec is infeasible; the message names the violated constraint."""


class DataIntegrityError(EcgForgeError):
    """A record container failed checksum, length, or consistency checks."""


class UnsupportedVersionError(DataIntegrityError):
    """A record container declares a format version this build cannot read."""


class NumericError(EcgForgeError):
    """A numeric procedure failed to converge or produced unusable output."""


class SiftingError(NumericError):
    """Sifting did not converge within the iteration budget.

    Carries the partial decomposition so callers can inspect how far it got.
    """

    def __init__(self, message, imfs=None, residue=None):
        super().__init__(message)
        self.imfs = imfs
        self.residue = residue
