"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: config problems exit 2, data/format
problems exit 3, numeric failures exit 4.
"""


class PadTexError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(PadTexError):
    """Invalid experiment configuration (unknown keys, bad values, missing paths)."""


class DataError(PadTexError):
    """Malformed or inconsistent input data."""


class AudioFormatError(DataError):
    """WAV file violates the supported container/encoding contract."""


class BankFormatError(DataError):
    """Filter-bank file violates the bank format contract."""


class CacheError(DataError):
    """Feature-cache file corrupt or inconsistent (bad magic, checksum mismatch)."""


class ProtocolError(DataError):
    """Trial manifest malformed (bad line, unknown label, duplicate trial id)."""


class NumericError(PadTexError):
    """A numeric routine failed (non-convergence, rank deficiency, degenerate input)."""
