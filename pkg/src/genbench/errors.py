"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: configuration errors exit 2, data
errors exit 3, everything else exits 4.
"""


class GenbenchError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(GenbenchError):
    """Invalid option value, unknown registry name, or bad option combination."""


class DataError(GenbenchError):
    """Problem reading or interpreting dataset files."""


class AlignmentError(DataError):
    """Paired files whose line counts do not match."""


class CheckpointError(DataError):
    """Corrupt or incompatible model checkpoint file."""


class MetricError(GenbenchError):
    """Metric invoked on inputs it is undefined for (e.g. empty corpus)."""


class DecodeError(GenbenchError):
    """Failure while generating sequences (bad callback, bridge protocol error)."""
