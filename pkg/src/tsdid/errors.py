"""Exception hierarchy shared across the package.

Exit-code contract used by the CLI: validation errors map to 1, numeric
errors to 2, and IO/network errors to 3.
"""


class TsdidError(Exception):
    """Base class for all package errors."""


class ValidationError(TsdidError):
    """Invalid input: bad parameters, malformed panels, or config violations."""


class NumericError(TsdidError):
    """Numerically unusable problem: singular or ill-conditioned systems."""


class InferenceError(NumericError):
    """Variance estimation failed (e.g. degenerate zero-variance series)."""


class DataSourceError(TsdidError):
    """IO or network failure while reading or fetching data."""
