"""Shared exception types mapped to CLI exit codes."""


class DataFormatError(ValueError):
    """Malformed external data: bad magic, truncated payload, version skew."""


class NumericError(RuntimeError):
    """Non-finite values surfaced by a validation pass."""
