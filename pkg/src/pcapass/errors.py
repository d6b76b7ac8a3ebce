"""Shared exception types, mapped to distinct exit codes by the CLI."""


class DataError(ValueError):
    """Malformed or inconsistent input data: files, labels, shapes."""


class ConfigError(ValueError):
    """Invalid configuration key, value, or flag."""
