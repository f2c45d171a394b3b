"""Exception taxonomy shared across the package.

Maps onto the CLI exit codes: ConfigError -> 2, NumericError -> 3, OSError -> 4.
"""


class ShapeError(ValueError):
    """Array dimensions incompatible with the declared layer or batch shapes."""


class NumericError(FloatingPointError):
    """Non-finite values or a failed numeric routine (e.g. Cholesky breakdown)."""


class StateError(RuntimeError):
    """Operation invalid in the current object state (empty buffer, finished episode)."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""
