"""Exception types shared across the package.

The CLI maps these onto process exit codes: usage/config problems exit
with 2, data problems with 3, numeric divergence with 4.
"""


class UsageError(ValueError):
    """Caller passed inconsistent arguments (shape mismatch, bad flag value)."""


class ConfigError(UsageError):
    """Configuration file or simulation config is invalid."""


class DataError(ValueError):
    """Input data violates a structural requirement (parse failure,
    irregular sampling, insufficient history, unmatched consumer ids)."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""
