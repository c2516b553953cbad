"""Exception types shared across the package.

The CLI maps these onto exit codes: invalid inputs -> 2, backend failures -> 3,
config validation -> 4.
"""


class CtrackError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(CtrackError, ValueError):
    """Malformed or inconsistent inputs (shape mismatches, out-of-range values)."""


class NumericError(CtrackError):
    """Non-finite values where finite ones are required."""


class ConfigError(CtrackError):
    """Invalid pipeline configuration."""


class BackendError(CtrackError):
    """Denoiser backend failure.

    `retriable` distinguishes transient transport faults (already retried up to
    the configured limit) from fatal ones like protocol-version mismatches.
    """

    def __init__(self, message, retriable=False, endpoint=None, step=None):
        super().__init__(message)
        self.retriable = retriable
        self.endpoint = endpoint
        self.step = step
