"""Exception types shared across the package.

Every error carries a machine-readable ``category`` string so the CLI can
name the failure class on stderr and scripts can branch on it without
parsing prose.
"""


class EmstackError(Exception):
    """Base class for all package errors."""

    category = "error"


class DimensionMismatchError(EmstackError, ValueError):
    category = "dimension-mismatch"


class InvalidArgumentError(EmstackError, ValueError):
    category = "invalid-argument"


class EmptyInputError(EmstackError, ValueError):
    category = "empty-input"


class StackIOError(EmstackError, OSError):
    category = "io"


class DegenerateTriangleError(EmstackError, ValueError):
    category = "degenerate-triangle"


class SamplingFailureError(EmstackError, RuntimeError):
    category = "sampling-failure"
