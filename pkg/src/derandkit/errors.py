"""
Exception hierarchy for derandkit.

Everything raised on purpose by the library derives from DerandomError, so
callers (and the CLI) can map failures to exit codes by family.
"""

from typing import Any, Optional


class DerandomError(Exception):
    """Root of all derandkit errors."""


class BadParams(DerandomError, ValueError):
    """Parameters outside the domain of the requested construction."""


# --- function / family plumbing -------------------------------------------

class FunctionError(DerandomError, ValueError):
    """A function table is malformed."""


class LengthMismatch(FunctionError):
    pass


class ImageOutOfRange(FunctionError):
    pass


class CodomainMismatch(FunctionError):
    pass


# --- primes ----------------------------------------------------------------

class WindowFailure(DerandomError):
    """No usable prime window for the requested parameters."""


class LimitTooSmall(WindowFailure):
    pass


class InsufficientPrimes(WindowFailure):
    pass


# --- builders --------------------------------------------------------------

class BuildFailure(DerandomError):
    """A builder could not produce a family."""


class PoolExhausted(BuildFailure):
    """The candidate pool cannot cover the remaining targets."""


class PreconditionFailed(BuildFailure):
    pass


class NonuniformityExceeded(BuildFailure):
    pass


class UniformityRequired(BuildFailure):
    pass


class SizeMismatch(BuildFailure):
    pass


class GuessSpaceTooLarge(BuildFailure):
    pass


class RepairInfeasible(BuildFailure):
    """A ones-count repair block is smaller than the deviation to fix."""


class OracleRejected(BuildFailure):
    """An out-of-regime build failed its mandatory oracle pass."""

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report


# --- files -----------------------------------------------------------------

class FamilyFileError(DerandomError, ValueError):
    """Family file could not be parsed or failed its checksum."""
