"""Exception and warning types shared across the package."""


class NewsvmError(Exception):
    """Base class for all package errors."""


class ValidationError(NewsvmError, ValueError):
    """Input violates a documented invariant or precondition."""


class ParseError(NewsvmError, ValueError):
    """A file could not be parsed; message names the offending location."""


class StageError(NewsvmError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


class DegenerateScaleWarning(UserWarning):
    """A constant feature (or target) column was scaled to zeros."""


class ConvergenceWarning(UserWarning):
    """The solver hit its iteration budget before reaching tolerance."""
