"""Exception taxonomy shared across the pipeline.

ValidationError (and subclasses) mean bad input data or configuration and map
to CLI exit code 1; everything else is a runtime failure (exit code 2).
"""


class ValidationError(ValueError):
    """Input data or configuration violates a documented invariant."""


class FormatError(ValidationError):
    """A file or stream is malformed; message names the offending location."""


class DomainError(ValueError):
    """An operation was called outside its documented domain."""


class TrainingDivergedError(RuntimeError):
    """An iterative trainer produced NaN or runaway loss; carries diagnostics."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
