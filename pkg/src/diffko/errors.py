"""Exception types shared across modules."""


class UnsupportedOperation(Exception):
    """Raised when the data needed to evaluate an operation is missing.

    Distinct from a zero result: callers use it to report "cannot evaluate".
    """


class InvariantViolation(ValueError):
    """A presentation or computation broke a structural invariant."""


class PresentationError(ValueError):
    """A presentation document failed schema validation."""
