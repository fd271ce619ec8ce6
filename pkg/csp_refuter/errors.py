"""Error types shared across the refuter packages."""

from typing import Optional


class RefuterError(Exception):
    """Base class for every error raised by csp_refuter."""


class InvalidParameters(RefuterError, ValueError):
    """Arguments outside the documented domain of an operation."""


class UndefinedValue(RefuterError, ValueError):
    """A quantity that is not defined for the input (e.g. value of an empty instance)."""


class WrongMode(RefuterError, ValueError):
    """Operation called for the wrong parity or basis."""


class DegenerateInstance(RefuterError):
    """Input admits no well-defined object (e.g. zero normalizer)."""


class PreconditionViolation(RefuterError):
    """A structural precondition does not hold; the check is vacuous."""


class ResourceLimit(RefuterError):
    """Work would exceed a configured cap.

    Attributes:
        component: Name of the component that hit the cap.
        required: Amount of work (or resolution) that would be required.
        cap: The configured cap, when one applies.
    """

    def __init__(self, component: str, required, cap: Optional[int] = None):
        self.component = component
        self.required = required
        self.cap = cap
        detail = f"{component} requires {required}"
        if cap is not None:
            detail += f" (cap {cap})"
        super().__init__(detail)


class NonConverged(RefuterError):
    """Iterative method stopped at max_iter; best_value holds its last estimate."""

    def __init__(self, message: str, best_value: float):
        self.best_value = best_value
        super().__init__(message)
