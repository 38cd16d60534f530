"""Error hierarchy shared by every soficlab module."""

from typing import Any, Optional


class SoficLabError(Exception):
    """Base class for all library errors."""


class ModelMismatchError(SoficLabError):
    """Operands live over different group models or alphabets."""


class UnsupportedGroupError(SoficLabError):
    """The operation is not available for this kind of group."""


class UnsupportedWindowError(SoficLabError):
    """Pattern windows must be lattice-aligned boxes."""


class InvalidParameterError(SoficLabError):
    pass


class PeriodMismatchError(InvalidParameterError):
    pass


class SizeMismatchError(InvalidParameterError):
    pass


class DomainError(SoficLabError):
    """A configuration or parameter lies outside the operation's domain."""


class SupportError(SoficLabError):
    """A group element was queried outside an approximation's support."""

    def __init__(self, element: str, message: Optional[str] = None):
        self.element = element
        super().__init__(message or f"element {element} is outside the approximation support")


class PreconditionError(SoficLabError):
    pass


class ContainmentError(SoficLabError):
    """Y is not a proper subsystem of X."""


class CertificateViolation(SoficLabError):
    """A certificate or asserted bound failed re-verification."""


class BudgetExceededError(SoficLabError):
    """An enumeration budget was exhausted; `partial` holds what was computed."""

    def __init__(self, module: str, message: str, partial: Any = None):
        self.module = module
        self.partial = partial
        super().__init__(f"[{module}] {message}")


class ParseError(SoficLabError):
    def __init__(self, path: str, line_number: int, line: str, expected: str):
        self.path = path
        self.line_number = line_number
        self.line = line
        self.expected = expected
        super().__init__(f"{path}:{line_number}: cannot parse {line.strip()!r}; expected {expected}")
