"""Exception hierarchy shared by every module of the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(ToolkitError, ValueError):
    pass


class NumericDomainError(ToolkitError, ArithmeticError):
    """Raised when an integrand or sample is non-finite at a quadrature node."""


class SingularityError(ToolkitError, ArithmeticError):
    """Raised when a kernel is evaluated on top of a point mass or line support."""


class DiagnosticError(ToolkitError):
    """A computation ran but its self-check failed (unresolved, non-decaying, ...)."""


class ResolutionError(DiagnosticError):
    pass


class WindowTooSmallError(ToolkitError):
    pass


class UnsupportedDomainError(ToolkitError):
    pass


class UnsupportedExponentError(ToolkitError):
    pass


class NoKernelError(ToolkitError):
    pass


class DecompositionFailure(ToolkitError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ParseError(InvalidInputError):
    def __init__(self, message, line, column=1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message
