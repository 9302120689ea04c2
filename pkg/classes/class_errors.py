class QCloseError(Exception):
    """Base class of every error raised by the library."""


class DomainError(QCloseError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigError(QCloseError):
    """A model configuration could not be parsed or validated."""

    def __init__(self, message, source="<config>", line=None):
        self.source = source
        self.line = line
        self.message = message
        location = f"{source}:{line}" if line is not None else str(source)
        super().__init__(f"{location}: {message}")


class IntegrationError(QCloseError, ArithmeticError):
    """The ODE right-hand side produced a non-finite value."""

    def __init__(self, message, t):
        self.t = t
        super().__init__(f"{message} at t={t:.6g}")


class ConsistencyError(QCloseError):
    """An internal invariant of a computed result is broken."""
