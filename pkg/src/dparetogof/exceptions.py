"""Exception hierarchy shared by the library and the command line front end."""


class DParetoError(Exception):
    """Base class for all errors raised by :mod:`dparetogof`."""


class DomainError(DParetoError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class InsufficientDataError(DomainError):
    """The data do not carry enough information for the computation."""


class ConvergenceError(DParetoError, ArithmeticError):
    """A series, quadrature or root search could not reach its tolerance."""


class ReplicateError(ConvergenceError):
    """A bootstrap or Monte Carlo replicate failed.

    The failing replicate index is kept in ``index`` so that a failed run
    can be reproduced in isolation.
    """

    def __init__(self, index, cause):
        super().__init__(f"replicate {index} failed: {cause}")
        self.index = index
        self.cause = cause


class ParseError(DParetoError, ValueError):
    """Input text could not be parsed; ``lineno`` is 1-based or ``None``."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
