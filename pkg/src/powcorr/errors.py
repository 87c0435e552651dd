"""Exception taxonomy shared by all modules.

The CLI maps these onto distinct exit codes, so keep the hierarchy flat
and stable: DomainError for bad mathematical inputs, PrecisionError when
a certified error bound is too weak for the requested statistic,
ResourceError for configured work/memory caps, NumericalError when an
adaptive scheme fails to certify convergence.
"""


class PowcorrError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PowcorrError, ValueError):
    """Input outside the mathematical domain of an operation."""


class PrecisionError(DomainError):
    """Certified error bound insufficient for the requested resolution."""

    def __init__(self, message: str, required_guard_bits: int | None = None):
        super().__init__(message)
        self.required_guard_bits = required_guard_bits


class ResourceError(PowcorrError, RuntimeError):
    """A configured memory or work budget would be exceeded."""


class NumericalError(PowcorrError, ArithmeticError):
    """An adaptive numerical scheme failed its convergence certificate."""

    def __init__(self, message: str, coarse: float | complex | None = None,
                 fine: float | complex | None = None):
        super().__init__(message)
        self.coarse = coarse
        self.fine = fine
