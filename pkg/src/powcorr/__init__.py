"""powcorr: correlation statistics of {xi * x^n} with certified precision."""

__version__ = "0.1.0"

from .dyadic import DyadicRational, as_dyadic
from .errors import (DomainError, NumericalError, PowcorrError,
                     PrecisionError, ResourceError)

__all__ = [
    "DyadicRational",
    "as_dyadic",
    "DomainError",
    "NumericalError",
    "PowcorrError",
    "PrecisionError",
    "ResourceError",
    "__version__",
]
