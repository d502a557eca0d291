"""Typed errors shared across the package.

The split matters for the CLI exit-code contract: ``InvalidInputError`` and
its subclasses map to exit code 2 (bad input, including typed refusals such
as a non-CNP kernel fed to the Chen identity), while ``CertificationError``
maps to exit code 1 (a property that should hold numerically did not).
"""

__all__ = [
    "GradedShiftError",
    "InvalidInputError",
    "SeriesRangeError",
    "NotLeftInvertibleError",
    "NotContractiveError",
    "NotCnpError",
    "CertificationError",
]


class GradedShiftError(Exception):
    """Base class for all package errors."""


class InvalidInputError(GradedShiftError, ValueError):
    """Input violates a documented precondition."""


class SeriesRangeError(InvalidInputError):
    """Coefficient index beyond the documented series cap."""


class NotLeftInvertibleError(InvalidInputError):
    """Operator not bounded below at truncation scale.

    Carries the offending smallest singular value in ``sigma_min``.
    """

    def __init__(self, message: str, sigma_min: float):
        super().__init__(message)
        self.sigma_min = float(sigma_min)


class NotContractiveError(InvalidInputError):
    """Symbol or operator fails its contractivity precondition."""


class NotCnpError(InvalidInputError):
    """Kernel fails the complete Nevanlinna-Pick sign test; refused."""


class CertificationError(GradedShiftError):
    """A post-hoc numerical certificate failed."""
