"""Exception hierarchy.

Every error derives from NikaveError; the value errors also subclass ValueError
so callers that only care about bad input can catch that.
"""

from __future__ import annotations


class NikaveError(Exception):
    """Base class for all nikave errors."""


class SizeError(NikaveError, ValueError):
    """Coefficient vector length does not match the basis size."""


class ShapeError(NikaveError, ValueError):
    """Grid or point dimension does not match the basis dimension."""


class BasisError(NikaveError, ValueError):
    """Basis descriptor invalid, or not supported by the requested operation."""


class DomainError(NikaveError, ValueError):
    """Parameter outside the domain of an operation."""


class DegenerateInputError(NikaveError, ArithmeticError):
    """Every Monte Carlo draw was rejected."""


class SweepPointError(NikaveError):
    """An estimator failed at one sweep point."""

    def __init__(self, d: int, n: int, cause: Exception) -> None:
        self.d = d
        self.n = n
        super().__init__(f"sweep point d={d} n={n} failed: {cause}")
