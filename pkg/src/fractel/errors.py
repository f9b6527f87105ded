"""Exception and warning types shared across the package."""

from __future__ import annotations


class FractelError(Exception):
    """Base class for all errors raised by :mod:`fractel`."""


class NonConvergence(FractelError, ArithmeticError):
    """A special-function evaluation left its validated envelope."""


class QuadratureFailure(FractelError, ArithmeticError):
    """Adaptive quadrature exhausted its panel budget."""


class DomainError(FractelError, ValueError):
    """Arguments outside the domain where a quantity is defined."""


class ConfigError(FractelError, ValueError):
    """Inconsistent or invalid configuration."""


class GrowthViolation(FractelError, ValueError):
    """Sampled problem data exceed the declared growth envelope."""


class SingularSystem(FractelError, ArithmeticError):
    """The finite-difference linear system is degenerate."""


class GridMismatch(FractelError, ValueError):
    """Two sampled fields do not live on the same grid."""


class TruncationWarning(UserWarning):
    """An image series was cut at its cap before meeting its tolerance."""
