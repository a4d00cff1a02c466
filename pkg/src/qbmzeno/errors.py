"""Exception and warning types shared across the package."""


class QBMError(Exception):
    """Base class for all package errors."""


class ConfigError(QBMError, ValueError):
    """Invalid run configuration. ``field`` names the offending key path."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class UnsupportedRegimeError(QBMError, ValueError):
    """Parameters outside the domain where the closed forms are valid."""


class UnsupportedObservableError(UnsupportedRegimeError):
    """Observable/bath combination without a finite closed form."""


class NumericalConsistencyError(QBMError, ArithmeticError):
    """A computed quantity violates a structural identity (e.g. det <= 0)."""


class CoverageError(QBMError, ValueError):
    """Quadrature grid does not cover enough of the density.

    The integral computed on the deficient grid is kept in ``integral``.
    """

    def __init__(self, message, integral=None):
        self.integral = integral
        super().__init__(message)


class StepSizeError(QBMError, ValueError):
    """Finite-difference step below the roundoff floor."""


class OracleError(QBMError, RuntimeError):
    """Numerical quadrature in the verification routes failed to converge."""


class ConvergenceWarning(RuntimeWarning):
    """Adaptive Matsubara summation reached ``max_terms`` before converging."""


class DrudeCutoffWarning(UserWarning):
    """Drude cutoff not well separated from the oscillator and friction scales."""


class OutlierOutcomeWarning(UserWarning):
    """First outcome lies far in the tail of its marginal distribution."""
