"""Exception hierarchy shared by all gmopg modules."""


class GmopgError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GmopgError, ValueError):
    """An argument lies outside the support or admissible range."""


class ParameterError(GmopgError, ValueError):
    """Invalid distribution or model parameters."""


class UnsupportedExpansionError(GmopgError, ValueError):
    """A series representation was requested outside its region of validity."""


class QuadratureError(GmopgError, RuntimeError):
    """Numerical integration did not converge or diverged."""


class ConvergenceError(GmopgError, RuntimeError):
    """Every optimizer start failed.

    The ``diagnostics`` attribute keeps one record per attempted start.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class NotPositiveDefiniteError(GmopgError, ValueError):
    def __init__(self, message, eigenvalues):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class DatasetValidationError(GmopgError, ValueError):
    """A candidate dataset does not reproduce the reference summary statistics."""
