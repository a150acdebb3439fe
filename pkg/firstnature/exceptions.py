"""
This module defines the firstnature exception hierarchy. The three families map onto the
exit codes of the command line interface: configuration problems (2), data problems (3)
and numerical failures (4).
"""
from abc import ABC


class FirstNatureException(Exception, ABC):
    """
    Abstract base class of all firstnature exceptions.
    """
    exit_code = 1

    def __init__(self, message: str) -> None:
        super().__init__(message)


class ConfigError(FirstNatureException):
    """
    This exception is raised whenever a run configuration is invalid, e.g. a referenced file does not
    exist or a parameter grid is empty.
    """
    exit_code = 2


class DataError(FirstNatureException):
    """
    This exception is raised whenever input data is malformed or inconsistent.
    """
    exit_code = 3


class RasterFormatError(DataError):
    """
    This exception is raised whenever an ASCII grid raster has a malformed header or body.
    """
    pass


class UnreachableParishError(DataError):
    """
    This exception is raised whenever a parish cannot reach any port of the baseline set, so that its
    market access is zero and its log is undefined.
    """
    pass


class PanelBalanceError(DataError):
    """
    This exception is raised whenever a panel violates the balance an estimator requires.
    """
    pass


class NumericalError(FirstNatureException):
    """
    This exception is raised whenever an estimation fails numerically.
    """
    exit_code = 4


class SingularDesignError(NumericalError):
    """
    This exception is raised whenever a regression design is rank deficient, e.g. because the treatment is
    collinear with the fixed effects.
    """
    pass


class SeparationError(NumericalError):
    """
    This exception is raised whenever a Poisson regressor is perfectly separated by zero outcomes so that its
    coefficient diverges.
    """
    pass


class ConvergenceError(NumericalError):
    """
    This exception is raised whenever an iterative estimator fails to converge.
    """
    pass


class InsufficientClustersError(NumericalError):
    """
    This exception is raised whenever cluster-robust inference is requested with fewer than two clusters.
    """
    pass
