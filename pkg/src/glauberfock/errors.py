"""Exception hierarchy shared by the library and the command line."""


class GlauberFockError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InvalidArgumentError(GlauberFockError, ValueError):
    exit_code = 2


class InvalidPlanError(InvalidArgumentError):
    """A phase plan cannot resolve the harmonics the estimator needs."""


class InfeasibleGeometryError(GlauberFockError):
    """A requested coupling cannot be realised with a positive separation."""

    exit_code = 3

    def __init__(self, message, site=None):
        super().__init__(message)
        self.site = site


class NumericalError(GlauberFockError, ArithmeticError):
    exit_code = 4
