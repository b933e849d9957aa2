"""Exception and warning types shared across the package."""


class GnarError(Exception):
    """Base class for model and data errors raised by this package.

    Anything that a correct caller could still trigger with bad data
    (too-short series, degenerate masks, singular problems) derives from
    this class; genuine usage errors raise ValueError/TypeError instead.
    """


class InsufficientDataError(GnarError):
    """Raised when a series is too short for the requested model order."""


class DataError(GnarError):
    """Raised for degenerate data: missing required cells, zero scale, etc."""


class ConvergenceError(GnarError):
    """Raised when an iterative numeric routine fails to converge."""


class StationarityWarning(UserWarning):
    """Emitted when coefficients fail the sufficient stationarity bound."""


class RankDeficiencyWarning(UserWarning):
    """Emitted when a regression design is rank deficient."""


class SingularCovarianceWarning(UserWarning):
    """Emitted when a residual covariance needs ridge stabilisation."""
