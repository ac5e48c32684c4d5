"""Exception types shared across the library.

The CLI maps these onto exit codes: input problems (ValueError,
ConfigError, DomainError) exit 1, mathematical infeasibility
(ExposureRangeError) exits 2, solver non-convergence (SolverError)
exits 3.
"""


class QapoolError(Exception):
    """Base class for library-specific errors."""


class DomainError(QapoolError):
    """A forecast lies outside the scoring rule's forecast domain."""


class ExposureRangeError(QapoolError):
    """A target exposure vector is not attained by any forecast.

    Raised when inversion of the exposure map fails structurally, e.g.
    averaging exposures of a rule without the convex-exposure property.
    """


class DegenerateError(QapoolError):
    """A pooling request carries no usable weight (all weights zero)."""


class ConfigError(QapoolError):
    """An operation was configured inconsistently with its rule."""


class SolverError(QapoolError):
    """An internal iterative solver failed to reach its tolerance."""
