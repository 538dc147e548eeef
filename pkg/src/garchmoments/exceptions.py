"""Exception types shared across the package."""


class GarchMomentsError(Exception):
    """Base class for all package errors."""


class ParameterError(GarchMomentsError):
    """A parameter vector violates the positivity/shape constraints of its model."""


class PathOverflowError(GarchMomentsError):
    """A simulated path produced non-finite values (explosive recursion)."""


class DegenerateSeriesError(GarchMomentsError):
    """The input series carries no volatility information (e.g. constant magnitude)."""


class ConvergenceError(GarchMomentsError):
    """An iterative routine failed to converge within its budget."""


class InfeasibleConstraintError(GarchMomentsError):
    """The constrained parameter set cannot be reached inside the search box."""


class DecompositionUnsupportedError(GarchMomentsError):
    """The companion matrix is not affine in a single innovation transform."""


class DimensionCapError(GarchMomentsError):
    """A Kronecker power would exceed the configured dense-dimension cap."""


class SingularMatrixError(GarchMomentsError):
    """A matrix that must be invertible is numerically singular."""
