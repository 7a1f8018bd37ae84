"""Exception hierarchy shared by all betadyn modules."""


class BetadynError(Exception):
    """Base class for every error raised by the package."""


class DomainError(BetadynError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigError(BetadynError, ValueError):
    """A run configuration is malformed or inconsistent."""


class NumericalError(BetadynError, ArithmeticError):
    """Base class for failures of the numerical machinery."""


class UndecidableBranch(NumericalError):
    """An interval straddles a branch threshold at the maximal allowed precision.

    The orbit either hit a breakpoint exactly or is indistinguishable from one.
    """

    def __init__(self, message="", step=None, bits=None):
        super().__init__(message)
        self.step = step
        self.bits = bits


class PrecisionExhausted(NumericalError):
    """A radius target could not be met below the precision ceiling."""


class BreakpointHit(NumericalError):
    """An exact orbit landed on a point where the map is left undefined."""

    def __init__(self, message="", step=None, point=None):
        super().__init__(message)
        self.step = step
        self.point = point


class IndeterminateOrder(NumericalError):
    """Two streams cannot be ordered because one terminated before they differ."""


class InternalInconsistency(BetadynError, AssertionError):
    """Validated data violates an identity that must hold for correct inputs."""


class TruncationTooCoarse(NumericalError):
    """A truncated series is too short to give a positive normalization."""


class QuadratureFailure(NumericalError):
    """Piecewise quadrature did not converge below the point-count cap."""


class EstimatorFailure(NumericalError):
    """An iterative estimator did not converge."""


class OutsideParameterSpace(DomainError):
    """A computed parameter falls outside [0,1) x (1, inf)."""


class NotAttainable(BetadynError):
    """A kneading word is not the coding of 0 anywhere on the searched range."""


class CountAborted(NumericalError):
    """Word counting stopped because an order comparison was indeterminate."""

    def __init__(self, message="", length=None):
        super().__init__(message)
        self.length = length
