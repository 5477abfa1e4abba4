"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class ProjRocError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(ProjRocError, ValueError):
    """Input data violates a structural invariant."""

    exit_code = 4


class DimensionMismatch(ValidationError):
    pass


class NonFiniteValue(ValidationError):
    pass


class ConditioningPointOutsideSupport(ValidationError):
    pass


class TooFewObservations(ValidationError):
    pass


class DegenerateCovariate(ValidationError):
    pass


class EmptySample(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class InvalidCorrelation(ValidationError):
    pass


class EmptyAggregation(ValidationError):
    pass


class EstimationError(ProjRocError, ArithmeticError):
    """A smoother or bootstrap step could not produce a finite estimate."""

    exit_code = 5


class BandwidthTooSmall(EstimationError):
    """Every kernel weight underflowed at the evaluation point."""


class AllBandwidthsFail(EstimationError):
    pass


class BootstrapDegenerate(EstimationError):
    pass


class PairEstimationFailure(EstimationError):
    pass


class DataFormatError(ProjRocError, ValueError):
    """A dataset file could not be parsed."""

    exit_code = 3


class InvalidPlan(ProjRocError, ValueError):
    exit_code = 6


class UnsupportedK(ProjRocError, ValueError):
    exit_code = 7
