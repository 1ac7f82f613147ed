"""Exception hierarchy for gecap."""


class GecapError(Exception):
    """Base class for all errors raised by gecap."""


class DimensionMismatchError(GecapError, ValueError):
    """Operands have incompatible shapes."""


class NotPSDError(GecapError, ValueError):
    """A matrix expected to be positive semidefinite has a significantly negative eigenvalue."""


class DomainError(GecapError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class InvalidOperationError(GecapError, ValueError):
    """A Kraus map is not a valid (trace nonincreasing) quantum operation."""


class InvalidParametersError(GecapError, ValueError):
    """Constructor parameters violate their admissibility constraints."""


class NotAnExtensionError(GecapError, ValueError):
    """The candidate map does not complete the operation to a channel."""


class UndefinedConditionalStateError(GecapError, ValueError):
    """The detection probability vanishes, so the normalized output is undefined."""


class UnsupportedRankError(GecapError, ValueError):
    """The requested decision is only available for Kraus rank 1."""


class NumericalFailure(GecapError, RuntimeError):
    """A numerical routine failed to converge or to bracket a solution."""
