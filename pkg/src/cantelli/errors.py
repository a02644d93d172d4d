"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`CantelliError`, so callers (the CLI in particular) can separate
numeric/precondition failures from programming errors.
"""


class CantelliError(ValueError):
    """Base class for library errors."""


class SchemaError(CantelliError):
    """A problem instance does not match the JSON schema."""


class DimensionMismatch(CantelliError):
    pass


class NotSymmetric(CantelliError):
    pass


class NotPositiveDefinite(CantelliError):
    pass


class NoConvergence(CantelliError):
    pass


class LengthNotTriangular(CantelliError):
    pass


class SingularMap(CantelliError):
    pass


class NotPolyhedral(CantelliError):
    pass


class InvalidCone(CantelliError):
    pass


class ZeroThreshold(CantelliError):
    pass


class WitnessSearchFailed(CantelliError):
    pass


class InfeasibleRegion(CantelliError):
    pass


class NegativeEntry(CantelliError):
    pass


class EmptyRowSet(CantelliError):
    pass


class DimensionGuard(CantelliError):
    pass


class NonPositiveInput(CantelliError):
    pass


class NonPositivePairing(CantelliError):
    pass


class NonPositiveVariance(CantelliError):
    pass


class NotAMatching(CantelliError):
    pass


class OddOrder(CantelliError):
    pass


class NotPerfect(CantelliError):
    pass


class InvalidGraph(CantelliError):
    pass


class NonPositiveMean(CantelliError):
    pass


class InverseNotNonnegative(CantelliError):
    pass


class BadAlpha(CantelliError):
    pass


class DeviationNotPositive(CantelliError):
    pass


class MinorNotPD(CantelliError):
    pass


class KmaxTooLarge(CantelliError):
    pass
