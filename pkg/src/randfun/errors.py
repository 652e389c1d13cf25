"""Exception types shared across the package."""


class RandfunError(Exception):
    """Base class for all package-specific errors."""


class NonEntireSequence(RandfunError):
    """Coefficient sequence does not define an entire function
    (log a_n + n log r fails to decay on the materialized range)."""


class InvalidIndex(RandfunError):
    """Per-index growth quantity requested at an unsupported index."""


class TooFewDominantTerms(RandfunError):
    """Operation requires at least two dominant indices (n(r) >= 2)."""


class TruncationFailure(RandfunError):
    """Certified truncation degree not reachable within the degree cap."""


class OutOfCertifiedDisk(RandfunError):
    """Evaluation requested outside the sample's certified radius."""


class UnsupportedEnsemble(RandfunError):
    """Operation is only defined for a specific random ensemble."""


class RoucheMarginUnverifiable(RandfunError):
    """Truncation tail is not provably below the minimum of the truncated
    series on the target circle; resample with a smaller tail tolerance."""


class NumericalFailure(RandfunError):
    """Iterative numerical procedure failed to converge."""


class BoundaryRootUnresolved(RandfunError):
    """A zero persistently too close to the integration circle."""


class ZeroAtOrigin(RandfunError):
    """Jensen-type functional requested for a sample with f(0) = 0."""


class RareEventInfeasible(RandfunError):
    """Requested Monte Carlo rare event needs more trials than provided."""

    def __init__(self, message, smallest_infeasible_r=None):
        super().__init__(message)
        self.smallest_infeasible_r = smallest_infeasible_r
