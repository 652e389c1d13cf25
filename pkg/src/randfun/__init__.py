"""Random Taylor series laboratory.

Simulates random Taylor series with Gaussian / Rademacher / Steinhaus
coefficient factors, counts and locates their zeros, evaluates growth
functionals of the deterministic magnitudes, and drives seeded experiments
for zero-count concentration, sector equidistribution and hole-probability
asymptotics.
"""

from .errors import (
    BoundaryRootUnresolved,
    InvalidIndex,
    NonEntireSequence,
    NumericalFailure,
    OutOfCertifiedDisk,
    RandfunError,
    RareEventInfeasible,
    RoucheMarginUnverifiable,
    TooFewDominantTerms,
    TruncationFailure,
    UnsupportedEnsemble,
    ZeroAtOrigin,
)
from .growth import (
    CoefficientSequence,
    GrowthProfile,
    N_delta_set,
    S_bounds_check,
    b_n,
    edelman_kostlan,
    growth_profile,
    hayman_window,
    s_log_deriv,
    sigma,
)
from .sampling import (
    EnsembleSpec,
    SeriesSample,
    envelope_event_probability,
    evaluate,
    omega_event_holds,
    sample,
    sigma_hat_normalize,
)
from .zeros import (
    ZeroSet,
    argument_principle_count,
    find_zeros_disk,
    integrated_sector_N,
    jensen_N,
    sector_count,
    value_solutions,
)
from .covariance import (
    CircleConfiguration,
    CovarianceMatrix,
    build_covariance,
    circulant_eigenvalues,
    det_sigma_lower_check,
    good_configuration_search,
    hole_bound_pair,
    vandermonde_average,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
