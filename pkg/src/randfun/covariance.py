"""Covariance matrices of circle samples and their determinant bounds.

The Gaussian vector (f(z_1), ..., f(z_n)) for points z_j on a circle of
radius rho has covariance Sigma_jk = sum_m a_m^2 (z_j conj(z_k))^m.  For
equispaced points Sigma is circulant with eigenvalues given by lacunary
sums; for a good configuration of points log det Sigma >= S(rho).

Matrices are stored unit-diagonal (entries divided by sigma^2(rho)) together
with the log scale, so determinants survive S(r) ~ 1e3 magnitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _philox
from .errors import NumericalFailure, TooFewDominantTerms
from .growth import (
    NEG_INF,
    CoefficientSequence,
    growth_profile,
    hayman_window,
    log_sigma2,
    _support_terms,
)


@dataclass(frozen=True)
class CircleConfiguration:
    """n distinct sorted angles on the circle of radius rho.

    rho = 0 is allowed as the degenerate single-point configuration."""

    rho: float
    angles: tuple

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        if self.rho == 0 and len(self.angles) != 1:
            raise ValueError("rho = 0 admits exactly one point")
        a = tuple(self.angles)
        if sorted(a) != list(a) or len(set(a)) != len(a):
            raise ValueError("angles must be sorted and distinct")

    @property
    def n_points(self) -> int:
        return len(self.angles)

    def points(self) -> np.ndarray:
        return self.rho * np.exp(1j * np.asarray(self.angles))

    @staticmethod
    def equispaced(rho: float, n: int) -> "CircleConfiguration":
        return CircleConfiguration(
            rho, tuple(2.0 * math.pi * j / n for j in range(n))
        )


@dataclass(frozen=True)
class CovarianceMatrix:
    """Hermitian PSD covariance, unit-diagonal scaled form plus log scale.

    entries = exp(log_scale) * scaled; log_scale = log sigma^2(rho).
    """

    scaled: np.ndarray
    log_scale: float
    config: CircleConfiguration
    seq_kind: str

    @property
    def entries(self) -> np.ndarray:
        return np.exp(self.log_scale) * self.scaled

    @property
    def n(self) -> int:
        return self.scaled.shape[0]

    def log_det(self) -> float:
        """log det via Cholesky of the scaled matrix."""
        try:
            chol = np.linalg.cholesky(self.scaled)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"covariance not PSD: {exc}") from exc
        return self.n * self.log_scale + 2.0 * float(
            np.sum(np.log(np.real(np.diag(chol))))
        )

    def min_eigenvalue_ratio(self) -> float:
        """min eigenvalue of the scaled matrix over its trace."""
        vals = np.linalg.eigvalsh(self.scaled)
        return float(vals[0] / np.trace(self.scaled).real)


def _weighted_support(seq: CoefficientSequence, rho: float):
    """Support indices and weights w_n = a_n^2 rho^{2n} / sigma^2(rho)."""
    log_s2 = log_sigma2(seq, rho)
    idx = []
    wts = []
    for n, t in _support_terms(seq, math.log(rho)):
        if t == NEG_INF:
            continue
        idx.append(n)
        wts.append(math.exp(2.0 * t - log_s2))
    return np.array(idx), np.array(wts), log_s2


def build_covariance(
    seq: CoefficientSequence, config: CircleConfiguration
) -> CovarianceMatrix:
    """Sigma_jk = sum_m a_m^2 (z_j conj z_k)^m, assembled in Gram form.

    The scaled matrix is P diag(w) P^* with P_jk = e^{i theta_j n_k}, which
    is Hermitian PSD by construction; a symmetrization pass removes the last
    rounding asymmetry.
    """
    if config.rho == 0:
        la0 = seq.log_a(0)
        if la0 == NEG_INF:
            raise ValueError("a_0 = 0 leaves the origin sample degenerate")
        return CovarianceMatrix(
            scaled=np.ones((1, 1), dtype=np.complex128),
            log_scale=2.0 * la0, config=config, seq_kind=seq.kind,
        )
    idx, wts, log_s2 = _weighted_support(seq, config.rho)
    theta = np.asarray(config.angles)
    P = np.exp(1j * np.outer(theta, idx))
    scaled = (P * wts) @ P.conj().T
    scaled = 0.5 * (scaled + scaled.conj().T)
    cov = CovarianceMatrix(
        scaled=scaled, log_scale=log_s2, config=config, seq_kind=seq.kind
    )
    ratio = cov.min_eigenvalue_ratio()
    if ratio < -1e-10:
        raise NumericalFailure(f"covariance min eigenvalue ratio {ratio}")
    return cov


def circulant_eigenvalues(
    seq: CoefficientSequence, rho: float, N: int
) -> np.ndarray:
    """Eigenvalues for N equispaced points: lambda_k = N sum_l a_{k+lN}^2 rho^{2(k+lN)}.

    Returned in residue order k = 0..N-1 (not sorted); matches a dense
    Hermitian eigensolver on build_covariance of the equispaced configuration
    to 1e-9 relative as a sorted multiset.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    idx, wts, log_s2 = _weighted_support(seq, rho)
    lam = np.zeros(N)
    for n, w in zip(idx, wts):
        lam[n % N] += w
    return N * lam * math.exp(log_s2)


@dataclass(frozen=True)
class VandermondeAverage:
    mean: float
    stderr: float
    trials: int
    expected: float


def vandermonde_average(
    n: int,
    exponents: Sequence[int],
    rho: float = 1.0,
    trials: int = 10 ** 5,
    seed: int = 0,
) -> VandermondeAverage:
    """Monte Carlo estimate of E |det A|^2 / rho^{2 sum j} over random angles.

    A is the generalized Vandermonde matrix with columns z^0, z^{j_1}, ...,
    z^{j_{n-1}}; the angular average equals n! exactly (cross terms vanish),
    and the rho powers cancel against the column scales, so only the phase
    matrix determinant is sampled.
    """
    exps = [0] + sorted(int(j) for j in exponents)
    if len(exps) != n:
        raise ValueError("need exactly n-1 exponents")
    if len(set(exps)) != n:
        raise ValueError("exponents must be distinct and positive")
    if n == 1:
        return VandermondeAverage(1.0, 0.0, trials, 1.0)
    js = np.array(exps, dtype=np.float64)
    vals = np.empty(trials)
    chunk = max(1, (1 << 20) // (n * n))
    for start in range(0, trials, chunk):
        stop = min(trials, start + chunk)
        theta = _philox.uniform_angles_matrix(seed, start, stop - start, n)
        A = np.exp(1j * theta[:, :, None] * js[None, None, :])
        vals[start:stop] = np.abs(np.linalg.det(A)) ** 2
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return VandermondeAverage(
        mean=mean, stderr=stderr, trials=trials,
        expected=float(math.factorial(n)),
    )


@dataclass(frozen=True)
class ConfigurationSearchResult:
    config: CircleConfiguration
    log_ratio: float  # log |det A| - sum(j) log rho
    achieved: bool
    attempts: int
    exponents: tuple


def good_configuration_search(
    seq: CoefficientSequence,
    rho: float,
    n: Optional[int] = None,
    attempts: int = 10 ** 4,
    seed: int = 0,
) -> ConfigurationSearchResult:
    """Search for points with |det A| >= rho^{sum j} (exponents = N(rho)\\{0}).

    Best-of-attempts random search with the equispaced configuration always
    included; existence is guaranteed on average, the search is the
    constructive proxy.  Soft failure: the best ratio is reported either way.
    """
    gp = growth_profile(seq, rho)
    exps = [j for j in gp.N_set if j != 0]
    if n is None:
        n = len(exps) + 1
    js = np.array([0] + exps[: n - 1], dtype=np.float64)
    if len(js) != n:
        raise ValueError("not enough dominant exponents for n points")

    def log_abs_det(theta):
        A = np.exp(1j * np.outer(theta, js))
        sign, logdet = np.linalg.slogdet(A)
        return logdet

    best_theta = np.array([2.0 * math.pi * j / n for j in range(n)])
    best = log_abs_det(best_theta)
    for t in range(attempts):
        theta = np.sort(_philox.uniform_angles(seed, t, n))
        if len(np.unique(theta)) < n:
            continue
        v = log_abs_det(theta)
        if v > best:
            best = v
            best_theta = theta
    order = np.argsort(best_theta)
    config = CircleConfiguration(rho, tuple(best_theta[order]))
    return ConfigurationSearchResult(
        config=config,
        log_ratio=float(best),
        achieved=bool(best >= -1e-9),
        attempts=attempts,
        exponents=tuple(int(j) for j in js),
    )


@dataclass(frozen=True)
class DetLowerCheck:
    log_det: float
    S_r: float
    ok: bool
    config: CircleConfiguration
    search_log_ratio: float


def det_sigma_lower_check(
    seq: CoefficientSequence,
    r: float,
    attempts: int = 10 ** 4,
    seed: int = 0,
) -> DetLowerCheck:
    """Check log det Sigma >= S(r) at a searched n(r)-point configuration."""
    search = good_configuration_search(seq, r, attempts=attempts, seed=seed)
    cov = build_covariance(seq, search.config)
    log_det = cov.log_det()
    S_r = growth_profile(seq, r).S
    return DetLowerCheck(
        log_det=log_det,
        S_r=S_r,
        ok=bool(log_det >= S_r - 1e-6),
        config=search.config,
        search_log_ratio=search.log_ratio,
    )


@dataclass(frozen=True)
class HoleBoundPair:
    r: float
    S: float
    upper: float
    lower: float
    hayman_ok: bool


def hole_bound_pair(
    seq: CoefficientSequence,
    r: float,
    C_upper: float = 1.0,
    C_lower: float = 1.0,
) -> HoleBoundPair:
    """Two-sided bracket for the hole exponent p_H(f; r).

    upper = S + C_u sqrt(m) log m, lower = S - C_l n log S (the log factor is
    floored at 0 for S < 1).  The constants are configurable because the
    constants are free parameters of the bracket; radii failing the Hayman window are
    flagged, not rejected.
    """
    gp = growth_profile(seq, r)
    if gp.n_count < 2:
        raise TooFewDominantTerms(f"n(r) = {gp.n_count} < 2 at r = {r}")
    m = gp.m_weight
    S = gp.S
    log_m = math.log(m) if m > 1 else 0.0
    log_S = max(math.log(S), 0.0) if S > 0 else 0.0
    return HoleBoundPair(
        r=r,
        S=S,
        upper=S + C_upper * math.sqrt(m) * log_m,
        lower=S - C_lower * gp.n_count * log_S,
        hayman_ok=hayman_window(seq, r),
    )
