"""Deterministic growth functionals of a coefficient sequence.

Everything here is computed from the magnitudes a_n and a radius r alone:
the circle L^2 size sigma(r), its logarithmic derivative s(r), the per-index
log-sizes b_n(r), the dominant index set N(r) with its weight m(r), and the
hole exponent S(r) = 2 * sum of log^+(a_n r^n).

All magnitude arithmetic is done in the log domain (lgamma based) so the
closed-form families stay finite for n up to 1e5; sums use max-shifted
exponentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import InvalidIndex, NonEntireSequence, TooFewDominantTerms

NEG_INF = float("-inf")

# Default eta for the Hayman window and delta(r) = m(r)^(-eta).  The allowed
# range is (0, 1/4]; the top of the range gives the widest window.
DEFAULT_ETA = 0.25

_STOP_LOG = -60.0 * math.log(2.0)
_DEGREE_CAP = 10 ** 6


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """Deterministic magnitudes a_n >= 0 with exact log a_n access.

    ``log_a(n)`` returns log a_n (-inf when a_n = 0).  ``support_after(n)``
    returns the next index m > n with a_m > 0, or -1 when none exists on the
    materialized range.  ``finite_degree`` is the largest support index for
    finite families (explicit lists, materialized hole blocks), else None.
    Instances compare and hash by identity (callables preclude value
    equality), which lets truncation plans be cached per instance.
    """

    kind: str
    log_a: Callable[[int], float]
    support_after: Callable[[int], int]
    finite_degree: Optional[int] = None
    params: dict = field(default_factory=dict)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def gef() -> "CoefficientSequence":
        """a_n = 1/sqrt(n!), the plane-invariant Gaussian entire function."""

        def log_a(n: int) -> float:
            return -0.5 * math.lgamma(n + 1)

        return CoefficientSequence("gef", log_a, _dense_support(None))

    @staticmethod
    def gamma_type(alpha: float) -> "CoefficientSequence":
        """a_n = 1/Gamma(alpha*n + 1), order-2/alpha growth."""
        if alpha <= 0:
            raise ValueError("alpha must be positive")

        def log_a(n: int) -> float:
            return -math.lgamma(alpha * n + 1)

        return CoefficientSequence(
            "gamma", log_a, _dense_support(None), params={"alpha": alpha}
        )

    @staticmethod
    def gauss_squared(alpha: float) -> "CoefficientSequence":
        """a_n = e^{-alpha n^2}; for alpha >= log 3 all random-sign zeros are real."""
        if alpha <= 0:
            raise ValueError("alpha must be positive")

        def log_a(n: int) -> float:
            return -alpha * n * n

        return CoefficientSequence(
            "gausssq", log_a, _dense_support(None), params={"alpha": alpha}
        )

    @staticmethod
    def lacunary() -> "CoefficientSequence":
        """a_0 = 1 and a_j = e^{-2^k k} at j = 2^k, zero elsewhere."""

        def log_a(n: int) -> float:
            if n == 0:
                return 0.0
            k = n.bit_length() - 1
            if (1 << k) != n:
                return NEG_INF
            return -float(n) * k

        def support_after(n: int) -> int:
            if n < 1:
                return 1
            return 1 << n.bit_length()

        return CoefficientSequence("lacunary", log_a, support_after)

    @staticmethod
    def explicit(values: Sequence[float]) -> "CoefficientSequence":
        """Finite list of nonnegative magnitudes a_0..a_D."""
        vals = [float(v) for v in values]
        if not vals:
            raise ValueError("explicit list must be nonempty")
        if any(v < 0 for v in vals):
            raise ValueError("magnitudes must be nonnegative")
        logs = [math.log(v) if v > 0 else NEG_INF for v in vals]
        degree = len(vals) - 1

        def log_a(n: int) -> float:
            if 0 <= n <= degree:
                return logs[n]
            return NEG_INF

        def support_after(n: int) -> int:
            m = max(n + 1, 0)
            while m <= degree:
                if logs[m] > NEG_INF:
                    return m
                m += 1
            return -1

        return CoefficientSequence(
            "explicit", log_a, support_after, finite_degree=degree,
            params={"values": tuple(vals)},
        )

    @staticmethod
    def hole_blocks(a: float, b: float, blocks: int) -> "CoefficientSequence":
        """Block construction behind the hole-probability exceptional set.

        Radii r_m = exp(a^m) and block ends k_m = floor(exp(b^m)); indices
        j in (k_{m-1}, k_m] get a_j r_m^j = 1, i.e. log a_j = -j a^m, and
        a_0 = 1.  Only blocks 1..``blocks`` are materialized, so the sequence
        is finite with top index k_blocks.
        """
        if a <= 1 or b <= 1:
            raise ValueError("block parameters must exceed 1")
        if blocks < 1:
            raise ValueError("need at least one block")
        k = [0]
        for m in range(1, blocks + 1):
            km = int(math.floor(math.exp(b ** m)))
            if km <= k[-1]:
                km = k[-1] + 1  # keep blocks nonempty for tiny b
            k.append(km)
        edges = list(k)
        log_r = [a ** m for m in range(blocks + 1)]
        top = edges[-1]

        def log_a(n: int) -> float:
            if n == 0:
                return 0.0
            if n > top:
                return NEG_INF
            for m in range(1, blocks + 1):
                if edges[m - 1] < n <= edges[m]:
                    return -float(n) * log_r[m]
            return NEG_INF

        return CoefficientSequence(
            "holeblocks", log_a, _dense_support(top), finite_degree=top,
            params={"a": a, "b": b, "blocks": blocks, "edges": tuple(edges)},
        )

    @staticmethod
    def from_log_a(
        log_a: Callable[[int], float],
        kind: str = "custom",
        finite_degree: Optional[int] = None,
    ) -> "CoefficientSequence":
        """Escape hatch for custom magnitude laws (log-domain callable)."""
        return CoefficientSequence(
            kind, log_a, _dense_support(finite_degree), finite_degree=finite_degree
        )

    # -- helpers -----------------------------------------------------------

    def first_support(self) -> int:
        if self.log_a(0) > NEG_INF:
            return 0
        return self.support_after(0)

    def describe(self) -> str:
        if self.params:
            inner = ",".join(f"{k}={v}" for k, v in self.params.items()
                             if k != "values")
            if self.kind == "explicit":
                inner = ",".join(repr(v) for v in self.params["values"])
            return f"{self.kind}({inner})" if inner else self.kind
        return self.kind


def _dense_support(finite_degree):
    if finite_degree is None:
        return lambda n: n + 1

    def support_after(n: int) -> int:
        m = n + 1
        return m if m <= finite_degree else -1

    return support_after


@dataclass(frozen=True)
class GrowthProfile:
    """Per-radius growth record: sigma, s, S, dominant set and its weights."""

    r: float
    sigma: float
    s: float
    S: float
    n_count: int
    m_weight: int
    delta: float
    N_set: tuple


def _support_terms(seq: CoefficientSequence, log_r: float, weight: float = 0.0):
    """Yield (n, log(a_n r^n) + weight*n) over the support, stopping once the
    terms are certifiably negligible relative to the running maximum.

    Raises NonEntireSequence when terms keep growing past the degree cap.
    """
    n = seq.first_support()
    best = NEG_INF
    best_n = 0
    while n != -1:
        if n > _DEGREE_CAP:
            raise NonEntireSequence(
                f"no decay by index {n} for {seq.describe()} at log r = {log_r}"
            )
        t = seq.log_a(n) + n * (log_r + weight)
        yield n, t
        if t > best:
            best = t
            best_n = n
        elif n > best_n and t < best + _STOP_LOG:
            return
        n = seq.support_after(n)


def log_sigma2(seq: CoefficientSequence, r: float) -> float:
    """log of sigma^2(r) = sum a_n^2 r^{2n}, max-shifted."""
    if r <= 0:
        raise ValueError("r must be positive")
    log_r = math.log(r)
    shift = NEG_INF
    acc = 0.0
    for _, t in _support_terms(seq, log_r):
        lt = 2.0 * t
        if lt == NEG_INF:
            continue
        if lt > shift:
            acc = acc * math.exp(shift - lt) + 1.0 if shift > NEG_INF else 1.0
            shift = lt
        else:
            acc += math.exp(lt - shift)
    if shift == NEG_INF:
        raise ValueError("sequence has empty support")
    return shift + math.log(acc)


def sigma(seq: CoefficientSequence, r: float) -> float:
    """sigma(r) = (sum a_n^2 r^{2n})^{1/2}; deterministic, relative error
    below 1e-14 for the closed-form families."""
    return math.exp(0.5 * log_sigma2(seq, r))


def s_log_deriv(seq: CoefficientSequence, r: float) -> float:
    """s(r) = d log sigma / d log r = (sum n a_n^2 r^{2n}) / (sum a_n^2 r^{2n}).

    Computed as the exact ratio of the two sums, no finite differencing.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    log_r = math.log(r)
    shift = NEG_INF
    den = 0.0
    num = 0.0
    for n, t in _support_terms(seq, log_r):
        lt = 2.0 * t
        if lt == NEG_INF:
            continue
        if lt > shift:
            scale = math.exp(shift - lt) if shift > NEG_INF else 0.0
            den = den * scale + 1.0
            num = num * scale + n
            shift = lt
        else:
            w = math.exp(lt - shift)
            den += w
            num += n * w
    if shift == NEG_INF:
        raise ValueError("sequence has empty support")
    return num / den


def edelman_kostlan(seq: CoefficientSequence, r: float) -> float:
    """Expected zero count of the Gaussian series in |z| <= r.

    Evaluated through the covariance kernel K(r) = sum a_n^2 r^{2n} as
    (r/2) K'(r)/K(r); agrees with :func:`s_log_deriv` to 1e-12 relative
    (the two are the same sum arranged differently).
    """
    if r <= 0:
        raise ValueError("r must be positive")
    log_r = math.log(r)
    log_K = log_sigma2(seq, r)
    # K'(r) = sum 2 n a_n^2 r^{2n-1}; accumulate log-domain with max shift.
    shift = NEG_INF
    acc = 0.0
    for n, t in _support_terms(seq, log_r):
        if n == 0 or t == NEG_INF:
            continue
        lt = 2.0 * t - log_r + math.log(2.0 * n)
        if lt > shift:
            acc = acc * math.exp(shift - lt) + 1.0 if shift > NEG_INF else 1.0
            shift = lt
        else:
            acc += math.exp(lt - shift)
    if shift == NEG_INF:
        return 0.0
    log_Kp = shift + math.log(acc)
    return 0.5 * r * math.exp(log_Kp - log_K)


def b_n(seq: CoefficientSequence, n: int, r: float) -> float:
    """Per-index log size b_n(r) = (1/n) log a_n + log r; -inf iff a_n = 0."""
    if n < 1:
        raise InvalidIndex("b_n is defined for n >= 1 (a_0 handled separately)")
    if r <= 0:
        raise ValueError("r must be positive")
    la = seq.log_a(n)
    if la == NEG_INF:
        return NEG_INF
    return la / n + math.log(r)


def _dominant_walk(seq: CoefficientSequence, log_r: float, delta: float = 0.0):
    """Indices with b_n >= -delta (n=0 included iff log a_0 >= 0).

    Membership uses the b_n form so that N_delta(seq, r, 0) coincides exactly
    with the N set of the growth profile.
    """
    out = []
    n = seq.first_support()
    misses = 0
    last_val = math.inf
    while n != -1:
        if n > _DEGREE_CAP:
            raise NonEntireSequence(
                f"dominant set unbounded by index {n} for {seq.describe()}"
            )
        la = seq.log_a(n)
        if n == 0:
            val = math.inf if la >= 0.0 else NEG_INF
            if la >= 0.0:
                out.append(0)
        else:
            val = la / n + log_r
            if val >= -delta:
                out.append(n)
                misses = 0
            else:
                misses = misses + 1 if val <= last_val else 1
                if misses >= 8:
                    break
        if n > 0:
            last_val = val
        n = seq.support_after(n)
    return out


def growth_profile(
    seq: CoefficientSequence, r: float, eta: float = DEFAULT_ETA
) -> GrowthProfile:
    """All Part-III style growth quantities at radius r.

    S(r) = 2 sum_{n in N(r)} log(a_n r^n), m(r) = 4 sum_{n in N(r)} n,
    delta(r) = m(r)^{-eta} (1.0 by convention when m = 0).
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if not 0.0 < eta <= 0.25:
        raise ValueError("eta must lie in (0, 1/4]")
    log_r = math.log(r)
    N_set = _dominant_walk(seq, log_r)
    S = 0.0
    m_weight = 0
    for n in N_set:
        S += 2.0 * (seq.log_a(n) + n * log_r)
        m_weight += 4 * n
    S = max(S, 0.0)
    delta = m_weight ** (-eta) if m_weight > 0 else 1.0
    return GrowthProfile(
        r=r,
        sigma=sigma(seq, r),
        s=s_log_deriv(seq, r),
        S=S,
        n_count=len(N_set),
        m_weight=m_weight,
        delta=delta,
        N_set=tuple(N_set),
    )


def N_delta_set(seq: CoefficientSequence, r: float, delta: float) -> list:
    """N_delta(r) = {n : b_n(r) >= -delta} (plus 0 when a_0 >= 1).

    Negative delta is allowed; N_{-d}(r) equals the dominant set at re^{-d}.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    return list(_dominant_walk(seq, math.log(r), delta))


@dataclass(frozen=True)
class SBoundsReport:
    lower_ok: bool
    growth_ok: bool
    scaling_gap: float
    below_threshold: bool


def S_bounds_check(
    seq: CoefficientSequence, r: float, d: float = 2.0, eta: float = DEFAULT_ETA
) -> SBoundsReport:
    """Numeric check of the three S(r) inequalities at one radius.

    * lower_ok:    S(r) >= (1/8) m(r)^{1-eta}
    * growth_ok:   S((1-gamma) r) >= S(r) - gamma m(r) at gamma = 1/m(r)
    * scaling_gap: |S(r) - S_d(r)| / sqrt(m(r)) for coefficients scaled by d,
      reported rather than bounded (the comparison constant is free).

    The lower bound is asymptotic; at radii too small for it we flag
    ``below_threshold`` instead of failing.
    """
    gp = growth_profile(seq, r, eta=eta)
    if gp.n_count < 2:
        raise TooFewDominantTerms(f"n(r) = {gp.n_count} < 2 at r = {r}")
    m = gp.m_weight
    lower_ok = gp.S >= (m ** (1.0 - eta)) / 8.0
    gamma = 1.0 / m
    S_shrunk = growth_profile(seq, (1.0 - gamma) * r, eta=eta).S
    growth_ok = S_shrunk >= gp.S - gamma * m - 1e-12
    log_r = math.log(r)
    log_d = math.log(d)
    S_scaled = 0.0
    for n, t in _support_terms(seq, log_r):
        term = log_d + t
        if term > 0.0:
            S_scaled += 2.0 * term
    scaling_gap = abs(gp.S - S_scaled) / math.sqrt(m)
    return SBoundsReport(
        lower_ok=lower_ok,
        growth_ok=growth_ok,
        scaling_gap=scaling_gap,
        below_threshold=not lower_ok,
    )


def hayman_window(
    seq: CoefficientSequence, r: float, eta: float = DEFAULT_ETA
) -> bool:
    """True when m varies slowly through r: m(re^{-d}) > (1-eta) m(r) and
    m(re^{d}) < (1+eta) m(r) with d = m(r)^{-eta}.

    This is the operational proxy for membership outside the exceptional set;
    when m(r) = 0 both inequalities are treated as satisfied.
    """
    gp = growth_profile(seq, r, eta=eta)
    m = gp.m_weight
    if m == 0:
        return True
    d = gp.delta
    m_lo = growth_profile(seq, r * math.exp(-d), eta=eta).m_weight
    m_hi = growth_profile(seq, r * math.exp(d), eta=eta).m_weight
    return m_lo > (1.0 - eta) * m and m_hi < (1.0 + eta) * m
