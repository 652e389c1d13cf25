"""Random ensembles, certified truncation, and realization of series samples.

A :class:`SeriesSample` holds one realization of f(z) = sum xi_n a_n z^n,
truncated at a degree whose tail is certified below a requested tolerance on
the working disk |z| <= r_max.  Coefficients are stored radius-scaled,
c~_n = xi_n a_n r_max^n, so that extreme families (lacunary blocks, e^{-n^2}
laws) stay inside float64 range; evaluation maps z to z / r_max.

Random factors come from counter-based substreams keyed by (seed, trial, n):
a coefficient depends only on those integers, never on evaluation order,
truncation degree, or thread count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import _philox
from .errors import (
    OutOfCertifiedDisk,
    TruncationFailure,
    UnsupportedEnsemble,
)
from .growth import (
    NEG_INF,
    CoefficientSequence,
    growth_profile,
    log_sigma2,
    _support_terms,
)

_DEGREE_CAP = 10 ** 6

ENSEMBLE_KINDS = ("gaussian", "rademacher", "steinhaus", "fixed")

# per-ensemble one-block draw memo (performance only; values unchanged)
_draw_cache: dict = {}


@dataclass(frozen=True)
class EnsembleSpec:
    """Which i.i.d. factors multiply the magnitudes, plus the master seed.

    kinds: 'gaussian' (standard complex, density e^{-|z|^2}/pi),
    'rademacher' (+-1), 'steinhaus' (unimodular), 'fixed' (given sign list,
    repeated +1 beyond its length).
    """

    kind: str
    seed: int
    signs: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")
        if self.kind == "fixed":
            if self.signs is None:
                raise ValueError("fixed ensemble needs a sign list")
            if any(s not in (-1, 1) for s in self.signs):
                raise ValueError("fixed signs must be +-1")

    def draw(self, trial: int, indices: np.ndarray) -> np.ndarray:
        """xi factors for one trial; depends only on (seed, trial, index).

        Dense index ranges are served from a one-block memo (1024 trials at
        a time) so Monte Carlo loops avoid per-trial generator overhead; the
        values are identical to direct per-index draws.
        """
        indices = np.asarray(indices, dtype=np.uint64)
        dim = len(indices)
        if (
            self.kind in ("gaussian", "rademacher", "steinhaus")
            and dim
            and np.array_equal(indices, np.arange(dim, dtype=np.uint64))
        ):
            block = 1024
            b0 = (trial // block) * block
            key = (b0, dim)
            entry = _draw_cache.get(self)
            if entry is None or entry[0] != key:
                entry = (key, self._draw_matrix(b0, block, dim))
                _draw_cache[self] = entry
            return entry[1][trial - b0].copy()
        return self._draw_direct(trial, indices)

    def _draw_direct(self, trial, indices):
        if self.kind == "gaussian":
            return _philox.gaussian_coeffs(self.seed, trial, indices)
        if self.kind == "rademacher":
            return _philox.rademacher_coeffs(self.seed, trial, indices)
        if self.kind == "steinhaus":
            return _philox.steinhaus_coeffs(self.seed, trial, indices)
        signs = np.ones(len(indices), dtype=np.complex128)
        for j, n in enumerate(indices):
            if int(n) < len(self.signs):
                signs[j] = self.signs[int(n)]
        return signs

    def _draw_matrix(self, trial0, count, dim):
        t_idx, n_idx = np.meshgrid(
            np.arange(trial0, trial0 + count, dtype=np.uint64),
            np.arange(dim, dtype=np.uint64),
            indexing="ij",
        )
        w0, w1, _, _ = _philox._blocks(self.seed, _philox.DOMAIN_COEFF,
                                       t_idx, n_idx)
        if self.kind == "gaussian":
            radius = np.sqrt(-np.log1p(-_philox._uniform01(w0)))
            return radius * np.exp(2j * np.pi * _philox._uniform01(w1))
        if self.kind == "rademacher":
            s = 1.0 - 2.0 * (w0 >> np.uint64(63)).astype(np.float64)
            return s.astype(np.complex128)
        return np.exp(2j * np.pi * _philox._uniform01(w0))


@dataclass(frozen=True)
class SeriesSample:
    """One truncated realization with a tail certificate.

    ``scaled_coeffs[n]`` is xi_n a_n r_scale^n for n = 0..degree, where
    r_scale is the certified working radius.  ``tail_log_bound`` bounds
    log sum_{n>degree} A_n a_n r_scale^n with A_n the per-ensemble envelope
    (1 for unimodular factors, e^{delta n / 2} for Gaussian ones).
    """

    seq: CoefficientSequence
    ensemble: EnsembleSpec
    trial: int
    degree: int
    r_scale: float
    scaled_coeffs: np.ndarray
    tail_log_bound: float
    tail_tol: float

    @property
    def coeffs(self) -> np.ndarray:
        """Unscaled c_n = xi_n a_n (may underflow for extreme families)."""
        n = np.arange(self.degree + 1)
        with np.errstate(under="ignore"):
            return self.scaled_coeffs * np.exp(-n * math.log(self.r_scale)) \
                if self.r_scale != 1.0 else self.scaled_coeffs.copy()

    def tail_at(self, r: float) -> float:
        """Certified tail bound transported to |z| <= r <= r_scale."""
        if r > self.r_scale * (1 + 1e-12):
            raise OutOfCertifiedDisk(f"r = {r} exceeds certified {self.r_scale}")
        return self.tail_log_bound

    def to_json(self) -> str:
        payload = {
            "seq": self.seq.describe(),
            "ensemble": self.ensemble.kind,
            "seed": int(self.ensemble.seed),
            "trial": int(self.trial),
            "degree": int(self.degree),
            "r_scale": self.r_scale,
            "tail_log_bound": self.tail_log_bound,
            "tail_tol": self.tail_tol,
            "scaled_coeffs": [[z.real, z.imag] for z in self.scaled_coeffs],
        }
        return json.dumps(payload, indent=1)


def _gaussian_envelope_rate(seq: CoefficientSequence, r_max: float) -> float:
    """delta/2 with delta = m(r_max)^{-1/4}; envelope |xi_n| <= e^{delta n/2}."""
    gp = growth_profile(seq, r_max)
    return 0.5 * gp.delta


@lru_cache(maxsize=4096)
def _truncation_plan(seq, ensemble_kind, r_max, tail_tol, degree_cap):
    """Trial-independent part of sampling: certified degree, tail bound, and
    the scaled magnitude vector a_n r_max^n."""
    log_r = math.log(r_max)
    rate = _gaussian_envelope_rate(seq, r_max) if ensemble_kind == "gaussian" \
        else 0.0
    deg, tail = _certified_degree(seq, log_r, rate, tail_tol, degree_cap)
    log_terms = np.array(
        [seq.log_a(n) + n * log_r for n in range(deg + 1)], dtype=np.float64
    )
    with np.errstate(under="ignore"):
        mags = np.exp(log_terms)
    mags[log_terms == NEG_INF] = 0.0
    mags.flags.writeable = False
    return deg, tail, mags


def _certified_degree(seq, log_r, rate, tail_tol, degree_cap):
    """Minimal degree D with certified log-tail <= log(tail_tol).

    Walks the support collecting envelope log-terms; the remainder beyond the
    walk is closed with a geometric bound once past the argmax and the
    per-step log-ratio is strictly negative (all built-in families have
    eventually concave log-terms along their support, so later ratios only
    shrink).  Returns (degree, tail_log_bound).
    """
    log_tol = math.log(tail_tol)
    idx = []
    terms = []
    n = seq.first_support()
    best = NEG_INF
    best_n = 0
    closure = NEG_INF
    finite = seq.finite_degree is not None
    while n != -1:
        if n > degree_cap:
            raise TruncationFailure(
                f"tail tolerance {tail_tol} unreachable below degree {degree_cap}"
            )
        t = seq.log_a(n) + n * (log_r + rate)
        idx.append(n)
        terms.append(t)
        if t > best:
            best = t
            best_n = n
        else:
            prev = terms[-2] if len(terms) >= 2 else math.inf
            step = t - prev
            if (
                n > best_n
                and step <= -1e-3
                and t <= log_tol - 40.0 * math.log(2.0)
            ):
                # remaining tail <= t_next / (1 - q) with q = e^step < 1
                closure = t + step - math.log1p(-math.exp(step))
                break
        n = seq.support_after(n)
    if n == -1 and not finite:
        closure = NEG_INF
    # suffix log-sums: tail(D) = logsum(terms with index > D) + closure
    suffix = [closure]
    for t in reversed(terms):
        a, b = suffix[-1], t
        hi, lo = (a, b) if a >= b else (b, a)
        suffix.append(hi + math.log1p(math.exp(lo - hi)) if lo > NEG_INF else hi)
    # small additive guard absorbs accumulation rounding in the certificate
    suffix = [s + 1e-9 if s > NEG_INF else s for s in suffix]
    suffix.reverse()  # suffix[j] = log tail including terms[j:]
    degree = idx[-1]
    tail = closure
    for j in range(len(idx)):
        if suffix[j + 1] <= log_tol:
            degree = idx[j]
            tail = suffix[j + 1]
            break
    else:
        raise TruncationFailure(
            f"tail tolerance {tail_tol} unreachable on materialized range"
        )
    return degree, tail


def _tail_bound_beyond(seq, degree, log_r, rate, degree_cap):
    """Certified upper bound on log sum of envelope terms past ``degree``,
    using the same walk-plus-geometric-closure scheme as the planner."""
    acc = NEG_INF
    prev = math.inf
    best = NEG_INF
    best_n = -1
    n = seq.first_support()
    while n != -1 and n <= degree_cap:
        t = seq.log_a(n) + n * (log_r + rate)
        if n > degree and t > NEG_INF:
            hi, lo = (acc, t) if acc >= t else (t, acc)
            acc = hi + math.log1p(math.exp(lo - hi)) if lo > NEG_INF else hi
            step = t - prev
            if t > best:
                best, best_n = t, n
            elif n > best_n and step <= -1e-3 and \
                    t <= max(best, 0.0) - 46.0:
                closure = t + step - math.log1p(-math.exp(step))
                hi, lo = (acc, closure) if acc >= closure else (closure, acc)
                # small additive guard absorbs accumulation rounding
                return hi + math.log1p(math.exp(lo - hi)) + 1e-9
            prev = t
        n = seq.support_after(n)
    if n != -1:
        raise TruncationFailure(
            f"tail beyond degree {degree} not certifiable below the cap"
        )
    return acc + 1e-9 if acc > NEG_INF else acc


def sample(
    seq: CoefficientSequence,
    ensemble: EnsembleSpec,
    r_max: float,
    tail_tol: float,
    trial: int = 0,
    degree: Optional[int] = None,
    degree_cap: int = _DEGREE_CAP,
) -> SeriesSample:
    """Draw one realization certified on |z| <= r_max.

    The truncation degree is minimal such that the per-ensemble envelope tail
    bound is below tail_tol; pass ``degree`` to override it for explicit
    small-degree work (the certificate is then whatever that degree gives).
    """
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    if tail_tol <= 0:
        raise ValueError("tail_tol must be positive")
    log_r = math.log(r_max)
    if degree is None:
        deg, tail, mags = _truncation_plan(
            seq, ensemble.kind, float(r_max), float(tail_tol), degree_cap
        )
    else:
        rate = _gaussian_envelope_rate(seq, r_max) \
            if ensemble.kind == "gaussian" else 0.0
        deg = int(degree)
        tail = _tail_bound_beyond(seq, deg, log_r, rate, degree_cap)
        log_terms = np.array(
            [seq.log_a(n) + n * log_r for n in range(deg + 1)], dtype=np.float64
        )
        with np.errstate(under="ignore"):
            mags = np.exp(log_terms)
        mags[log_terms == NEG_INF] = 0.0
    ns = np.arange(deg + 1, dtype=np.uint64)
    xi = ensemble.draw(trial, ns)
    scaled = xi * mags
    return SeriesSample(
        seq=seq,
        ensemble=ensemble,
        trial=trial,
        degree=deg,
        r_scale=r_max,
        scaled_coeffs=scaled,
        tail_log_bound=tail,
        tail_tol=tail_tol,
    )


def evaluate(smpl: SeriesSample, z):
    """Horner evaluation of the truncated series at z (|z| <= r_max)."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(z) > smpl.r_scale * (1 + 1e-12)):
        raise OutOfCertifiedDisk("evaluation outside the certified disk")
    zz = z / smpl.r_scale
    c = smpl.scaled_coeffs
    p = np.full(zz.shape, c[-1], dtype=np.complex128)
    for k in range(smpl.degree - 1, -1, -1):
        p = p * zz + c[k]
    return p if p.shape else complex(p)


class SigmaHatEvaluator:
    """theta -> f(r e^{2 pi i theta}) / sigma(r), with an L2 quadrature probe."""

    def __init__(self, smpl: SeriesSample, r: float):
        if r > smpl.r_scale * (1 + 1e-12):
            raise OutOfCertifiedDisk(f"r = {r} beyond certified {smpl.r_scale}")
        self.sample = smpl
        self.r = r
        self.log_sigma = 0.5 * log_sigma2(smpl.seq, r)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        z = self.r * np.exp(2j * np.pi * theta)
        return evaluate(self.sample, z) * math.exp(-self.log_sigma)

    def l2_quadrature(self, n_nodes: Optional[int] = None) -> float:
        """int_0^1 |f hat|^2 d theta; the grid is exact once it resolves
        frequencies up to twice the degree."""
        if n_nodes is None:
            n_nodes = 2 * self.sample.degree + 2
        theta = np.arange(n_nodes) / n_nodes
        vals = self(theta)
        return float(np.mean(np.abs(vals) ** 2))


def sigma_hat_normalize(smpl: SeriesSample, r: float) -> SigmaHatEvaluator:
    """Normalized circle restriction; E int |f hat|^2 = 1 by construction."""
    return SigmaHatEvaluator(smpl, r)


# ---------------------------------------------------------------------------
# The envelope event Omega_r = (i) & (ii) & (iii) & (iv)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OmegaEvents:
    """Index groups and thresholds of the four envelope events at radius r.

    (i)   |xi_0| >= C m^{1/4}
    (ii)  |xi_n| <= (a_n r^n)^{-1} / sqrt(m)   for n in N(r) \\ {0}
    (iii) |xi_n| <= 1 / sqrt(m)                 for n in Ntilde \\ N(r)
    (iv)  |xi_n| <= e^{delta n / 2}             for support n outside Ntilde

    with Ntilde = N_delta(r) union {n < sqrt(m)} and delta = m^{-1/4}.
    """

    r: float
    C: float
    m: int
    delta: float
    S: float
    set_ii: tuple
    thresholds_ii: tuple
    set_iii: tuple
    log_sigma_terms_ii: tuple = field(default=(), repr=False)


def omega_events(seq: CoefficientSequence, r: float, C: Optional[float] = None):
    """Build the event description; C defaults to C1 + C2 + 4 where C1, C2
    are the explicit sums bounding the (ii) and (iii) blocks of the series."""
    gp = growth_profile(seq, r)
    m = gp.m_weight
    delta = gp.delta
    N = set(gp.N_set)
    from .growth import N_delta_set as _nds

    ndelta = set(_nds(seq, r, delta))
    if m > 0:
        cap = int(math.isqrt(m - 1)) + 1  # indices n < sqrt(m)
        ntilde = ndelta | set(range(cap))
    else:
        ntilde = ndelta
    set_ii = tuple(sorted(N - {0}))
    set_iii = tuple(
        sorted(n for n in ntilde - N if seq.log_a(n) > NEG_INF or n == 0)
    )
    sqrt_m = math.sqrt(m) if m > 0 else 1.0
    if C is None:
        C1 = len(set_ii) / sqrt_m if m > 0 else 0.0
        C2 = len(set_iii) / sqrt_m if m > 0 else 0.0
        C = C1 + C2 + 4.0
    log_r = math.log(r)
    thresholds_ii = tuple(
        math.exp(-(seq.log_a(n) + n * log_r)) / sqrt_m for n in set_ii
    )
    return OmegaEvents(
        r=r, C=C, m=m, delta=delta, S=gp.S,
        set_ii=set_ii, thresholds_ii=thresholds_ii, set_iii=set_iii,
    )


def omega_event_holds(smpl: SeriesSample, r: float, events: Optional[OmegaEvents] = None):
    """Check events (i)-(iv) on the sampled factors at radius r.

    Event (iv) ranges over support indices up to the truncation degree (the
    clamp is unavoidable for a finite sample and is reported by the caller).
    Returns (holds, details dict).
    """
    ev = events if events is not None else omega_events(smpl.seq, r)
    seq = smpl.seq
    log_scale = math.log(smpl.r_scale)
    scaled = smpl.scaled_coeffs

    def xi_abs(n):
        la = seq.log_a(n)
        if la == NEG_INF:
            return 0.0
        return abs(scaled[n]) * math.exp(-(la + n * log_scale))

    m = ev.m
    ok_i = xi_abs(0) >= ev.C * (m ** 0.25 if m > 0 else 0.0)
    sqrt_m = math.sqrt(m) if m > 0 else 1.0
    ok_ii = all(
        xi_abs(n) <= thr for n, thr in zip(ev.set_ii, ev.thresholds_ii)
    )
    ok_iii = all(xi_abs(n) <= 1.0 / sqrt_m for n in ev.set_iii if n <= smpl.degree)
    excluded = set(ev.set_ii) | set(ev.set_iii) | {0}
    ok_iv = True
    for n in range(1, smpl.degree + 1):
        if n in excluded or seq.log_a(n) == NEG_INF:
            continue
        if xi_abs(n) > math.exp(0.5 * ev.delta * n):
            ok_iv = False
            break
    holds = ok_i and ok_ii and ok_iii and ok_iv
    return holds, {
        "i": ok_i, "ii": ok_ii, "iii": ok_iii, "iv": ok_iv,
        "clamped_at_degree": smpl.degree,
    }


@dataclass(frozen=True)
class EnvelopeProbabilityReport:
    r: float
    C: float
    S: float
    m: int
    log_p_i: float
    log_p_ii: float
    log_p_iii: float
    log_p_iv_lower: float
    total_lower: float
    c_prime: float
    bound_ok: bool
    clamp_note: str


def envelope_event_probability(
    seq: CoefficientSequence,
    r: float,
    ensemble_kind: str = "gaussian",
    C: Optional[float] = None,
) -> EnvelopeProbabilityReport:
    """Exact log-probabilities of the envelope events for Gaussian factors.

    P(|xi| >= t) = e^{-t^2} and P(|xi| <= t) = 1 - e^{-t^2} give closed forms
    for (i)-(iii); for (iv) the certified lower bound 1 - sum e^{-e^{delta n}}
    is used, floored at 1/4.  The total is compared against
    -S(r) - C' sqrt(m) log m with C' computed from the identity, not assumed.
    """
    if ensemble_kind != "gaussian":
        raise UnsupportedEnsemble("envelope probabilities need Gaussian factors")
    ev = omega_events(seq, r, C=C)
    m = ev.m
    log_p_i = -(ev.C ** 2) * math.sqrt(m) if m > 0 else 0.0
    log_p_ii = 0.0
    for thr in ev.thresholds_ii:
        log_p_ii += math.log1p(-math.exp(-(thr ** 2)))
    if ev.set_iii and m > 0:
        log_p_iii = len(ev.set_iii) * math.log1p(-math.exp(-1.0 / m))
    else:
        log_p_iii = 0.0
    # (iv): walk support outside Ntilde until the doubly-exponential terms die
    excluded = set(ev.set_ii) | set(ev.set_iii) | {0}
    Q = 0.0
    n = seq.first_support()
    steps = 0
    while n != -1 and steps < 10 ** 5:
        if n not in excluded:
            expo = ev.delta * n
            if expo > 50.0:
                break
            Q += math.exp(-math.exp(expo))
        n = seq.support_after(n)
        steps += 1
    clamp_note = ""
    if Q < 0.75:
        log_p_iv = math.log1p(-Q)
    else:
        log_p_iv = math.log(0.25)
        clamp_note = "event (iv) sum exceeded 3/4; floored at log(1/4)"
    total = log_p_i + log_p_ii + log_p_iii + log_p_iv
    if m > 1:
        c_prime = max(0.0, (-total - ev.S) / (math.sqrt(m) * math.log(m)))
    else:
        c_prime = 0.0
    bound_ok = total >= -ev.S - c_prime * (
        math.sqrt(m) * math.log(m) if m > 1 else 0.0
    ) - 1e-9
    return EnvelopeProbabilityReport(
        r=r, C=ev.C, S=ev.S, m=m,
        log_p_i=log_p_i, log_p_ii=log_p_ii, log_p_iii=log_p_iii,
        log_p_iv_lower=log_p_iv, total_lower=total,
        c_prime=c_prime, bound_ok=bound_ok, clamp_note=clamp_note,
    )
