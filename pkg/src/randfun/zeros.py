"""Zeros of a truncated series in disks and sectors.

Three mutually checking methods: simultaneous root iteration (Aberth) on the
truncated polynomial, contour quadrature of f'/f (argument principle), and
the Jensen circle average of log|f|.  Disk semantics are closed, |z| <= r;
roots within a relative 1e-9 annulus of the boundary are flagged and counted
as inside.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import (
    BoundaryRootUnresolved,
    NumericalFailure,
    RoucheMarginUnverifiable,
    ZeroAtOrigin,
)
from .sampling import SeriesSample

BOUNDARY_TOL = 1e-9
CLUSTER_TOL = 1e-7
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class ZeroSet:
    """Roots with multiplicities inside a closed disk.

    residual is the largest |p(root)| over the returned roots, normalized by
    max(1, max_n |c_n| r^n); boundary_flags lists roots within the relative
    boundary annulus (counted as inside).
    """

    radius: float
    roots: tuple  # of (complex position, int multiplicity)
    method: str
    residual: float
    boundary_flags: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def total_count(self) -> int:
        return sum(mult for _, mult in self.roots)

    def moduli(self) -> np.ndarray:
        out = []
        for z, mult in self.roots:
            out.extend([abs(z)] * mult)
        return np.array(sorted(out))


def _scaled_poly(smpl: SeriesSample):
    """Strip trailing zero coefficients; return (coeffs, origin multiplicity)."""
    c = np.asarray(smpl.scaled_coeffs, dtype=np.complex128)
    top = len(c) - 1
    while top > 0 and c[top] == 0:
        top -= 1
    c = c[: top + 1]
    nu = 0
    while nu < len(c) and c[nu] == 0:
        nu += 1
    if nu >= len(c):
        raise NumericalFailure("identically zero truncation")
    return c[nu:], nu


def _rouche_margin_check(c, radius_rel, tail_log_bound, n_nodes=None):
    """min log|p| on the circle must clear the certified tail with margin 4x."""
    if tail_log_bound == float("-inf"):
        return
    deg = len(c) - 1
    if n_nodes is None:
        n_nodes = max(512, 4 * deg)
    _, mn = _kernels.log_abs_stats(c, radius_rel, n_nodes)
    if mn <= tail_log_bound + math.log(4.0):
        raise RoucheMarginUnverifiable(
            f"min |truncation| on the circle (log {mn:.3g}) does not clear the "
            f"tail certificate (log {tail_log_bound:.3g}); resample with a "
            "smaller tail tolerance"
        )


def _cluster(roots: np.ndarray, scale: float):
    """Greedy clustering at CLUSTER_TOL * scale; returns [(center, mult)]."""
    order = np.argsort(roots.real, kind="stable")
    pts = roots[order]
    used = np.zeros(len(pts), dtype=bool)
    tol = CLUSTER_TOL * scale
    out = []
    for i in range(len(pts)):
        if used[i]:
            continue
        members = [pts[i]]
        used[i] = True
        for j in range(i + 1, len(pts)):
            if used[j]:
                continue
            if pts[j].real - pts[i].real > tol:
                break
            if abs(pts[j] - pts[i]) <= tol:
                members.append(pts[j])
                used[j] = True
        out.append((complex(np.mean(members)), len(members)))
    return out


def find_zeros_disk(smpl: SeriesSample, r: float) -> ZeroSet:
    """All zeros of the truncated series with |z| <= r, polished roots.

    Multiplicities come from clustering at relative 1e-7 (Gaussian samples
    have simple zeros almost surely; a multiple zero triggers a diagnostic
    warning).  Raises RoucheMarginUnverifiable when the tail certificate is
    too weak for the disk boundary, NumericalFailure when iteration diverges.
    """
    if r > smpl.r_scale * (1 + 1e-12):
        raise ValueError(f"r = {r} beyond certified radius {smpl.r_scale}")
    rel = r / smpl.r_scale
    c, nu = _scaled_poly(smpl)
    deg = len(c) - 1
    roots_out = []
    if nu > 0:
        roots_out.append((0.0 + 0.0j, nu))
    if deg == 0:
        tail = smpl.tail_at(r)
        if tail > float("-inf") and \
                math.log(abs(c[0])) <= tail + math.log(4.0):
            raise RoucheMarginUnverifiable(
                "constant truncation does not dominate the certified tail"
            )
    if deg >= 1:
        _rouche_margin_check(np.asarray(smpl.scaled_coeffs), rel,
                             smpl.tail_at(r))
        roots, niter, converged = _kernels.aberth_roots(c)
        if not converged:
            raise NumericalFailure(
                f"root iteration not converged after {niter} sweeps "
                f"(degree {deg})"
            )
        keep = roots[np.abs(roots) <= rel * (1 + BOUNDARY_TOL)]
        clustered = _cluster(keep, rel) if len(keep) else []
        roots_out.extend(
            (z * smpl.r_scale, mult) for z, mult in clustered
        )
    multiple = [z for z, mult in roots_out if mult > 1 and z != 0]
    if multiple and smpl.ensemble.kind == "gaussian":
        warnings.warn(
            "multiple zero detected in a Gaussian sample (a.s. simple); "
            "possible cluster-threshold artifact",
            stacklevel=2,
        )
    # residual on the scaled polynomial, normalized by the max scaled term
    residual = 0.0
    if deg >= 1 and roots_out:
        pts = np.array(
            [z / smpl.r_scale for z, _ in roots_out if z != 0],
            dtype=np.complex128,
        )
        if len(pts):
            vals = np.abs(_kernels.horner_many(c, pts))
            ns = np.arange(len(c))
            scale = max(1.0, float(np.max(np.abs(c) * rel ** ns)))
            residual = float(np.max(vals)) / scale
    boundary = tuple(
        z for z, _ in roots_out if abs(abs(z) - r) < BOUNDARY_TOL * r
    )
    return ZeroSet(
        radius=r,
        roots=tuple(roots_out),
        method="RootFinder",
        residual=residual,
        boundary_flags=boundary,
        diagnostics={"degree": deg, "origin_multiplicity": nu},
    )


def argument_principle_count(
    smpl: SeriesSample,
    r: float,
    max_nodes: int = 1 << 17,
    attempts: int = 5,
    precheck: bool = True,
) -> int:
    """Zero count in |z| <= r via adaptive trapezoid quadrature of f'/f.

    Node doubling stops only when the estimate is near an integer and two
    successive refinements agree (a single agreement can plateau while a
    near-boundary zero is still unresolved).  When a zero sits too close to
    the circle (detected through min |f| on the nodes), the radius is nudged
    by relative 1e-6 steps, up to ``attempts`` times, before giving up with
    BoundaryRootUnresolved.  Batch drivers that already place r inside a
    root-free gap pass ``precheck=False`` to skip the min-|f| scan.
    """
    if r > smpl.r_scale * (1 + 1e-12):
        raise ValueError(f"r = {r} beyond certified radius {smpl.r_scale}")
    c_full, nu = _scaled_poly(smpl)
    if len(c_full) == 1:
        return nu
    tail = smpl.tail_at(r)
    nudges = [0.0]
    for k in range(1, attempts):
        nudges.extend([k * 1e-6, -k * 1e-6])
    for nudge in nudges[:attempts]:
        rel = (r / smpl.r_scale) * (1.0 + nudge)
        if rel > 1 + 1e-12:
            continue
        if precheck:
            _, mn = _kernels.log_abs_stats(c_full, rel, 512)
            floor = max(tail + math.log(4.0), math.log(1e-13) +
                        _max_term_log(c_full, rel))
            if mn <= floor:
                continue
        value = None
        n_nodes = 256
        history = []
        while n_nodes <= max_nodes:
            est = _kernels.argp_mean(c_full, rel, n_nodes).real
            history.append(est)
            rounded = round(est)
            if (
                abs(est - rounded) < 0.1
                and len(history) >= 3
                and abs(history[-1] - history[-2]) < 0.05
                and abs(history[-2] - history[-3]) < 0.05
            ):
                value = int(rounded)
                break
            n_nodes *= 2
        if value is not None:
            return value + nu
    raise BoundaryRootUnresolved(
        f"no quadrature-stable circle near r = {r} after {attempts} attempts"
    )


def _max_term_log(c, rel):
    ns = np.arange(len(c))
    with np.errstate(divide="ignore"):
        logs = np.where(np.abs(c) > 0, np.log(np.abs(c) + 1e-300), -np.inf)
    return float(np.max(logs + ns * math.log(rel))) if rel > 0 else 0.0


def jensen_N(
    smpl: SeriesSample,
    r: float,
    tol: float = 1e-8,
    max_nodes: int = 1 << 17,
) -> float:
    """N_f(r) = circle average of log|f| minus log|f(0)| (Jensen's formula).

    Trapezoid with node doubling from 256 until the change drops below tol.
    Requires f(0) != 0; factor out z^nu first otherwise.
    """
    if r > smpl.r_scale * (1 + 1e-12):
        raise ValueError(f"r = {r} beyond certified radius {smpl.r_scale}")
    c, nu = _scaled_poly(smpl)
    if nu > 0:
        raise ZeroAtOrigin("f(0) = 0; factor the origin zero first")
    rel = r / smpl.r_scale
    log_f0 = math.log(abs(c[0]))
    if len(c) == 1:
        return 0.0
    n_nodes = 256
    prev, _ = _kernels.log_abs_stats(c, rel, n_nodes)
    while n_nodes < max_nodes:
        n_nodes *= 2
        cur, _ = _kernels.log_abs_stats(c, rel, n_nodes)
        if abs(cur - prev) < tol:
            return cur - log_f0
        prev = cur
    raise NumericalFailure(
        f"Jensen quadrature not converged at {max_nodes} nodes "
        "(zero too close to the circle?)"
    )


def jensen_from_roots(zs: ZeroSet) -> float:
    """Root-side Jensen sum: sum over roots of mult * log(r / |z|)."""
    total = 0.0
    for z, mult in zs.roots:
        if z == 0:
            raise ZeroAtOrigin("Jensen sum undefined with a zero at the origin")
        total += mult * math.log(zs.radius / abs(z))
    return total


def sector_count(zs: ZeroSet, alpha: float, beta: float) -> int:
    """Zeros with multiplicity in the half-open sector alpha <= arg z < beta."""
    if not 0 <= alpha < beta <= 2 * math.pi + 1e-15:
        raise ValueError("need 0 <= alpha < beta <= 2 pi")
    count = 0
    for z, mult in zs.roots:
        if z == 0:
            continue  # the origin has no argument; excluded by convention
        arg = math.atan2(z.imag, z.real) % (2 * math.pi)
        if alpha <= arg < beta:
            count += mult
    return count


def value_solutions(smpl: SeriesSample, r: float, b: complex) -> ZeroSet:
    """Solutions of f(z) = b in |z| <= r, as the zero set of f - b."""
    shifted = np.array(smpl.scaled_coeffs, dtype=np.complex128)
    shifted[0] -= b
    import dataclasses

    shifted_sample = dataclasses.replace(smpl, scaled_coeffs=shifted)
    zs = find_zeros_disk(shifted_sample, r)
    return ZeroSet(
        radius=zs.radius,
        roots=zs.roots,
        method=zs.method,
        residual=zs.residual,
        boundary_flags=zs.boundary_flags,
        diagnostics={**zs.diagnostics, "value": complex(b)},
    )


def integrated_sector_N(
    smpl: SeriesSample,
    r: float,
    alpha: float,
    beta: float,
    t_grid: int = 1 << 16,
) -> float:
    """N_F(r, alpha, beta) = integral over (0, r] of n(t, alpha, beta) dt/t.

    Midpoint quadrature on a log-spaced grid of ``t_grid`` nodes over the
    radial counting step function; over the full circle this matches
    jensen_N to about 1e-3.
    """
    c, nu = _scaled_poly(smpl)
    if nu > 0:
        raise ZeroAtOrigin("f(0) = 0; factor the origin zero first")
    zs = find_zeros_disk(smpl, r)
    mods = []
    for z, mult in zs.roots:
        arg = math.atan2(z.imag, z.real) % (2 * math.pi)
        if alpha <= arg < beta:
            mods.extend([abs(z)] * mult)
    if not mods:
        return 0.0
    mods = np.sort(np.array(mods))
    lo = math.log(mods[0]) - 1e-12
    hi = math.log(r)
    if hi <= lo:
        return 0.0
    u = np.linspace(lo, hi, t_grid + 1)
    mid = 0.5 * (u[:-1] + u[1:])
    counts = np.searchsorted(np.log(mods), mid, side="right")
    return float(np.sum(counts) * (u[1] - u[0]))


def all_roots(smpl: SeriesSample) -> np.ndarray:
    """All roots of the truncated polynomial (unfiltered), origin zeros
    included with their multiplicity."""
    c, nu = _scaled_poly(smpl)
    if len(c) == 1:
        return np.zeros(nu, dtype=np.complex128)
    roots, niter, converged = _kernels.aberth_roots(c)
    if not converged:
        raise NumericalFailure(
            f"root iteration not converged after {niter} sweeps"
        )
    return np.concatenate([np.zeros(nu, dtype=np.complex128),
                           roots * smpl.r_scale])


def resolve_radius(
    root_moduli: Sequence[float],
    r: float,
    r_cap: Optional[float] = None,
    margin: float = 5e-3,
    min_margin: float = 2e-4,
    fallback_window: Optional[float] = None,
) -> float:
    """A quadrature-feasible radius near r: inside the root-free modulus gap
    containing r when that gap is wide enough, else (with
    ``fallback_window``) the center of the widest gap within a relative
    window around r.  Never above r_cap.

    When the same gap is used, the closed disk |z| <= r_eff holds exactly
    the roots of |z| <= r.  The moduli must be sorted ascending and include
    all truncation roots.  Raises BoundaryRootUnresolved when no circle
    clears the roots by ``min_margin * r``.
    """
    mods = np.asarray(root_moduli, dtype=np.float64)
    cap = float(r_cap) if r_cap is not None else math.inf
    want = margin * r
    i = int(np.searchsorted(mods, r, side="right"))
    lo = float(mods[i - 1]) if i > 0 else 0.0
    hi = float(mods[i]) if i < len(mods) else math.inf
    if math.isfinite(hi):
        best = min(0.5 * (lo + hi), cap)
    else:
        best = min(max(r, lo + want), cap)
    clearance = min(best - lo, hi - best)
    if clearance >= min_margin * r:
        if clearance >= want:
            upper = min(hi - want if math.isfinite(hi) else math.inf, cap)
            return min(max(r, lo + want), upper)
        return best
    if fallback_window is None:
        raise BoundaryRootUnresolved(
            f"root-free gap around r = {r} too narrow ({lo}, {hi})"
        )
    for window in (fallback_window, 2 * fallback_window, 5 * fallback_window):
        w_lo, w_hi = r * (1 - window), min(r * (1 + window), cap)
        if w_hi <= w_lo:
            w_hi = cap
            w_lo = cap * (1 - 2 * window)
        walls = np.concatenate(
            [[0.0], mods[(mods > w_lo * 0.5) & (mods < w_hi * 2.0)],
             [math.inf]]
        )
        best_mid, best_clear = None, 0.0
        for a, b in zip(walls[:-1], walls[1:]):
            seg_lo, seg_hi = max(a, w_lo), min(b, w_hi)
            if seg_hi <= seg_lo:
                continue
            mid = 0.5 * (seg_lo + seg_hi) if math.isfinite(b) else seg_lo + \
                min(want, 0.5 * (seg_hi - seg_lo))
            mid = min(max(mid, seg_lo), seg_hi)
            clear = min(mid - a, b - mid)
            if clear > best_clear:
                best_clear, best_mid = clear, mid
        if best_mid is not None and best_clear >= min_margin * r:
            return float(best_mid)
    raise BoundaryRootUnresolved(
        f"no quadrature-feasible circle within {fallback_window:.0%} of {r}"
    )
