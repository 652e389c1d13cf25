"""Root finding, argument principle, and Jensen functionals, cross-checked."""

import dataclasses
import math

import numpy as np
import pytest

import randfun as rf
from randfun.errors import (
    BoundaryRootUnresolved,
    RoucheMarginUnverifiable,
    ZeroAtOrigin,
)
from randfun.zeros import all_roots, jensen_from_roots, resolve_radius

GEF = rf.CoefficientSequence.gef()


def fixed_sample(values, signs=None, r_max=2.0):
    seq = rf.CoefficientSequence.explicit([abs(v) for v in values])
    if signs is None:
        signs = tuple(1 if v >= 0 else -1 for v in values)
    ens = rf.EnsembleSpec("fixed", seed=0, signs=signs)
    return rf.sample(seq, ens, r_max=r_max, tail_tol=1e-12)


class TestFindZeros:
    def test_cube_roots_of_unity(self):
        s = fixed_sample([1, 0, 0, 1], signs=(-1, 1, 1, 1))
        zs = rf.find_zeros_disk(s, 2.0)
        assert zs.total_count == 3
        got = sorted((round(z.real, 9), round(z.imag, 9)) for z, _ in zs.roots)
        expect = sorted(
            (round(math.cos(2 * math.pi * k / 3), 9),
             round(math.sin(2 * math.pi * k / 3), 9))
            for k in range(3)
        )
        assert got == expect
        assert zs.residual <= 1e-8

    def test_double_root(self):
        s = fixed_sample([1, 2, 1], signs=(1, -1, 1))
        zs = rf.find_zeros_disk(s, 2.0)
        assert zs.total_count == 2
        assert len(zs.roots) == 1
        z, mult = zs.roots[0]
        assert mult == 2
        assert z == pytest.approx(1.0, abs=1e-6)

    def test_origin_zero_multiplicity(self):
        s = fixed_sample([0, 0, 1, 1])
        zs = rf.find_zeros_disk(s, 1.5)
        assert (0j, 2) in zs.roots
        assert zs.total_count == 3  # z^2 (z + 1)

    def test_gef_mean_count_matches_expected(self):
        # E n(2) = 4 by the expected-zero-count formula with K = e^{r^2}
        ens = rf.EnsembleSpec("gaussian", seed=55)
        counts = []
        for t in range(500):
            s = rf.sample(GEF, ens, r_max=2.0, tail_tol=1e-9, trial=t)
            counts.append(rf.find_zeros_disk(s, 2.0).total_count)
        counts = np.array(counts, dtype=float)
        se = counts.std(ddof=1) / math.sqrt(len(counts))
        assert abs(counts.mean() - 4.0) <= 3 * se

    def test_residual_tolerance_invariant(self):
        ens = rf.EnsembleSpec("gaussian", seed=9)
        for t in range(50):
            s = rf.sample(GEF, ens, r_max=2.0, tail_tol=1e-9, trial=t)
            assert rf.find_zeros_disk(s, 2.0).residual <= 1e-8

    def test_rouche_margin_guard(self):
        # an artificially inflated tail certificate must be rejected: the
        # minimum of |p| on the circle no longer dominates the tail
        s = fixed_sample([1, 1], r_max=1.0)  # p = 1 + z, zero at a node angle
        bad = dataclasses.replace(s, tail_log_bound=math.log(10.0))
        with pytest.raises(RoucheMarginUnverifiable):
            rf.find_zeros_disk(bad, 1.0)
        # degree-0 truncations are guarded too
        s0 = fixed_sample([1e-30], r_max=1.0)
        bad0 = dataclasses.replace(s0, tail_log_bound=math.log(1e-25))
        with pytest.raises(RoucheMarginUnverifiable):
            rf.find_zeros_disk(bad0, 1.0)


class TestRotationScaling:
    def test_rotation_equivariance(self):
        ens = rf.EnsembleSpec("gaussian", seed=13)
        s = rf.sample(GEF, ens, r_max=2.0, tail_tol=1e-10, trial=1)
        phi = 0.7234
        phases = np.exp(1j * phi * np.arange(s.degree + 1))
        rotated = dataclasses.replace(s, scaled_coeffs=s.scaled_coeffs * phases)
        base = sorted(all_roots(s), key=lambda z: (abs(z), np.angle(z)))
        rot = sorted(all_roots(rotated) * np.exp(1j * phi),
                     key=lambda z: (abs(z), np.angle(z)))
        disp = max(abs(a - b) for a, b in zip(base, rot))
        assert disp < 1e-9 * 2.0

    def test_scaling_maps_roots_exactly(self):
        ens = rf.EnsembleSpec("gaussian", seed=14)
        s = rf.sample(GEF, ens, r_max=2.0, tail_tol=1e-10, trial=2)
        t = 1.3
        powers = t ** np.arange(s.degree + 1)
        scaled = dataclasses.replace(s, scaled_coeffs=s.scaled_coeffs * powers)
        base = np.sort(np.abs(all_roots(s)))
        new = np.sort(np.abs(all_roots(scaled))) * t
        np.testing.assert_allclose(new, base, rtol=1e-10)


class TestArgumentPrinciple:
    def test_pure_power(self):
        s = fixed_sample([0, 0, 0, 1], r_max=1.0)
        assert rf.argument_principle_count(s, 1.0) == 3

    def test_double_root_counted_twice(self):
        s = fixed_sample([1, 2, 1], signs=(1, -1, 1))
        assert rf.argument_principle_count(s, 2.0) == 2

    def test_three_way_agreement_on_random_samples(self):
        # count agreement on 10^4 seeded samples at r in {1, 2}; the Jensen
        # identity is spot-checked on a 1-in-20 subsample at 1e-6 (the slow
        # fallback backend runs a reduced 10^3 sweep)
        from randfun import _kernels

        trials = 10**4 if _kernels.HAVE_NUMBA else 10**3
        ens = rf.EnsembleSpec("gaussian", seed=99)
        for t in range(trials):
            for r in (1.0, 2.0):
                s = rf.sample(GEF, ens, r_max=r, tail_tol=1e-9, trial=t)
                mods = np.sort(np.abs(all_roots(s)))
                r_eff = resolve_radius(mods, r, r_cap=r,
                                       fallback_window=0.02)
                n_root = int(np.sum(mods <= r_eff))
                assert rf.argument_principle_count(
                    s, r_eff, precheck=False
                ) == n_root
                if t % 20 == 0:
                    zs = rf.find_zeros_disk(s, r_eff)
                    gap = abs(rf.jensen_N(s, r_eff) - jensen_from_roots(zs))
                    assert gap < 1e-6

    def test_boundary_root_unresolved(self):
        # root exactly on the circle, plus a cluster blocking every nudge
        s = fixed_sample([1, 1], signs=(-1, 1), r_max=2.0)  # root at z = 1
        with pytest.raises(BoundaryRootUnresolved):
            rf.argument_principle_count(s, 1.0, max_nodes=512)


class TestJensen:
    def test_linear_factor(self):
        # f = z - 0.5 at r = 1: N = -log 0.5 = log 2
        s = fixed_sample([0.5, 1], signs=(-1, 1), r_max=1.0)
        assert rf.jensen_N(s, 1.0) == pytest.approx(math.log(2), abs=1e-8)

    def test_constant_function(self):
        s = fixed_sample([1], r_max=3.0)
        assert rf.jensen_N(s, 3.0) == 0.0

    def test_zero_at_origin_rejected(self):
        s = fixed_sample([0, 1], r_max=1.0)
        with pytest.raises(ZeroAtOrigin):
            rf.jensen_N(s, 1.0)

    def test_matches_root_sum_on_gef_samples(self):
        ens = rf.EnsembleSpec("gaussian", seed=3)
        checked = 0
        for t in range(50):
            s = rf.sample(GEF, ens, r_max=2.0, tail_tol=1e-10, trial=t)
            mods = np.sort(np.abs(all_roots(s)))
            r_eff = resolve_radius(mods, 2.0, r_cap=2.0)
            zs = rf.find_zeros_disk(s, r_eff)
            quad = rf.jensen_N(s, r_eff)
            assert abs(quad - jensen_from_roots(zs)) < 1e-6
            checked += 1
        assert checked == 50


class TestSectors:
    def test_empty_zero_set(self):
        zs = rf.ZeroSet(radius=1.0, roots=(), method="RootFinder", residual=0.0)
        assert rf.sector_count(zs, 0.0, math.pi) == 0

    def test_fourth_roots_of_unity_half_open(self):
        s = fixed_sample([1, 0, 0, 0, 1], signs=(-1, 1, 1, 1, 1))
        zs = rf.find_zeros_disk(s, 2.0)
        # roots at arg 0, pi/2, pi, 3pi/2; [0, pi) catches 0 and pi/2
        assert rf.sector_count(zs, 0.0, math.pi) == 2
        # the partition sums to the total count
        k = 4
        parts = [
            rf.sector_count(zs, 2 * math.pi * j / k, 2 * math.pi * (j + 1) / k)
            for j in range(k)
        ]
        assert sum(parts) == zs.total_count

    def test_rotation_moves_sector_counts(self):
        s = fixed_sample([1, 0, 0, 0, 1], signs=(-1, 1, 1, 1, 1))
        zs = rf.find_zeros_disk(s, 2.0)
        eps = 1e-3
        assert rf.sector_count(zs, eps, math.pi + eps) == 2


class TestValueSolutions:
    def test_identity_map(self):
        s = fixed_sample([0, 1], r_max=1.0)  # f = z
        zs = rf.value_solutions(s, 1.0, 0.3)
        assert zs.total_count == 1
        assert zs.roots[0][0] == pytest.approx(0.3, abs=1e-12)

    def test_constant_misses_zero(self):
        s = fixed_sample([1], r_max=1.0)
        assert rf.value_solutions(s, 1.0, 0.0).total_count == 0

    def test_value_shift_is_constant_coefficient(self):
        ens = rf.EnsembleSpec("gaussian", seed=12)
        s = rf.sample(GEF, ens, r_max=1.0, tail_tol=1e-10, trial=0)
        b = 0.7 - 0.2j
        zs = rf.value_solutions(s, 1.0, b)
        for z, _ in zs.roots:
            assert abs(rf.evaluate(s, z) - b) < 1e-7


class TestIntegratedSector:
    def test_constant_function(self):
        s = fixed_sample([1], r_max=1.0)
        assert rf.integrated_sector_N(s, 1.0, 0.0, 2 * math.pi) == 0.0

    def test_full_circle_matches_jensen(self):
        # f = z - 0.5 at r = 1: integral equals log 2
        s = fixed_sample([0.5, 1], signs=(-1, 1), r_max=1.0)
        val = rf.integrated_sector_N(s, 1.0, 0.0, 2 * math.pi)
        assert val == pytest.approx(math.log(2), abs=1e-3)

    def test_half_planes_add_up(self):
        ens = rf.EnsembleSpec("gaussian", seed=23)
        s = rf.sample(GEF, ens, r_max=3.0, tail_tol=1e-10, trial=0)
        full = rf.integrated_sector_N(s, 3.0, 0.0, 2 * math.pi)
        upper = rf.integrated_sector_N(s, 3.0, 0.0, math.pi)
        lower = rf.integrated_sector_N(s, 3.0, math.pi, 2 * math.pi)
        assert upper + lower == pytest.approx(full, abs=1e-3 * max(1, full))
        quad = rf.jensen_N(s, 3.0)
        assert full == pytest.approx(quad, abs=1e-3 * max(1, abs(quad)))


class TestHoleIndicatorConsistency:
    def test_empty_iff_argument_principle_zero(self):
        ens = rf.EnsembleSpec("gaussian", seed=101)
        found = {True: 0, False: 0}
        for t in range(200):
            s = rf.sample(GEF, ens, r_max=1.0, tail_tol=1e-9, trial=t)
            mods = np.sort(np.abs(all_roots(s)))
            r_eff = resolve_radius(mods, 1.0, r_cap=1.0)
            empty = not np.any(mods <= r_eff)
            count = rf.argument_principle_count(s, r_eff)
            assert empty == (count == 0)
            found[empty] += 1
        assert found[True] > 0 and found[False] > 0
