"""Certified truncation, reproducibility, and the envelope event."""

import json
import math

import numpy as np
import pytest

import randfun as rf
from randfun.errors import (
    OutOfCertifiedDisk,
    TruncationFailure,
    UnsupportedEnsemble,
)
from randfun.sampling import omega_events

GEF = rf.CoefficientSequence.gef()


def brute_tail(seq, degree, r, rate=0.0, top=5000):
    total = 0.0
    n = seq.first_support()
    while n != -1 and n <= top:
        if n > degree:
            total += math.exp(seq.log_a(n) + n * (math.log(r) + rate))
        n = seq.support_after(n)
    return total


class TestSample:
    def test_gef_degree_range_and_certificate(self):
        ens = rf.EnsembleSpec("rademacher", seed=1)
        s = rf.sample(GEF, ens, r_max=2.0, tail_tol=1e-12)
        assert 40 <= s.degree <= 60
        assert s.tail_log_bound <= math.log(1e-12)
        # the certificate upper-bounds the true tail and the degree is minimal
        true_tail = brute_tail(GEF, s.degree, 2.0)
        assert math.log(true_tail) <= s.tail_log_bound
        assert brute_tail(GEF, s.degree - 1, 2.0) > 1e-12 * 0.5

    def test_explicit_list_tail_is_empty(self):
        ens = rf.EnsembleSpec("steinhaus", seed=3)
        s = rf.sample(rf.CoefficientSequence.explicit([1, 1]), ens,
                      r_max=1.0, tail_tol=1e-12)
        assert s.degree == 1
        assert s.tail_log_bound == -math.inf

    def test_gauss_squared_small_degree(self):
        ens = rf.EnsembleSpec("gaussian", seed=5)
        s = rf.sample(rf.CoefficientSequence.gauss_squared(1.1), ens,
                      r_max=math.exp(6.6), tail_tol=1e-10)
        assert s.degree <= 15
        # gaussian envelope e^{delta n/2} included in the certificate
        gp = rf.growth_profile(rf.CoefficientSequence.gauss_squared(1.1),
                               math.exp(6.6))
        rate = 0.5 * gp.delta
        true_tail = brute_tail(s.seq, s.degree, math.exp(6.6), rate=rate)
        assert math.log(true_tail) <= s.tail_log_bound <= math.log(1e-10)

    def test_reproducibility_bit_identical(self):
        ens = rf.EnsembleSpec("gaussian", seed=42)
        a = rf.sample(GEF, ens, r_max=2.0, tail_tol=1e-9, trial=17)
        b = rf.sample(GEF, ens, r_max=2.0, tail_tol=1e-9, trial=17)
        assert np.array_equal(a.scaled_coeffs, b.scaled_coeffs)

    def test_coefficients_shared_across_degrees(self):
        ens = rf.EnsembleSpec("gaussian", seed=42)
        tight = rf.sample(GEF, ens, r_max=2.0, tail_tol=1e-12, trial=3)
        loose = rf.sample(GEF, ens, r_max=2.0, tail_tol=1e-6, trial=3)
        assert loose.degree < tight.degree
        assert np.array_equal(
            tight.scaled_coeffs[: loose.degree + 1], loose.scaled_coeffs
        )

    def test_block_memo_matches_direct_draw(self):
        ens = rf.EnsembleSpec("gaussian", seed=9)
        via_memo = ens.draw(700, np.arange(30, dtype=np.uint64))
        direct = ens._draw_direct(700, np.arange(30, dtype=np.uint64))
        assert np.array_equal(via_memo, direct)

    def test_unimodular_factors(self):
        for kind in ("rademacher", "steinhaus"):
            ens = rf.EnsembleSpec(kind, seed=4)
            s = rf.sample(GEF, ens, r_max=1.0, tail_tol=1e-10)
            mags = np.exp([GEF.log_a(n) for n in range(s.degree + 1)])
            np.testing.assert_allclose(
                np.abs(s.scaled_coeffs), mags, rtol=1e-14
            )

    def test_degree_override_certificate_dominates_tail(self):
        # the hard-degree escape hatch must still report a valid bound,
        # including when the dropped terms are still growing
        ens = rf.EnsembleSpec("rademacher", seed=1)
        for r, deg in [(4.0, 80), (8.0, 80)]:
            s = rf.sample(GEF, ens, r_max=r, tail_tol=1e-10, degree=deg)
            assert s.degree == deg
            true_tail = brute_tail(GEF, deg, r)
            assert math.log(true_tail) <= s.tail_log_bound

    def test_hole_blocks_sampling(self):
        seq = rf.CoefficientSequence.hole_blocks(1.4, 1.3, 2)
        ens = rf.EnsembleSpec("rademacher", seed=6)
        r_2 = math.exp(1.4 ** 2)
        s = rf.sample(seq, ens, r_max=r_2, tail_tol=1e-10)
        assert s.degree <= seq.finite_degree
        # second-block terms at their own radius have unit size: a_j r_2^j = 1
        edges = seq.params["edges"]
        for j in range(edges[1] + 1, edges[2] + 1):
            if j <= s.degree:
                assert abs(s.scaled_coeffs[j]) == pytest.approx(1.0,
                                                                rel=1e-12)

    def test_degree_cap_failure(self):
        slow = rf.CoefficientSequence.from_log_a(
            lambda n: -0.5 * math.log(n + 1.0), kind="unitdisk"
        )
        ens = rf.EnsembleSpec("rademacher", seed=0)
        with pytest.raises(TruncationFailure):
            rf.sample(slow, ens, r_max=0.999999, tail_tol=1e-12,
                      degree_cap=2000)

    def test_json_roundtrip_fields(self):
        ens = rf.EnsembleSpec("gaussian", seed=11)
        s = rf.sample(GEF, ens, r_max=1.5, tail_tol=1e-8, trial=2)
        payload = json.loads(s.to_json())
        assert payload["degree"] == s.degree
        assert payload["seed"] == 11
        assert payload["ensemble"] == "gaussian"
        pairs = np.array(payload["scaled_coeffs"])
        assert np.array_equal(
            pairs[:, 0] + 1j * pairs[:, 1], s.scaled_coeffs
        )


class TestEvaluate:
    def test_trivial_values(self):
        ens = rf.EnsembleSpec("fixed", seed=0, signs=(1, 1))
        s = rf.sample(rf.CoefficientSequence.explicit([1, 1]), ens,
                      r_max=1.0, tail_tol=1e-12)
        assert rf.evaluate(s, 0.0) == pytest.approx(1.0)
        ens2 = rf.EnsembleSpec("fixed", seed=0, signs=(1, -1))
        s2 = rf.sample(rf.CoefficientSequence.explicit([1, 1]), ens2,
                       r_max=1.0, tail_tol=1e-12)
        assert rf.evaluate(s2, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_matches_term_by_term_sum(self):
        ens = rf.EnsembleSpec("gaussian", seed=21)
        s = rf.sample(GEF, ens, r_max=1.0, tail_tol=1e-12)
        z = 0.3 + 0.4j
        direct = sum(
            s.scaled_coeffs[n] * z ** n for n in range(s.degree + 1)
        )
        assert rf.evaluate(s, z) == pytest.approx(direct, abs=1e-10)

    def test_outside_disk_rejected(self):
        ens = rf.EnsembleSpec("gaussian", seed=21)
        s = rf.sample(GEF, ens, r_max=1.0, tail_tol=1e-9)
        with pytest.raises(OutOfCertifiedDisk):
            rf.evaluate(s, 1.5)


class TestSigmaHat:
    def test_constant_series_is_unimodular(self):
        ens = rf.EnsembleSpec("rademacher", seed=2)
        s = rf.sample(rf.CoefficientSequence.explicit([1]), ens,
                      r_max=1.0, tail_tol=1e-12)
        f_hat = rf.sigma_hat_normalize(s, 0.5)
        vals = f_hat(np.linspace(0, 1, 17))
        np.testing.assert_allclose(np.abs(vals), 1.0, rtol=1e-14)

    @pytest.mark.parametrize("r", [1.0, 2.0])
    def test_l2_mass_near_one(self, r):
        # Monte Carlo oracle: mean of the quadrature L2 mass within 3 SE of 1
        ens = rf.EnsembleSpec("gaussian", seed=31)
        vals = []
        for t in range(1000):
            s = rf.sample(GEF, ens, r_max=r, tail_tol=1e-10, trial=t)
            vals.append(rf.sigma_hat_normalize(s, r).l2_quadrature())
        vals = np.array(vals)
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - 1.0) <= 3 * se + 1e-12

    def test_rademacher_l2_mass_exact(self):
        ens = rf.EnsembleSpec("rademacher", seed=8)
        s = rf.sample(GEF, ens, r_max=1.0, tail_tol=1e-10)
        assert rf.sigma_hat_normalize(s, 1.0).l2_quadrature() == pytest.approx(
            1.0, rel=1e-12
        )


class TestOmegaEvent:
    def test_probability_report_gef(self):
        rep = rf.envelope_event_probability(GEF, 2.0)
        # exact formulas recomputed independently
        ev = omega_events(GEF, 2.0)
        assert rep.log_p_i == pytest.approx(
            -(ev.C ** 2) * math.sqrt(144), rel=1e-12
        )
        manual_ii = sum(
            math.log1p(-math.exp(-(t ** 2))) for t in ev.thresholds_ii
        )
        assert rep.log_p_ii == pytest.approx(manual_ii, rel=1e-12)
        assert rep.log_p_iv_lower >= math.log(0.25)
        assert rep.total_lower <= 0.0
        assert rep.bound_ok
        assert rep.c_prime >= 0.0

    def test_event_constant_default(self):
        # C = C1 + C2 + 4 with the explicit sums for (ii) and (iii)
        ev = omega_events(GEF, 2.0)
        c1 = len(ev.set_ii) / math.sqrt(144)
        c2 = len(ev.set_iii) / math.sqrt(144)
        assert ev.C == pytest.approx(c1 + c2 + 4.0)

    def test_trivial_sequence_vacuous_products(self):
        rep = rf.envelope_event_probability(
            rf.CoefficientSequence.explicit([1]), 1.0
        )
        assert rep.log_p_ii == 0.0
        assert rep.log_p_iii == 0.0

    def test_total_ratio_trend(self):
        # total / (-S) tends to 1 as r grows
        ratios = []
        for r in (2.0, 3.0, 5.0):
            rep = rf.envelope_event_probability(GEF, r)
            ratios.append(rep.total_lower / -rep.S)
        assert ratios[0] > ratios[1] > ratios[2] >= 1.0

    def test_non_gaussian_rejected(self):
        with pytest.raises(UnsupportedEnsemble):
            rf.envelope_event_probability(GEF, 2.0, ensemble_kind="rademacher")

    def test_conditional_samples_have_no_zeros(self):
        # draw factors conditioned on (i)-(iv); the series then cannot vanish
        # in the disk (soundness of the envelope event, exercised non-vacuously)
        r = 2.0
        ev = omega_events(GEF, r)
        ens = rf.EnsembleSpec("gaussian", seed=77)
        base = rf.sample(GEF, ens, r_max=r, tail_tol=1e-10, trial=0)
        rng = np.random.default_rng(123)
        thresholds = dict(zip(ev.set_ii, ev.thresholds_ii))
        sqrt_m = math.sqrt(ev.m)
        for _ in range(25):
            xi = np.empty(base.degree + 1, dtype=np.complex128)
            for n in range(base.degree + 1):
                phase = np.exp(2j * np.pi * rng.uniform())
                if n == 0:
                    lo = ev.C * ev.m ** 0.25
                    xi[n] = (lo + rng.uniform(0, 1)) * phase
                    continue
                if n in thresholds:
                    hi = thresholds[n]
                elif n in ev.set_iii:
                    hi = 1.0 / sqrt_m
                else:
                    hi = math.exp(0.5 * ev.delta * n)
                xi[n] = hi * rng.uniform(0, 1) * phase
            mags = np.exp([GEF.log_a(n) + n * math.log(r)
                           for n in range(base.degree + 1)])
            import dataclasses
            smpl = dataclasses.replace(base, scaled_coeffs=xi * mags)
            ok, details = rf.omega_event_holds(smpl, r, ev)
            assert ok, details
            zs = rf.find_zeros_disk(smpl, r)
            assert zs.total_count == 0
            assert rf.argument_principle_count(smpl, r) == 0

    def test_omega_check_rejects_typical_samples(self):
        # typical Gaussian draws do not satisfy the tiny (ii) thresholds
        ens = rf.EnsembleSpec("gaussian", seed=19)
        hits = 0
        ev = omega_events(GEF, 2.0)
        for t in range(200):
            s = rf.sample(GEF, ens, r_max=2.0, tail_tol=1e-9, trial=t)
            ok, _ = rf.omega_event_holds(s, 2.0, ev)
            hits += ok
        assert hits == 0
