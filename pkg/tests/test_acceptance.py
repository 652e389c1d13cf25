"""Acceptance gate: every criterion at its stated tolerance and budget.

Each test prints one PASS/FAIL line in the terminal summary.  Monte Carlo
criteria use fixed seeds distinct from the pre-registered oracle seed; the
hole-probability reference below was produced by a 10^6-trial run (seed
20260809) frozen before this module was written.
"""

import math
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

import randfun as rf
import randfun.experiments as ex
from randfun.covariance import CircleConfiguration
from randfun.sampling import omega_events
from randfun.zeros import all_roots, jensen_from_roots, resolve_radius

ACCEPTANCE_LINES = []

GEF = rf.CoefficientSequence.gef()

# pre-registered 10^6-trial oracle (seed 20260809): hole counts for the GEF
HOLE_ORACLE = {
    "trials": 999_614,  # 386 of 10^6 trials unresolved near circle gaps
    "holes_0.5": 753_240,
    "p_hat": {"0.25": 0.9379540502634017, "0.5": 0.7535308629130845,
              "0.75": 0.4787738066893821, "1": 0.2050451474269068},
}


@contextmanager
def criterion(num, desc, budget_s):
    t0 = time.monotonic()
    try:
        yield
        elapsed = time.monotonic() - t0
        assert elapsed < budget_s, (
            f"criterion {num} overran its budget: {elapsed:.1f}s"
        )
    except Exception:
        ACCEPTANCE_LINES.append(f"criterion {num:02d}: FAIL - {desc}")
        raise
    ACCEPTANCE_LINES.append(
        f"criterion {num:02d}: PASS ({elapsed:5.1f}s / {budget_s:g}s) - {desc}"
    )


def test_01_gef_closed_forms():
    with criterion(1, "GEF closed forms sigma^2 = e^{r^2}, s = r^2", 1.0):
        for r in (0.5, 1.0, 2.0, 4.0):
            sigma2 = rf.sigma(GEF, r) ** 2
            assert abs(sigma2 - math.exp(r * r)) <= 1e-10 * math.exp(r * r)
            s = rf.s_log_deriv(GEF, r)
            assert abs(s - r * r) <= 1e-10 * max(1.0, r * r)


def test_02_hole_constant_trend():
    with criterion(2, "S(r)/r^4 -> e^2/4, within 2% at r = 20", 1.0):
        target = math.e ** 2 / 4
        ratios = [rf.growth_profile(GEF, r).S / r ** 4 for r in (5, 10, 20)]
        assert ratios[0] < ratios[1] < ratios[2]
        assert abs(ratios[2] - target) <= 0.02 * target


def test_03_zero_count_mean():
    with criterion(3, "2000 Gaussian samples at r=2: mean count vs 4, "
                      "methods agree", 120.0):
        rep = ex.exp_zero_concentration(GEF, "gaussian", [2.0], trials=2000,
                                        seed=1010)
        stats = rep.summary["per_radius"]["2"]
        assert stats["methods_agree"]
        assert rep.summary["failed_trials"] == 0
        assert abs(stats["mean_count"] - 4.0) <= 3.0 * stats["se_count"]


def test_04_jensen_identity():
    with criterion(4, "Jensen quadrature vs root sum < 1e-6 on 10^3 samples",
                   120.0):
        ens = rf.EnsembleSpec("gaussian", seed=2020)
        for t in range(500):
            for r in (1.0, 2.0):
                smpl = rf.sample(GEF, ens, r_max=r, tail_tol=1e-10, trial=t)
                mods = np.sort(np.abs(all_roots(smpl)))
                r_eff = resolve_radius(mods, r, r_cap=r)
                quad = rf.jensen_N(smpl, r_eff)
                zs = rf.find_zeros_disk(smpl, r_eff)
                assert abs(quad - jensen_from_roots(zs)) < 1e-6


def test_05_real_zeros_all_patterns():
    with criterion(5, "alpha=1.1: all 1024 sign patterns give only real "
                      "zeros, m per disk", 60.0):
        rep = ex.exp_real_zeros(alpha=1.1, m_max=3, sign_patterns="all",
                                k=10, seed=0)
        assert rep.summary["patterns"] == 1024
        assert rep.summary["max_im_ratio"] < 1e-7
        assert rep.summary["all_real"]
        assert rep.summary["counts_ok"]


def test_06_lacunary_exceptional_set():
    with criterion(6, "lacunary k=6: counts 16/32 on the windows, s_f "
                      "bounds within 10%", 60.0):
        rep = ex.exp_lacunary_discrepancy(k=6, sign_patterns=8, seed=3030)
        assert rep.summary["counts_ok"]
        assert rep.summary["s_f_ok"]
        lower = [r for r in rep.rows if r["window"] == "lower"]
        upper = [r for r in rep.rows if r["window"] == "upper"]
        assert len(lower) == len(upper) == 5 * 8
        assert all(r["count"] == 16 for r in lower)
        assert all(r["count"] == 32 for r in upper)


def test_07_circulant_eigenvalues():
    with criterion(7, "circulant eigenvalue law vs dense eigensolver", 5.0):
        lam = rf.circulant_eigenvalues(GEF, 1.0, 2)
        assert lam[0] == pytest.approx(2 * math.cosh(1), rel=1e-12)
        assert lam[1] == pytest.approx(2 * math.sinh(1), rel=1e-12)
        for seq in (GEF, rf.CoefficientSequence.gamma_type(0.5)):
            for N in (2, 4, 8, 16):
                for rho in (0.5, 1.0, 2.0):
                    lam = np.sort(rf.circulant_eigenvalues(seq, rho, N))
                    cov = rf.build_covariance(
                        seq, CircleConfiguration.equispaced(rho, N)
                    )
                    dense = np.sort(np.linalg.eigvalsh(cov.scaled)) \
                        * math.exp(cov.log_scale)
                    np.testing.assert_allclose(
                        lam, dense, rtol=1e-9, atol=1e-9 * float(lam.max())
                    )


def test_08_determinant_bound():
    with criterion(8, "log det Sigma >= S(r) at searched configurations",
                   60.0):
        for r in (2.0, 3.0):
            check = rf.det_sigma_lower_check(GEF, r, attempts=2000, seed=4040)
            assert check.ok
            assert check.log_det >= check.S_r


def test_09_vandermonde_average():
    with criterion(9, "E |det A|^2 / rho^{2 sum j} = 4! over 10^5 draws",
                   30.0):
        res = rf.vandermonde_average(4, [1, 2, 3], rho=1.0, trials=10**5,
                                     seed=5050)
        assert abs(res.mean - 24.0) <= 3.0 * res.stderr


def test_10_hole_probability_mc():
    with criterion(10, "hole MC 10^5 trials: nesting, oracle CI at r=0.5, "
                       "monotone -log P", 600.0):
        rep = ex.exp_hole_mc(GEF, [0.25, 0.5, 0.75, 1.0], trials=10**5,
                             seed=1010)
        assert rep.summary["nesting_violations"] == 0
        assert rep.summary["method_disagreements"] == 0
        assert rep.summary["neg_log_p_strictly_increasing"]
        per_r = rep.summary["per_radius"]
        p_test = per_r["0.5"]["p_hat"]
        n_test = per_r["0.5"]["trials"]
        p_oracle = HOLE_ORACLE["holes_0.5"] / HOLE_ORACLE["trials"]
        pooled = 0.5 * (p_test + p_oracle)
        half_width = 2.576 * math.sqrt(
            pooled * (1 - pooled) * (1 / n_test + 1 / HOLE_ORACLE["trials"])
        )
        assert abs(p_test - p_oracle) <= half_width


def test_11_omega_event_soundness():
    with criterion(11, "Omega_r soundness over 10^5 samples at r=2, "
                       "log P bound with computed C'", 300.0):
        r = 2.0
        ev = omega_events(GEF, r)
        ens = rf.EnsembleSpec("gaussian", seed=6060)
        probe = rf.sample(GEF, ens, r_max=r, tail_tol=1e-9, trial=0)
        degree = probe.degree
        sqrt_m = math.sqrt(ev.m)
        thr = np.full(degree + 1, np.inf)
        thr[0] = np.inf  # event (i) is a lower bound, handled separately
        for n, t in zip(ev.set_ii, ev.thresholds_ii):
            if n <= degree:
                thr[n] = t
        for n in ev.set_iii:
            if n <= degree:
                thr[n] = 1.0 / sqrt_m
        for n in range(1, degree + 1):
            if not math.isfinite(thr[n]):
                thr[n] = math.exp(0.5 * ev.delta * n)
        lower_i = ev.C * ev.m ** 0.25
        qualifying = 0
        batch = 2048
        done = 0
        while done < 10**5:
            count = min(batch, 10**5 - done)
            xi = np.stack([
                ens.draw(done + j, np.arange(degree + 1, dtype=np.uint64))
                for j in range(count)
            ])
            mags = np.abs(xi)
            holds = (mags[:, 0] >= lower_i) & np.all(
                mags[:, 1:] <= thr[None, 1:], axis=1
            )
            for j in np.nonzero(holds)[0]:
                trial = done + j
                smpl = rf.sample(GEF, ens, r_max=r, tail_tol=1e-9,
                                 trial=trial)
                ok, details = rf.omega_event_holds(smpl, r, ev)
                assert ok, details
                assert rf.find_zeros_disk(smpl, r).total_count == 0
                qualifying += 1
            done += count
        # cross-validate the vectorized event check on a few samples
        for t in range(50):
            smpl = rf.sample(GEF, ens, r_max=r, tail_tol=1e-9, trial=t)
            mags = np.abs(smpl.scaled_coeffs) * np.exp(
                -np.array([GEF.log_a(n) + n * math.log(r)
                           for n in range(degree + 1)])
            )
            vec = bool((mags[0] >= lower_i) and np.all(mags[1:] <= thr[1:]))
            ref, _ = rf.omega_event_holds(smpl, r, ev)
            assert vec == ref
        rep = rf.envelope_event_probability(GEF, r)
        assert rep.bound_ok
        assert math.isfinite(rep.c_prime) and rep.c_prime >= 0.0
        assert rep.total_lower >= -rep.S - rep.c_prime * sqrt_m * \
            math.log(ev.m) - 1e-9


def test_12_gn_sharpness():
    with criterion(12, "g_5: exact L2 mass 184756/1048576, sup <= 2e-14",
                   1.0):
        rep = ex.exp_gN_sharpness([5])
        row = rep.rows[0]
        assert Fraction(row["l2_numerator"], row["l2_denominator"]) == \
            Fraction(184756, 1048576)
        assert row["sup_small_theta"] <= 2e-14


def test_13_khinchin():
    with criterion(13, "Khinchin: p=2 exact, p in {4,8} ratios below 4",
                   60.0):
        rep = ex.exp_khinchin([2.0, 4.0, 8.0], dim=64, trials=10**4,
                              seed=7070)
        ratio2 = rep.summary["linear_ratio_p2"]
        se2 = rep.summary["p2_linear_ratio_se"]
        assert abs(ratio2 - 1.0) <= 3.0 * se2
        for p in (4.0, 8.0):
            assert rep.summary[f"linear_over_sqrt_p{p:g}"] <= 4.0
            assert rep.summary[f"bilinear_over_p{p:g}"] <= 4.0


def test_14_coefficient_asymptotics():
    with criterion(14, "coefficient law of exp(z^2/2 + z): decay slope in "
                       "[-0.8,-0.3]; beta=0 parity", 1.0):
        rep = ex.exp_coeff_asymptotics(1.0, n_max=400)
        assert -0.8 <= rep.summary["fitted_decay_slope"] <= -0.3
        rep0 = ex.exp_coeff_asymptotics(0.0, n_max=200)
        assert rep0.summary["odd_coefficients_zero"]
