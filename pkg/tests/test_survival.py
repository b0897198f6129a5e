import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

import oracles
from synthetic import FIVE, KM10_EVENTS, KM10_TABLE, KM10_TIMES
from pathcohort.exceptions import Degenerate, EmptyGroup, EmptySubset, NoSE
from pathcohort.survival import (
    CoxPH,
    SurvivalDataset,
    baseline_hazard,
    chi2_sf,
    cox_fit,
    cox_gradient,
    cox_loglik,
    gammaincc,
    hazard_ratios,
    km_estimate,
    logrank_test,
    median_split,
    risk_index,
    select_lambda_cv,
    univariate_screen,
)
from pathcohort.survival.cox import PartialLikelihood

def km10():
    return SurvivalDataset(KM10_TIMES, KM10_EVENTS, np.zeros((10, 0)))


def simulate(n, beta, rate=0.01, censor=0.2, seed=0):
    """Exponential PH data with calibrated uniform censoring (test-local)."""
    r = np.random.default_rng(seed)
    X = r.standard_normal((n, len(beta)))
    T = -np.log(r.random(n)) / (rate * np.exp(X @ np.asarray(beta)))
    if censor == 0:
        return SurvivalDataset(T, np.ones(n, bool), X)
    lo, hi = 1e-9, T.max() * 1e6
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        frac = np.mean(np.minimum(T / mid, 1.0))
        lo, hi = (mid, hi) if frac > censor else (lo, mid)
    C = r.uniform(0, hi, n)
    return SurvivalDataset(np.minimum(T, C), T <= C, X)


class TestKaplanMeier:
    def test_hand_table_fixture(self):
        assert oracles.km_product_limit(KM10_TIMES, KM10_EVENTS) == KM10_TABLE
        curve = km_estimate(km10())
        assert curve.event_times.tolist() == [r[0] for r in KM10_TABLE]
        np.testing.assert_allclose(curve.survival, [float(r[1]) for r in KM10_TABLE], rtol=0, atol=1e-12)
        assert curve.at_risk.tolist() == [r[2] for r in KM10_TABLE]
        assert curve.n_events.tolist() == [r[3] for r in KM10_TABLE]

    def test_greenwood(self):
        curve = km_estimate(km10())
        s = 0.0
        for k, (t, S, n, d) in enumerate(KM10_TABLE[:-1]):
            s += d / (n * (n - d))
            assert curve.greenwood_var[k] == pytest.approx(float(S) ** 2 * s, rel=1e-12)
        assert curve.greenwood_var[-1] == 0.0

    def test_all_censored(self):
        ds = SurvivalDataset([1, 2, 3], [0, 0, 0], np.zeros((3, 0)))
        curve = km_estimate(ds)
        assert len(curve) == 0 and curve.at(5) == 1.0

    def test_all_events(self):
        ds = SurvivalDataset([1, 2, 3], [1, 1, 1], np.zeros((3, 0)))
        np.testing.assert_allclose(km_estimate(ds).survival, [2 / 3, 1 / 3, 0])

    def test_empty_subset(self):
        with pytest.raises(EmptySubset):
            km_estimate(km10(), np.zeros(10, bool))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(1, 20), st.booleans()), min_size=1, max_size=30))
    def test_properties(self, data):
        t, e = zip(*data)
        curve = km_estimate(SurvivalDataset(t, e, np.zeros((len(t), 0))))
        s = np.concatenate([[1.0], curve.survival])
        assert np.all(np.diff(s) <= 0) and np.all((s >= 0) & (s <= 1))
        assert np.all(np.diff(curve.at_risk) < 0)
        if all(e):
            for tt in set(t):
                assert curve.at(tt) == pytest.approx(sum(u > tt for u in t) / len(t), abs=1e-12)


class TestLogRank:
    def test_identical_groups(self):
        ds = SurvivalDataset([1, 2, 3, 1, 2, 3], [1, 0, 1, 1, 0, 1], np.zeros((6, 0)))
        a = np.array([1, 1, 1, 0, 0, 0], bool)
        res = logrank_test(ds, a, ~a)
        assert res.chi2 == 0.0 and res.p_value == 1.0

    def test_single_event_time_by_hand(self):
        # 5 events at t=1 in A, 5 censored at t=2 in B: O-E = 2.5, V = 5*.5*.5*5/9
        ds = SurvivalDataset([1] * 5 + [2] * 5, [1] * 5 + [0] * 5, np.zeros((10, 0)))
        a = np.arange(10) < 5
        res = logrank_test(ds, a, ~a)
        assert res.observed_a == 5 and res.expected_a == 2.5
        assert res.variance == pytest.approx(6.25 / 9, rel=1e-15)
        assert res.chi2 == pytest.approx(9.0, rel=1e-12)
        assert res.p_value == pytest.approx(oracles.chi2_sf_1df(9.0), rel=1e-10)

    def test_no_events(self):
        ds = SurvivalDataset([1, 2, 3, 4], [0, 0, 0, 0], np.zeros((4, 0)))
        res = logrank_test(ds, np.array([1, 1, 0, 0], bool), np.array([0, 0, 1, 1], bool))
        assert res.no_events and res.p_value == 1.0 and res.chi2 == 0.0

    def test_empty_group(self):
        with pytest.raises(EmptyGroup):
            logrank_test(km10(), np.ones(10, bool), np.zeros(10, bool))

    @pytest.mark.parametrize("seed", range(10))
    def test_symmetry(self, seed):
        ds = simulate(60, [0.8], seed=seed)
        a = ds.covariates[:, 0] > 0
        x, y = logrank_test(ds, a, ~a), logrank_test(ds, ~a, a)
        assert abs(x.chi2 - y.chi2) <= 1e-12 and abs(x.p_value - y.p_value) <= 1e-12


class TestChiSquareTail:
    def test_anchors(self):
        assert chi2_sf(3.841) == pytest.approx(0.050, abs=5e-4)
        assert chi2_sf(6.635) == pytest.approx(0.010, abs=5e-4)
        assert chi2_sf(3.841) == pytest.approx(0.0500, abs=5e-4)

    @pytest.mark.parametrize("x", [1e-8, 0.01, 0.5, 1.0, 2.9, 3.841, 10.0, 50.0, 200.0])
    def test_matches_erfc(self, x):
        assert abs(chi2_sf(x, 1) - oracles.chi2_sf_1df(x)) < 1e-12

    @pytest.mark.parametrize("a,x", [(1.0, 0.3), (1.0, 5.0), (2.5, 1.0), (2.5, 9.0)])
    def test_against_scipy(self, a, x):
        from scipy.special import gammaincc as ref

        assert gammaincc(a, x) == pytest.approx(ref(a, x), abs=1e-13)

    def test_exponential_case(self):
        # Q(1, x) = exp(-x)
        assert gammaincc(1.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-13)


class TestPartialLikelihood:
    def test_beta_zero(self):
        ds = km10()
        ds = SurvivalDataset(ds.times, ds.events, np.arange(10.0))
        expected = -sum(math.log(n) for _, _, n, _ in KM10_TABLE)
        assert cox_loglik(ds, [0.0]) == pytest.approx(expected, rel=1e-14)

    def test_two_subjects(self):
        ds = SurvivalDataset([1, 2], [1, 1], [[1.0], [0.0]])
        expected = (0.5 - math.log(math.exp(0.5) + 1)) + (0 - math.log(1))
        assert cox_loglik(ds, [0.5]) == pytest.approx(expected, rel=1e-14)

    def test_location_shift(self):
        ds = simulate(20, [0.5, -0.2], seed=1)
        shifted = SurvivalDataset(ds.times, ds.events, ds.covariates + [7.0, 0.0])
        assert cox_loglik(shifted, [0.3, 0.1]) == pytest.approx(cox_loglik(ds, [0.3, 0.1]), abs=1e-10)

    def test_ties_breslow(self):
        t = [1, 1, 2, 3, 3, 4]
        e = [1, 1, 0, 1, 0, 1]
        x = np.array([0.3, -1.0, 0.5, 2.0, 0.1, -0.4])
        ds = SurvivalDataset(t, e, x)
        assert cox_loglik(ds, [0.7]) == pytest.approx(oracles.partial_loglik_naive(x, t, e, [0.7]), rel=1e-13)

    def test_balanced_gradient_zero(self):
        ds = SurvivalDataset([1, 1, 2, 2], [1, 1, 1, 1], [[-1.0], [1.0], [-1.0], [1.0]])
        assert cox_gradient(ds, [0.0]) == pytest.approx([0.0], abs=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_gradient_finite_differences(self, seed):
        r = np.random.default_rng(seed)
        ds = SurvivalDataset(r.integers(1, 6, 8).astype(float), r.random(8) < 0.7, r.standard_normal((8, 3)))
        beta = r.normal(0, 0.5, 3)
        g = cox_gradient(ds, beta)
        fd = np.empty(3)
        for j in range(3):
            e = np.zeros(3)
            e[j] = 1e-6
            fd[j] = (oracles.partial_loglik_naive(ds.covariates, ds.times, ds.events, beta + e)
                     - oracles.partial_loglik_naive(ds.covariates, ds.times, ds.events, beta - e)) / 2e-6
        assert np.max(np.abs(g - fd)) / max(np.max(np.abs(g)), 1e-8) < 1e-6

    def test_information_matches_gradient_differences(self):
        ds = simulate(30, [0.5, -0.5], seed=3)
        pl = PartialLikelihood(ds.covariates, ds.times, ds.events)
        b = np.array([0.2, -0.1])
        H = np.column_stack([(pl.gradient(b + e) - pl.gradient(b - e)) / 2e-6 for e in np.eye(2) * 1e-6])
        np.testing.assert_allclose(-H, pl.information(b), rtol=1e-6)


class TestCoxFit:
    def test_grid_oracle(self):
        ds = SurvivalDataset(FIVE["t"], FIVE["e"], FIVE["x"])
        xs = (np.array(FIVE["x"]) - np.mean(FIVE["x"])) / np.std(FIVE["x"])
        grid = np.round(np.arange(-3000, 3001) * 1e-3, 3)
        ll = [oracles.partial_loglik_naive(xs, FIVE["t"], FIVE["e"], [b]) for b in grid]
        best = grid[int(np.argmax(ll))]
        assert -3 < best < 3
        fit = cox_fit(ds)
        assert fit.converged
        assert abs(fit.beta[0] - best) <= 2e-3

    def test_trace_monotone_and_gradient_small(self):
        ds = simulate(200, [1.0, -0.5, 0.0], seed=5)
        fit = cox_fit(ds)
        assert fit.converged
        assert np.all(np.diff(fit.loglik_trace) >= 0)
        pl = PartialLikelihood(ds.standardized_covariates(), ds.times, ds.events)
        assert np.max(np.abs(pl.gradient(fit.beta))) < 1e-6
        assert np.all(fit.se > 0)

    def test_lasso_limits(self):
        ds = simulate(150, [0.8, -0.4, 0.0], seed=2)
        plain = cox_fit(ds, 0.0)
        tiny = cox_fit(ds, 1e-12)
        np.testing.assert_allclose(tiny.beta, plain.beta, rtol=0, atol=1e-6)
        big = cox_fit(ds, 10.0)
        assert np.all(big.beta == 0.0)
        assert big.se_from_refit is False

    def test_lasso_sparsifies(self):
        ds = simulate(300, [1.0, 0.0, 0.0, 0.0], seed=8)
        fit = cox_fit(ds, 0.05)
        assert fit.beta[0] > 0
        assert fit.se_from_refit and fit.se[0] > 0
        assert np.all(np.isnan(fit.se[fit.beta == 0]))

    def test_recovery(self):
        ds = simulate(500, [1.0, -0.5, 0.0], censor=0.2, seed=42)
        assert 0.15 <= 1 - ds.events.mean() <= 0.25
        fit = cox_fit(ds)
        assert fit.beta[0] > 0 and fit.beta[1] < 0
        assert np.max(np.abs(fit.beta - [1.0, -0.5, 0.0])) < 0.15

    def test_permutation_invariance(self):
        ds = simulate(80, [0.6, -0.3], seed=9)
        perm = np.random.default_rng(0).permutation(ds.n)
        shuffled = SurvivalDataset(ds.times[perm], ds.events[perm], ds.covariates[perm])
        np.testing.assert_allclose(cox_fit(ds).beta, cox_fit(shuffled).beta, rtol=0, atol=1e-10)

    def test_scale_invariance(self):
        ds = simulate(80, [0.6, -0.3], seed=10)
        scaled = SurvivalDataset(ds.times, ds.events, ds.covariates * [10.0, 1.0])
        a, b = cox_fit(ds), cox_fit(scaled)
        np.testing.assert_allclose(a.beta, b.beta, rtol=0, atol=1e-9)
        ra = risk_index(a, ds.covariates)
        rb = risk_index(b, scaled.covariates)
        np.testing.assert_allclose(ra, rb, rtol=0, atol=1e-9)
        assert np.array_equal(median_split(ra)[0], median_split(rb)[0])

    def test_separation_flagged(self):
        ds = SurvivalDataset([1, 2, 3, 4, 5, 6], [1] * 6, [6.0, 5, 4, 3, 2, 1])
        with pytest.warns(Warning):
            fit = cox_fit(ds)
        assert fit.separation and not fit.converged

    def test_cv_records_choice(self):
        ds = simulate(120, [0.8, 0.0, 0.0], seed=4)
        fit = cox_fit(ds, "cv", seed=7)
        assert fit.cv["seed"] == 7 and fit.cv["lambda"] in fit.cv["grid"]
        assert fit.penalty == fit.cv["lambda"]
        again = select_lambda_cv(ds, seed=7)
        assert again["scores"] == fit.cv["scores"]

    def test_gradient_ascent_agrees_with_newton(self):
        # plain gradient ascent as an independent optimizer
        ds = simulate(100, [0.7, -0.2], seed=11)
        pl = PartialLikelihood(ds.standardized_covariates(), ds.times, ds.events)
        b = np.zeros(2)
        for _ in range(5000):
            b = b + 0.5 / ds.n * pl.gradient(b)
        np.testing.assert_allclose(cox_fit(ds).beta, b, atol=1e-6)


class TestHazardRatios:
    def _fit(self, beta, se):
        from pathcohort.survival.cox import CoxFit

        return CoxFit(("a",), np.array([beta]), 0.0, [], np.array([se]), True, 1, 0.0,
                      np.zeros(1), np.ones(1))

    def test_null(self):
        (h,) = hazard_ratios(self._fit(0.0, 0.1))
        assert h.hr == 1.0
        assert (round(h.ci_low, 3), round(h.ci_high, 3)) == (0.822, 1.217)
        assert h.p_value == pytest.approx(1.0)

    def test_degenerate_ci(self):
        (h,) = hazard_ratios(self._fit(math.log(2), 0.0))
        assert h.hr == pytest.approx(2.0) and h.ci_low == h.ci_high == h.hr

    def test_format(self):
        from pathcohort.survival.cox import HazardRatio

        assert HazardRatio("x", 1.32, 0.937, 2.308, 0.001).format() == "1.320(0.937-2.308)"

    def test_no_se(self):
        with pytest.raises(NoSE):
            hazard_ratios(self._fit(0.1, math.nan))


class TestBaseline:
    def test_nelson_aalen_at_zero_beta(self):
        ds = SurvivalDataset(KM10_TIMES, KM10_EVENTS, np.ones((10, 1)))
        fit = cox_fit(ds)
        bh = baseline_hazard(ds, fit)
        na = np.cumsum([d / n for _, _, n, d in KM10_TABLE])
        np.testing.assert_allclose(bh.cumulative_hazard, na, rtol=1e-14)

    def test_single_subject(self):
        from pathcohort.survival.cox import CoxFit

        ds = SurvivalDataset([5.0], [1], [[0.0]])
        fit = CoxFit(("x1",), np.zeros(1), 0.0, [], np.zeros(1), True, 0, 0.0, np.zeros(1), np.ones(1))
        assert baseline_hazard(ds, fit).at(5) == 1.0

    def test_exponential_rate(self):
        ds = simulate(1000, [0.5, -0.3], rate=0.01, censor=0.2, seed=21)
        bh = baseline_hazard(ds, cox_fit(ds))
        for t in (50, 100, 150, 200):
            assert bh.at(t) / t == pytest.approx(0.01, rel=0.15)


class TestRiskIndex:
    def test_zero_beta(self):
        from pathcohort.survival.cox import CoxFit

        fit = CoxFit(("a", "b"), np.zeros(2), 0.0, [], np.ones(2), True, 0, 0.0, np.array([1.0, 2]), np.ones(2))
        assert risk_index(fit, [5.0, -3.0]) == 0.0

    def test_means_and_monotone(self):
        ds = simulate(100, [0.8, -0.3], seed=6)
        fit = cox_fit(ds)
        assert risk_index(fit, ds.column_stats[0]) == pytest.approx(0.0, abs=1e-12)
        x = np.array([1.0, 0.0])
        assert risk_index(fit, x * [2, 1]) > risk_index(fit, x)


class TestScreen:
    @pytest.mark.parametrize("values,cut,low", [
        ([1, 2, 3, 4], 2, [1, 1, 0, 0]),
        ([1, 2, 3], 2, [1, 1, 0]),
        ([4, 3, 2, 1], 2, [0, 0, 1, 1]),
    ])
    def test_median_split(self, values, cut, low):
        lo, hi, c = median_split(values)
        assert c == cut and lo.tolist() == [bool(v) for v in low] and np.array_equal(hi, ~lo)

    def test_constant_is_degenerate(self):
        with pytest.raises(Degenerate):
            median_split([3, 3, 3])

    def test_perfect_association(self):
        t = np.arange(1, 101, dtype=float)
        cov = np.column_stack([-t, t, np.ones(100)])
        ds = SurvivalDataset(t, np.ones(100, bool), cov, ("neg_time", "time", "flat"))
        rows = univariate_screen(ds)
        # larger -time means earlier death: worse survival
        assert rows[0].logrank_p < 1e-6 and rows[0].direction == "N" and rows[0].significant
        assert rows[1].logrank_p < 1e-6 and rows[1].direction == "P"
        assert rows[2].skipped and math.isnan(rows[2].logrank_p)

    def test_null_calibration(self):
        hits = 0
        for seed in range(100):
            r = np.random.default_rng(seed)
            ds = SurvivalDataset(r.exponential(100, 400), r.random(400) < 0.8, r.standard_normal((400, 1)))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                hits += univariate_screen(ds, 0.05)[0].significant
        assert 2 <= hits <= 8


class TestEstimator:
    def test_get_params_and_clone(self):
        est = CoxPH(alpha=0.1, random_state=3)
        assert est.get_params() == {"alpha": 0.1, "max_iter": None, "tol": 1e-9, "random_state": 3}
        assert clone(est).get_params() == est.get_params()

    def test_fit_predict(self):
        ds = simulate(200, [1.0, -0.5], seed=12)
        est = CoxPH().fit(ds.covariates, (ds.times, ds.events), feature_names=["a", "b"])
        np.testing.assert_allclose(est.coef_, cox_fit(ds).beta)
        eta = est.predict(ds.covariates)
        assert eta.shape == (200,)
        assert est.score(ds.covariates, np.column_stack([ds.times, ds.events])) == pytest.approx(est.fit_.loglik)
        assert [h.name for h in est.hazard_ratios()] == ["a", "b"]


def test_km_csv_fixture():
    from pathlib import Path

    expected = (Path(__file__).parent / "fixtures" / "km_10_subjects.csv").read_text()
    assert km_estimate(km10()).to_csv() == expected
