import math

import numpy as np
import pytest
from scipy import stats

import cscox
from cscox.simulate import (
    baseline_cum_hazard,
    baseline_reverse_hazard,
    combined_risk_true,
    distribution_true,
    hazard_via_subdistributions,
    prob_event_observable,
    survival_true,
)


def right_spec(**kw):
    base = dict(
        model="right-cs", n=200, p0=0.7, beta0=(0.5, -0.5),
        baseline=cscox.Law("weibull", (1.5, 2.0)),
        censoring=cscox.Law("exponential", (0.25,)),
        covariates=cscox.CovariateLaw("uniform", bounds=((-1.0, 1.0), (-1.0, 1.0))),
        seed=0,
    )
    base.update(kw)
    return cscox.ScenarioSpec(**base)


def left_spec(**kw):
    base = dict(
        model="left-cs", n=200, p0=0.7, beta0=(0.5,),
        baseline=cscox.Law("weibull", (1.5, 2.0)),
        censoring=cscox.Law("exponential", (0.4,)),
        covariates=cscox.CovariateLaw("discrete", levels=((0.0,), (1.0,)), probs=(0.5, 0.5)),
        seed=0,
    )
    base.update(kw)
    return cscox.ScenarioSpec(**base)


class TestLaws:
    def test_validation(self):
        with pytest.raises(ValueError):
            cscox.Law("exponential", (-1.0,))
        with pytest.raises(ValueError):
            cscox.Law("weibull", (0.0, 1.0))
        with pytest.raises(ValueError):
            cscox.Law("piecewise", ((1.0,), (0.1,)))
        with pytest.raises(ValueError):
            cscox.Law("cauchy", (0.0,))

    def test_inverse_is_right_inverse(self, rng):
        laws = [
            cscox.Law("exponential", (0.7,)),
            cscox.Law("weibull", (1.5, 2.0)),
            cscox.Law("piecewise", ((0.5, 1.5), (0.2, 0.7, 1.1))),
        ]
        e = rng.uniform(0.01, 3.0, 25)
        for law in laws:
            np.testing.assert_allclose(law.cum_hazard(law.inv_cum_hazard(e)), e, rtol=1e-12)

    def test_piecewise_zero_tail_rate(self):
        law = cscox.Law("piecewise", ((1.0,), (0.5, 0.0)))
        assert law.total_hazard() == 0.5
        assert law.inv_cum_hazard(np.array([0.7]))[0] == np.inf

    def test_constant_law(self):
        law = cscox.Law("constant", (3.0,))
        assert law.cdf(2.9) == 0.0 and law.cdf(3.0) == 1.0
        assert law.sf_left_limit(3.0) == 1.0 and law.sf(3.0) == 0.0
        rng = np.random.default_rng(0)
        assert np.all(law.sample(rng, 5) == 3.0)

    def test_scenario_validation(self):
        with pytest.raises(ValueError):
            right_spec(p0=0.0)
        with pytest.raises(ValueError):
            right_spec(cure_mass=1.0)
        with pytest.raises(ValueError):
            right_spec(beta0=(0.5,))  # dimension mismatch
        with pytest.raises(ValueError):
            right_spec(baseline=cscox.Law("constant", (1.0,)))


class TestSimulateRight:
    def test_seed_determinism(self):
        spec = right_spec(seed=7)
        d1 = cscox.simulate_right(spec)
        d2 = cscox.simulate_right(spec)
        np.testing.assert_array_equal(d1.x, d2.x)
        np.testing.assert_array_equal(d1.a, d2.a)
        np.testing.assert_array_equal(d1.z, d2.z)

    def test_p0_one_means_classical_censoring(self):
        ds = cscox.simulate_right(right_spec(p0=1.0, n=500))
        assert not np.any(ds.a == 2)

    def test_no_censoring_all_events(self):
        spec = right_spec(p0=1.0, n=300, censoring=cscox.Law("constant", (1e9,)))
        ds, lat = cscox.simulate_with_latents(spec)
        assert np.all(ds.a == 0)
        np.testing.assert_array_equal(np.sort(lat["t"]), ds.x)

    def test_status_ratio_converges_to_p0(self):
        spec = right_spec(n=100_000, seed=21)
        ds = cscox.simulate_right(spec)
        counts = ds.status_counts()
        ratio = counts[0] / (counts[0] + counts[2])
        assert abs(ratio - spec.p0) < 0.01

    def test_infinite_lifetimes_never_emit_events(self):
        spec = right_spec(cure_mass=0.4, n=3000, seed=3)
        ds, lat = cscox.simulate_with_latents(spec)
        cured = ~np.isfinite(lat["t"])
        assert cured.any()
        assert np.all(lat["a"][cured] == 1)
        assert np.all(np.isfinite(ds.x))

    def test_dataset_always_valid(self, rng):
        for seed in range(5):
            ds = cscox.simulate_right(right_spec(n=50, seed=seed, cure_mass=0.3))
            assert ds.n == 50
            assert set(np.unique(ds.a)) <= {0, 1, 2}
            assert np.all(ds.x >= 0)

    def test_conditional_independence_diagnostic(self):
        # rank(T) x rank(C) within covariate strata: chi-square should
        # not reject at the 0.1% level
        spec = right_spec(
            n=10_000, seed=17,
            covariates=cscox.CovariateLaw("discrete", levels=((0.0, 0.0), (1.0, 1.0)),
                                          probs=(0.5, 0.5)),
        )
        _, lat = cscox.simulate_with_latents(spec)
        for level in (0.0, 1.0):
            stratum = (lat["z"][:, 0] == level) & np.isfinite(lat["t"])
            t, c = lat["t"][stratum], lat["c"][stratum]
            tq = np.searchsorted(np.quantile(t, [0.25, 0.5, 0.75]), t)
            cq = np.searchsorted(np.quantile(c, [0.25, 0.5, 0.75]), c)
            table = np.zeros((4, 4))
            np.add.at(table, (tq, cq), 1)
            _, pval, _, _ = stats.chi2_contingency(table)
            assert pval > 0.001


class TestSimulateLeft:
    def test_p0_one_means_classical_left_censoring(self):
        ds = cscox.simulate_left(left_spec(p0=1.0, n=500))
        assert not np.any(ds.a == 1)

    def test_status_ratio(self):
        spec = left_spec(n=100_000, seed=22)
        ds = cscox.simulate_left(spec)
        counts = ds.status_counts()
        ratio = counts[0] / (counts[0] + counts[1])
        assert abs(ratio - spec.p0) < 0.01

    @pytest.mark.filterwarnings("ignore::cscox.errors.DegenerateDesignWarning")
    def test_zero_mass_frequency_matches_model(self):
        # single-level covariate law: constant design is intentional here
        z_fixed = 0.7
        spec = left_spec(
            n=100_000, seed=23, zero_mass=0.3,
            covariates=cscox.CovariateLaw("discrete", levels=((z_fixed,),), probs=(1.0,)),
        )
        _, lat = cscox.simulate_with_latents(spec)
        implied = math.exp(-math.exp(0.5 * z_fixed) * (-math.log(0.3)))
        assert abs(np.mean(lat["t"] == 0.0) - implied) < 0.02

    def test_zero_lifetimes_are_current_status(self):
        spec = left_spec(zero_mass=0.4, n=2000, seed=5)
        _, lat = cscox.simulate_with_latents(spec)
        zeros = lat["t"] == 0.0
        assert zeros.any()
        assert np.all(lat["a"][zeros] == 2)


class TestPopulationOracle:
    def test_unit_exponential_identity(self):
        spec = right_spec(
            beta0=(0.0,), baseline=cscox.Law("exponential", (1.0,)),
            covariates=cscox.CovariateLaw("uniform", bounds=((-1.0, 1.0),)),
        )
        t = np.array([0.3, 1.0, 2.5])
        out = cscox.population_oracle(spec, t, [0.0])
        np.testing.assert_allclose(out["lambda0"], t)
        np.testing.assert_allclose(out["survival"], np.exp(-t))

    def test_p_ratio_collapses_exactly(self):
        out = cscox.population_oracle(right_spec(), [1.0], [0.0, 0.0])
        m = out["h_masses"]
        assert m[0] / (m[0] + m[2]) == pytest.approx(0.7, rel=1e-12)
        assert sum(m.values()) == pytest.approx(1.0, rel=1e-7)

    def test_left_masses(self):
        out = cscox.population_oracle(left_spec(), [1.0], [0.0])
        m = out["h_masses"]
        assert m[0] / (m[0] + m[1]) == pytest.approx(0.7, rel=1e-12)
        assert sum(m.values()) == pytest.approx(1.0, rel=1e-7)

    def test_hazard_self_consistency_two_quadratures(self):
        # the sub-distribution route must reproduce the closed-form
        # baseline cumulative hazard
        spec = right_spec(
            covariates=cscox.CovariateLaw("discrete", levels=((0.0, 0.0), (1.0, -0.5)),
                                          probs=(0.6, 0.4)),
            cure_mass=0.25,
        )
        for t in (0.4, 1.0, 1.8):
            via_h0 = hazard_via_subdistributions(spec, t)
            closed = float(baseline_cum_hazard(spec, t))
            assert via_h0 == pytest.approx(closed, rel=1e-6)

    def test_combined_risk_general_route_matches_closed_form(self):
        # at the true parameter the sub-distribution assembly must agree
        # with the closed-form shortcut, for both models
        spec_r = right_spec(
            covariates=cscox.CovariateLaw("discrete", levels=((0.0, 0.0), (1.0, -0.5)),
                                          probs=(0.6, 0.4)),
            cure_mass=0.25,
        )
        t = np.array([0.3, 0.9, 1.7])
        closed = combined_risk_true(spec_r, t)
        assembled = combined_risk_true(spec_r, t, theta=(spec_r.p0, spec_r.beta0))
        np.testing.assert_allclose(assembled, closed, rtol=1e-7)

        spec_l = left_spec(zero_mass=0.2)
        closed_l = combined_risk_true(spec_l, t)
        assembled_l = combined_risk_true(spec_l, t, theta=(spec_l.p0, spec_l.beta0))
        np.testing.assert_allclose(assembled_l, closed_l, rtol=1e-7)

    def test_evaluate_rejects_nonpositive_p(self):
        ds = cscox.simulate_dataset(right_spec(n=30))
        with pytest.raises(ValueError):
            cscox.evaluate(ds, 0.0, np.zeros(2), 1.0)

    def test_empirical_combined_risk_converges(self):
        spec = right_spec(n=60_000, seed=29, cure_mass=0.25)
        ds = cscox.simulate_dataset(spec)
        for t in (0.5, 1.2, 2.0):
            emp = cscox.combined_risk(ds, t, spec.p0, np.array(spec.beta0))
            pop = float(combined_risk_true(spec, [t])[0])
            assert emp == pytest.approx(pop, abs=0.02)

    def test_empirical_combined_risk_converges_left(self):
        spec = left_spec(n=60_000, seed=30, zero_mass=0.2)
        ds = cscox.simulate_dataset(spec)
        for t in (0.5, 1.2, 2.5):
            emp = cscox.combined_risk(ds, t, spec.p0, np.array(spec.beta0))
            pop = float(combined_risk_true(spec, [t])[0])
            assert emp == pytest.approx(pop, abs=0.02)

    def test_cure_value(self):
        spec = right_spec(cure_mass=0.3)
        out = cscox.population_oracle(spec, [1.0], [0.0, 0.0])
        assert out["cure"] == pytest.approx(0.3, rel=1e-12)
        out_z = cscox.population_oracle(spec, [1.0], [1.0, 1.0])
        want = 0.3 ** math.exp(1.0 * 0.5 - 1.0 * 0.5)
        assert out_z["cure"] == pytest.approx(want, rel=1e-12)

    def test_zero_value(self):
        spec = left_spec(zero_mass=0.3)
        out = cscox.population_oracle(spec, [1.0], [0.0])
        assert out["zero"] == pytest.approx(0.3, rel=1e-12)

    def test_survival_against_latent_frequencies(self):
        spec = right_spec(n=100_000, seed=31, cure_mass=0.2)
        _, lat = cscox.simulate_with_latents(spec)
        # condition on a covariate box around a point
        zpt = np.array([0.5, -0.5])
        nearby = np.all(np.abs(lat["z"] - zpt) < 0.1, axis=1)
        for t in (0.5, 1.5):
            emp = np.mean(lat["t"][nearby] > t)
            want = float(survival_true(spec, t, zpt))
            assert emp == pytest.approx(want, abs=0.03)

    def test_distribution_against_latent_frequencies(self):
        spec = left_spec(n=100_000, seed=32, zero_mass=0.2)
        _, lat = cscox.simulate_with_latents(spec)
        level = lat["z"][:, 0] == 0.0
        for t in (0.5, 1.5):
            emp = np.mean(lat["t"][level] <= t)
            want = float(distribution_true(spec, t, [0.0]))
            assert emp == pytest.approx(want, abs=0.02)

    def test_prob_event_observable_matches_frequency(self):
        spec = right_spec(n=100_000, seed=33, cure_mass=0.2)
        _, lat = cscox.simulate_with_latents(spec)
        emp = np.mean(lat["t"] <= lat["c"])
        assert emp == pytest.approx(prob_event_observable(spec), abs=0.01)

    def test_reverse_hazard_decreasing(self):
        spec = left_spec(zero_mass=0.3)
        t = np.array([0.2, 0.5, 1.0, 3.0])
        r = baseline_reverse_hazard(spec, t)
        assert np.all(np.diff(r) <= 0)
        assert r[0] == pytest.approx(-math.log(0.3))
