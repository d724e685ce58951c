import numpy as np
import pytest

import cscox
from cscox.errors import (
    BadStatusCode,
    DegenerateDesignWarning,
    InconsistentCovariateDim,
    NoUncensoredEvents,
    NonFiniteValue,
    TruncationInfeasible,
)


class TestValidate:
    def test_well_formed(self):
        ds = cscox.validate([(1.0, 0, [0.5]), (2.0, 1, [-0.5])], "right-cs")
        assert ds.n == 2 and ds.q == 1
        assert ds.model is cscox.Model.RIGHT_CS

    def test_bad_status(self):
        with pytest.raises(BadStatusCode):
            cscox.validate([(1.0, 3, [0.0])], "right-cs")

    def test_fractional_status(self):
        with pytest.raises(BadStatusCode):
            cscox.validate([(1.0, 1.5, [0.0])], "right-cs")

    def test_no_events(self):
        with pytest.raises(NoUncensoredEvents):
            cscox.validate([(1.0, 1, [0.0]), (2.0, 2, [1.0])], "right-cs")

    def test_empty(self):
        with pytest.raises(NoUncensoredEvents):
            cscox.validate([], "right-cs")

    def test_non_finite(self):
        with pytest.raises(NonFiniteValue):
            cscox.validate([(np.nan, 0, [0.0])], "right-cs")
        with pytest.raises(NonFiniteValue):
            cscox.validate([(-1.0, 0, [0.0])], "right-cs")
        with pytest.raises(NonFiniteValue):
            cscox.validate([(1.0, 0, [np.inf])], "right-cs")

    def test_inconsistent_dim(self):
        with pytest.raises(InconsistentCovariateDim):
            cscox.validate([(1.0, 0, [0.0]), (2.0, 0, [0.0, 1.0])], "right-cs")

    def test_degenerate_design_warns(self):
        with pytest.warns(DegenerateDesignWarning):
            cscox.validate([(1.0, 0, [1.0]), (2.0, 0, [1.0])], "right-cs")

    def test_sorted_events_first_on_ties(self):
        ds = cscox.validate(
            [(1.0, 2, [0.1]), (1.0, 0, [0.2]), (0.5, 1, [0.3])], "right-cs"
        )
        assert list(ds.x) == [0.5, 1.0, 1.0]
        assert list(ds.a) == [1, 0, 2]

    def test_sort_deterministic_across_input_order(self, rng):
        n = 30
        x = rng.uniform(0, 5, n)  # distinct almost surely
        a = rng.integers(0, 3, n)
        a[0] = 0
        z = rng.normal(size=(n, 2))
        records = list(zip(x, a, z))
        ds1 = cscox.validate(records, "right-cs")
        perm = rng.permutation(n)
        ds2 = cscox.validate([records[i] for i in perm], "right-cs")
        np.testing.assert_array_equal(ds1.x, ds2.x)
        np.testing.assert_array_equal(ds1.a, ds2.a)
        np.testing.assert_array_equal(ds1.z, ds2.z)

    def test_serialize_roundtrip(self, rng):
        from conftest import make_mixed

        ds = make_mixed(rng)
        again = cscox.validate(cscox.serialize_records(ds), ds.model)
        np.testing.assert_array_equal(ds.x, again.x)
        np.testing.assert_array_equal(ds.a, again.a)
        np.testing.assert_array_equal(ds.z, again.z)

    def test_tie_jitter_breaks_ties(self):
        recs = [(1.0, 0, [0.0]), (1.0, 0, [1.0]), (1.0, 2, [2.0])]
        ds = cscox.validate(recs, "right-cs", tie_jitter=1e-12)
        assert len(np.unique(ds.x)) == 3
        with pytest.raises(ValueError):
            cscox.validate(recs, "right-cs", tie_jitter=-1e-12)

    def test_arrays_immutable(self, rng):
        from conftest import make_mixed

        ds = make_mixed(rng)
        with pytest.raises(ValueError):
            ds.x[0] = 99.0

    def test_observations_view(self):
        with pytest.warns(DegenerateDesignWarning):  # 2 points in 2-d: rank 1
            ds = cscox.validate([(2.0, 1, [0.5, 1.0]), (1.0, 0, [0.0, -1.0])], "left-cs")
        obs = ds.observations
        assert obs[0] == cscox.Observation(1.0, 0, (0.0, -1.0))
        assert obs[1].a == 1


class TestTruncation:
    def test_auto_right_is_largest_event(self):
        ds = cscox.validate(
            [(1.0, 0, [0.0]), (2.0, 0, [0.1]), (3.0, 1, [0.2])], "right-cs"
        )
        assert cscox.resolve_truncation(ds, cscox.FitConfig()) == 2.0

    def test_auto_left_is_smallest_event(self):
        ds = cscox.validate(
            [(1.0, 1, [0.0]), (2.0, 0, [0.1]), (3.0, 0, [0.2])], "left-cs"
        )
        assert cscox.resolve_truncation(ds, cscox.FitConfig()) == 2.0

    def test_user_tau_beyond_data_infeasible(self):
        ds = cscox.validate([(1.0, 0, [0.0]), (3.0, 1, [0.1])], "right-cs")
        with pytest.raises(TruncationInfeasible):
            cscox.resolve_truncation(ds, cscox.FitConfig(tau=5.0))

    def test_user_tau_feasible(self):
        ds = cscox.validate([(1.0, 0, [0.0]), (3.0, 1, [0.1])], "right-cs")
        assert cscox.resolve_truncation(ds, cscox.FitConfig(tau=2.5)) == 2.5

    def test_user_rho_below_data_infeasible(self):
        ds = cscox.validate([(1.0, 0, [0.0]), (3.0, 1, [0.1])], "left-cs")
        with pytest.raises(TruncationInfeasible):
            cscox.resolve_truncation(ds, cscox.FitConfig(rho=0.5))


class TestStepFunction:
    def test_evaluation(self):
        f = cscox.StepFunction(np.array([1.0, 2.0]), np.array([0.5, 1.0]))
        assert f(0.5) == 0.0
        assert f(1.0) == 0.5
        assert f(2.5) == 1.5
        np.testing.assert_allclose(f([0.0, 1.0, 2.0]), [0.0, 0.5, 1.5])

    def test_tail(self):
        f = cscox.StepFunction(np.array([1.0, 2.0]), np.array([0.5, 1.0]))
        assert f.tail(0.5) == 1.5
        assert f.tail(1.0) == 1.0
        assert f.tail(2.0) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            cscox.StepFunction(np.array([2.0, 1.0]), np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            cscox.StepFunction(np.array([1.0]), np.array([0.0]))
        with pytest.raises(ValueError):
            cscox.StepFunction(np.array([-1.0]), np.array([1.0]))

    def test_empty(self):
        f = cscox.StepFunction(np.array([]), np.array([]))
        assert f(10.0) == 0.0 and f.total() == 0.0 and len(f) == 0

    def test_nondecreasing_randomized(self, rng):
        for _ in range(20):
            m = rng.integers(1, 12)
            times = np.sort(rng.uniform(0, 10, m))
            times += np.arange(m) * 1e-9
            incs = rng.uniform(0.01, 1.0, m)
            f = cscox.StepFunction(times, incs)
            grid = np.sort(rng.uniform(-1, 12, 50))
            vals = f(grid)
            assert np.all(np.diff(vals) >= 0)


class TestTheta:
    def test_box_enforced(self):
        with pytest.raises(ValueError):
            cscox.Theta(0.5, [25.0])
        with pytest.raises(ValueError):
            cscox.Theta(1.5, [0.0])
        with pytest.raises(ValueError):
            cscox.Theta(1e-9, [0.0])
        theta = cscox.Theta(1.0, [1.0, -1.0])
        assert theta.q == 2

    def test_covariate_bound_covers_sample(self, rng):
        from conftest import make_mixed

        ds = make_mixed(rng)
        assert ds.z_bound >= np.max(np.linalg.norm(ds.z, axis=1)) - 1e-15
