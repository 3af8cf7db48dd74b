import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coascent.stattest import (
    Check,
    VerificationReport,
    WeightedSampleSet,
    bootstrap_pvalue,
    ks_pvalue,
    ks_two_sample,
    mean_ci_compare,
    weighted_ecdf,
    weighted_mean,
)

samples = st.lists(st.floats(-10, 10), min_size=1, max_size=30)
weights = st.floats(0.01, 10)


@st.composite
def weighted_sets(draw):
    values = draw(samples)
    w = draw(st.lists(weights, min_size=len(values), max_size=len(values)))
    return WeightedSampleSet(values, w)


class TestWeightedSampleSet:
    def test_default_weights(self):
        s = WeightedSampleSet([1.0, 2.0])
        np.testing.assert_array_equal(s.weights, [1.0, 1.0])
        assert len(s) == 2 and s.effective_size == 2.0

    @pytest.mark.parametrize("values, w", [
        ([], None),
        ([1.0, 2.0], [1.0]),
        ([1.0], [-1.0]),
        ([1.0, 2.0], [0.0, 0.0]),
        ([math.nan], None),
    ])
    def test_invalid(self, values, w):
        with pytest.raises(ValueError):
            WeightedSampleSet(values, w)

    def test_weighted_mean(self):
        mean, se = weighted_mean(WeightedSampleSet([1.0, 2.0, 3.0], [1.0, 1.0, 2.0]))
        assert mean == pytest.approx(2.25)
        assert se > 0


class TestEcdf:
    def test_hand_computed(self):
        s = WeightedSampleSet([1.0, 2.0, 3.0], [1.0, 1.0, 2.0])
        assert weighted_ecdf(s, 2.0) == pytest.approx(0.5)
        assert weighted_ecdf(s, 0.5) == 0.0
        assert weighted_ecdf(s, 3.0) == 1.0
        np.testing.assert_allclose(weighted_ecdf(s, [1.0, 2.5, 9.0]), [0.25, 0.5, 1.0])

    @settings(max_examples=50)
    @given(samples, st.floats(-12, 12))
    def test_unit_weights_give_ordinary_ecdf(self, values, x):
        s = WeightedSampleSet(values)
        assert weighted_ecdf(s, x) == pytest.approx(np.mean(np.array(values) <= x))

    @settings(max_examples=50)
    @given(weighted_sets())
    def test_monotone_and_bounded(self, s):
        grid = np.linspace(-11, 11, 50)
        f = weighted_ecdf(s, grid)
        assert np.all(np.diff(f) >= 0) and f[0] == 0.0 and f[-1] == pytest.approx(1.0)


class TestKolmogorovSmirnov:
    def test_identical(self):
        s = WeightedSampleSet([0.1, 0.5, 0.7])
        assert ks_two_sample(s, s) == 0.0

    def test_disjoint_point_masses(self):
        assert ks_two_sample(WeightedSampleSet([0.0]), WeightedSampleSet([1.0])) == 1.0

    def test_shifted_uniform_grids(self):
        a = WeightedSampleSet(np.linspace(0, 1, 1001))
        b = WeightedSampleSet(np.linspace(0.5, 1.5, 1001))
        assert ks_two_sample(a, b) == pytest.approx(0.5, abs=2e-3)

    @settings(max_examples=50)
    @given(weighted_sets(), weighted_sets())
    def test_symmetric_and_bounded(self, a, b):
        d = ks_two_sample(a, b)
        assert d == ks_two_sample(b, a)
        assert 0.0 <= d <= 1.0

    @settings(max_examples=50)
    @given(weighted_sets(), weighted_sets(), st.floats(0.1, 100))
    def test_weight_scale_invariance(self, a, b, c):
        scaled = WeightedSampleSet(a.values, a.weights * c)
        assert ks_two_sample(scaled, b) == pytest.approx(ks_two_sample(a, b), abs=1e-12)

    def test_classical_pvalue(self):
        rng = np.random.default_rng(0)
        a, b = WeightedSampleSet(rng.normal(size=500)), WeightedSampleSet(rng.normal(size=500))
        assert ks_pvalue(a, b) > 0.01
        with pytest.raises(ValueError):
            ks_pvalue(WeightedSampleSet([1.0, 2.0], [1.0, 2.0]), a)


class TestBootstrap:
    def test_same_law_not_rejected(self):
        rng = np.random.default_rng(1)
        a = WeightedSampleSet(rng.normal(size=400), rng.exponential(size=400))
        b = WeightedSampleSet(rng.normal(size=400), rng.exponential(size=400))
        assert bootstrap_pvalue(a, b, 999, rng=2) > 0.01

    def test_disjoint_supports_rejected(self):
        rng = np.random.default_rng(1)
        a = WeightedSampleSet(rng.uniform(0, 1, 1000), rng.exponential(size=1000))
        b = WeightedSampleSet(rng.uniform(2, 3, 1000), rng.exponential(size=1000))
        assert bootstrap_pvalue(a, b, 999, rng=2) < 0.01

    def test_pvalue_resolution(self):
        a, b = WeightedSampleSet([0.0, 0.1]), WeightedSampleSet([5.0, 5.1])
        assert bootstrap_pvalue(a, b, 200, rng=0) >= 1 / 201

    def test_reproducible(self):
        rng = np.random.default_rng(3)
        a = WeightedSampleSet(rng.normal(size=100), rng.exponential(size=100))
        b = WeightedSampleSet(rng.normal(size=100), rng.exponential(size=100))
        assert bootstrap_pvalue(a, b, 300, rng=7) == bootstrap_pvalue(a, b, 300, rng=7)

    def test_weight_scale_invariance(self):
        rng = np.random.default_rng(4)
        a = WeightedSampleSet(rng.normal(size=100), rng.exponential(size=100))
        b = WeightedSampleSet(rng.normal(size=100), rng.exponential(size=100))
        scaled = WeightedSampleSet(a.values, 10 * a.weights)
        assert bootstrap_pvalue(scaled, b, 300, rng=7) == pytest.approx(
            bootstrap_pvalue(a, b, 300, rng=7), abs=0.02)

    def test_too_few_resamples(self):
        with pytest.raises(ValueError):
            bootstrap_pvalue(WeightedSampleSet([1.0]), WeightedSampleSet([2.0]), 100)

    def test_calibrated_under_the_null(self):
        rejections = 0
        for seed in range(60):
            rng = np.random.default_rng(seed)
            a = WeightedSampleSet(rng.normal(size=150), rng.exponential(size=150))
            b = WeightedSampleSet(rng.normal(size=150), rng.exponential(size=150))
            rejections += bootstrap_pvalue(a, b, 200, rng=seed) < 0.05
        # 3 expected at the 5% level; 10 or more has probability below 0.2%
        assert rejections < 10


class TestMeanComparison:
    def test_identical_sets_pass(self):
        s = WeightedSampleSet([1.0, 2.0, 3.0])
        assert mean_ci_compare(s, s).passed

    def test_constant_sets_fail(self):
        report = mean_ci_compare(WeightedSampleSet([1.0, 1.0, 1.0]), WeightedSampleSet([2.0, 2.0, 2.0]))
        assert not report.passed
        assert report.checks[0].statistic == 1.0

    def test_allowance(self):
        a, b = WeightedSampleSet([1.0, 1.0]), WeightedSampleSet([1.5, 1.5])
        assert mean_ci_compare(a, b, allowance=0.5).passed

    def test_null_pass_rate(self):
        passes = 0
        for seed in range(1000):
            rng = np.random.default_rng(seed)
            a = WeightedSampleSet(rng.normal(size=50), rng.exponential(size=50))
            b = WeightedSampleSet(rng.normal(size=50), rng.exponential(size=50))
            passes += mean_ci_compare(a, b).passed
        assert passes >= 990


class TestReport:
    def test_pass_flag_is_derived(self):
        report = VerificationReport("x")
        report.add(Check("a", 0.5, 1.0))
        assert report.passed and report.status == "pass"
        report.add(Check("b", 0.001, 0.01, rule="ge"))
        assert not report.passed and report.status == "fail"

    def test_failure_allowance_per_group(self):
        report = VerificationReport("x", max_failures_per_group=1)
        report.add(Check("a", 2.0, 1.0, group="g"))
        report.add(Check("b", 2.0, 1.0, group="h"))
        assert report.passed
        report.add(Check("c", 2.0, 1.0, group="g"))
        assert not report.passed
        assert report.group_failures() == {"g": 2, "h": 1}

    def test_inconclusive(self):
        report = VerificationReport("x", counts={"samples": 100, "rejected": 3}, rejection_cap=0.02)
        assert report.status == "inconclusive"
        report.counts["rejected"] = 2
        assert report.status == "pass"

    def test_diagnostics_do_not_gate(self):
        report = VerificationReport("x", diagnostics=[Check("d", 5.0, 1.0)])
        assert report.passed
        assert any("[diag]" in line for line in report.summary_lines())

    def test_round_trip(self):
        report = VerificationReport("x", counts={"samples": 10}, seeds={"master_seed": 3},
                                    notes=["n"], diagnostics=[Check("d", 1.0, 2.0)])
        report.add(Check("a", 0.2, 0.01, rule="ge", group="g", details={"ks": 0.1}))
        again = VerificationReport.from_dict(report.to_dict())
        assert again.to_dict() == report.to_dict()

    def test_unknown_rule(self):
        with pytest.raises(ValueError):
            _ = Check("a", 1.0, 1.0, rule="eq").passed
