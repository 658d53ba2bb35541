import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from biasbound import measures as ms
from biasbound import sensitivity as sn
from biasbound.classify import (BoundVerdict, Direction, InteractionSign,
                                MonotoneSign, QualitativeAssumptions, Scale, classify)
from biasbound.errors import ValidationError, ZeroCellError
from biasbound.sensitivity import IntervalEstimate, ObservedTable

from conftest import random_pairs

Z975 = 1.959963984540054


class TestAdjustOR:
    def test_reported_estimate_unchanged(self):
        assert sn.adjust_or(1.42, 1.0) == 1.42

    def test_recovers_independence(self):
        assert sn.adjust_or(1 / 3, 1 / 3) == pytest.approx(1.0)

    def test_arithmetic(self):
        assert sn.adjust_or(2.0, 0.5) == 4.0

    @pytest.mark.parametrize("args", [(0.0, 1.0), (1.0, -1.0), (float("inf"), 1.0)])
    def test_non_positive(self, args):
        with pytest.raises(ValidationError):
            sn.adjust_or(*args)

    def test_round_trip(self):
        for t, s in random_pairs(1000, seed=3):
            assert sn.adjust_or(ms.selected_or(t, s), ms.inter_rr(s)) == \
                pytest.approx(ms.true_or(t), rel=1e-10)


class TestAdjustInterval:
    def test_range_below_one(self):
        r = sn.adjust_interval(IntervalEstimate(1.42, 1.42, 1.42), (0.8, 1.0))
        assert r.point_lo == pytest.approx(1.42)
        assert r.point_hi == pytest.approx(1.775)

    def test_range_above_one(self):
        r = sn.adjust_interval(IntervalEstimate(1.42, 1.42, 1.42), (1.0, 1.25))
        assert (r.point_lo, r.point_hi) == pytest.approx((1.136, 1.42))

    def test_degenerate(self):
        est = IntervalEstimate(1.42, 1.1, 1.9)
        r = sn.adjust_interval(est, (1.0, 1.0))
        assert (r.point_lo, r.point_hi, r.lo, r.hi) == (1.42, 1.42, 1.1, 1.9)

    @given(st.floats(0.1, 10), st.floats(0.1, 10))
    def test_point_range_matches_adjust_or(self, point, rr):
        est = IntervalEstimate(point, point / 2, point * 2)
        r = sn.adjust_interval(est, (rr, rr))
        assert r.point_lo == r.point_hi == sn.adjust_or(point, rr)
        assert r.lo == sn.adjust_or(est.lo, rr)
        assert r.hi == sn.adjust_or(est.hi, rr)

    @given(st.floats(0.2, 5), st.floats(1.0, 2.0))
    def test_monotone(self, lo, factor):
        est = IntervalEstimate(1.5, 1.0, 2.0)
        narrow = sn.adjust_interval(est, (lo, lo * 1.1))
        wide = sn.adjust_interval(est, (lo, lo * 1.1 * factor))
        assert wide.lo <= narrow.lo and wide.hi == narrow.hi

    def test_invalid_range(self):
        with pytest.raises(ValidationError):
            sn.adjust_interval(IntervalEstimate(1, 1, 1), (1.2, 0.8))
        with pytest.raises(ValidationError):
            sn.adjust_interval(IntervalEstimate(1, 1, 1), (0.0, 0.8))


class TestWoolf:
    def test_hand_evaluation(self):
        est = sn.woolf_ci(ObservedTable(10, 20, 15, 40), 0.95)
        se = math.sqrt(1 / 10 + 1 / 20 + 1 / 15 + 1 / 40)
        assert est.point == pytest.approx(4 / 3, rel=1e-12)
        assert est.lo == pytest.approx(math.exp(math.log(4 / 3) - Z975 * se), abs=1e-6)
        assert est.hi == pytest.approx(math.exp(math.log(4 / 3) + Z975 * se), abs=1e-6)
        assert (round(est.lo, 3), round(est.hi, 3)) == (0.509, 3.495)

    def test_quantile(self):
        assert sn.normal_quantile(0.975) == pytest.approx(Z975, abs=1e-8)
        assert sn.normal_quantile(0.95) == pytest.approx(1.6448536269514722, abs=1e-8)

    def test_equal_counts(self):
        est = sn.woolf_ci(ObservedTable(7, 7, 7, 7))
        assert est.point == 1.0
        assert math.log(est.lo) == pytest.approx(-math.log(est.hi), abs=1e-12)

    def test_zero_cell(self):
        with pytest.raises(ZeroCellError):
            sn.woolf_ci(ObservedTable(0, 5, 5, 5))

    def test_continuity_correction(self):
        est = sn.woolf_ci(ObservedTable(0, 5, 5, 5), continuity_correction=True)
        assert est.point == pytest.approx(0.5 * 5.5 / (5.5 * 5.5))

    @given(st.lists(st.integers(1, 500), min_size=4, max_size=4), st.integers(2, 10))
    def test_contains_point_and_narrows(self, counts, k):
        est = sn.woolf_ci(ObservedTable(*counts))
        assert est.lo <= est.point <= est.hi
        bigger = sn.woolf_ci(ObservedTable(*(k * n for n in counts)))
        assert math.log(bigger.hi / bigger.lo) < math.log(est.hi / est.lo)

    def test_table_validation(self):
        with pytest.raises(ValidationError):
            ObservedTable(0, 0, 0, 0)
        with pytest.raises(ValidationError):
            ObservedTable(-1, 2, 3, 4)
        with pytest.raises(ValidationError):
            ObservedTable(1.5, 2, 3, 4)


class TestBoundReport:
    def test_reported_lower_bound(self):
        a = QualitativeAssumptions(MonotoneSign.NON_DECREASING, MonotoneSign.NON_DECREASING,
                                   Scale.RISK_RATIO, InteractionSign.NON_POSITIVE)
        rep = sn.bound_report(IntervalEstimate(1.42, 1.42, 1.42), classify(a))
        assert rep["statement"].startswith("OR_true ≥ 1.42")
        assert rep["or_true_lower"] == 1.42 and rep["or_true_upper"] is None

    def test_upper(self):
        v = BoundVerdict(Direction.UPPER, "R2b")
        rep = sn.bound_report(IntervalEstimate(2.0, 1.5, 2.5), v)
        assert rep["statement"].startswith("OR_true ≤ 2")
        assert "2.5" in rep["statement"]

    def test_equal(self):
        rep = sn.bound_report(IntervalEstimate(2.0, 1.5, 2.5), BoundVerdict(Direction.EQUAL, "R1"))
        assert rep["statement"].startswith("OR_true = 2")
        assert rep["or_true_lower"] == rep["or_true_upper"] == 2.0

    def test_indeterminate_names_conditions(self):
        a = QualitativeAssumptions(MonotoneSign.UNKNOWN, MonotoneSign.UNKNOWN,
                                   Scale.ODDS_RATIO, InteractionSign.UNKNOWN)
        rep = sn.bound_report(IntervalEstimate(2.0, 1.5, 2.5), classify(a))
        assert rep["statement"].startswith("no conclusion")
        assert len(rep["unmet_conditions"]) == 2
        assert rep["or_true_lower"] is None and rep["or_true_upper"] is None
