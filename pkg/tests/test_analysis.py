import math
import random

import pytest

from catsearch.analysis import (
    FrustrationMeasure,
    FunRelation,
    dominates,
    instance_lower_bound,
    measure,
    optimality_ratio,
    paper_relation,
    pareto_front,
    popcount,
    predicted,
    zeroes_below_msb,
)
from catsearch.harness import sweep_measures
from catsearch.strategies import StrategyKind, run_to_completion
from catsearch.subject import AbilityProfile

FM = FrustrationMeasure


def trace_of(kind, n, p):
    return run_to_completion(kind, n, AbilityProfile.deterministic(p, n)).trace


class TestMeasure:
    def test_fun_example(self):
        assert measure(trace_of(StrategyKind.FUN, 16, 5)) == FM(2, 6)

    def test_empty_trace(self):
        assert measure(()) == FM(0, 0)

    def test_sequential_example(self):
        assert measure(trace_of(StrategyKind.SEQUENTIAL, 8, 3)) == FM(1, 4)

    def test_invalid_counts_rejected(self):
        with pytest.raises(ValueError):
            FM(3, 2)
        with pytest.raises(ValueError):
            FM(-1, 2)


class TestPaperRelation:
    # The literal relation table, all three clauses plus the intentional
    # asymmetry: strictly-worse-in-both is merely non-comparable.
    TABLE = [
        (FM(1, 5), FM(2, 6), FunRelation.MORE_FUN),
        (FM(2, 6), FM(1, 5), FunRelation.NON_COMPARABLE),
        (FM(2, 5), FM(1, 5), FunRelation.LESS_FUN),
        (FM(1, 6), FM(1, 5), FunRelation.LESS_FUN),
        (FM(2, 5), FM(2, 5), FunRelation.NON_COMPARABLE),
        (FM(0, 3), FM(4, 9), FunRelation.MORE_FUN),
        (FM(1, 7), FM(2, 5), FunRelation.NON_COMPARABLE),
    ]

    @pytest.mark.parametrize("a,b,expected", TABLE)
    def test_table(self, a, b, expected):
        assert paper_relation(a, b) is expected

    def test_more_fun_implies_dominates_random(self):
        rng = random.Random(7)
        for _ in range(10_000):
            total_a, total_b = rng.randrange(0, 30), rng.randrange(0, 30)
            a = FM(rng.randrange(0, total_a + 1), total_a)
            b = FM(rng.randrange(0, total_b + 1), total_b)
            if paper_relation(a, b) is FunRelation.MORE_FUN:
                assert dominates(a, b)


class TestDominates:
    def test_examples(self):
        assert dominates(FM(1, 5), FM(2, 6))
        assert not dominates(FM(1, 5), FM(1, 5))
        assert not dominates(FM(2, 5), FM(1, 6))
        assert not dominates(FM(1, 6), FM(2, 5))

    def test_strict_partial_order_random_triples(self):
        rng = random.Random(13)
        for _ in range(10_000):
            measures = []
            for _ in range(3):
                total = rng.randrange(0, 25)
                measures.append(FM(rng.randrange(0, total + 1), total))
            a, b, c = measures
            assert not dominates(a, a)
            if dominates(a, b):
                assert not dominates(b, a)
            if dominates(a, b) and dominates(b, c):
                assert dominates(a, c)


class TestParetoFront:
    def test_worked_example(self):
        points = [
            (StrategyKind.SEQUENTIAL, FM(1, 6)),
            (StrategyKind.FUN, FM(2, 6)),
            (StrategyKind.BINARY, FM(3, 3)),
        ]
        front = pareto_front(points)
        assert [kind for kind, _ in front] == [
            StrategyKind.SEQUENTIAL,
            StrategyKind.BINARY,
        ]

    def test_singleton(self):
        points = [(StrategyKind.FUN, FM(2, 6))]
        assert pareto_front(points) == points

    def test_all_equal_all_retained(self):
        points = [(kind, FM(1, 4)) for kind in StrategyKind]
        assert pareto_front(points) == points

    def test_enumeration_order(self):
        points = [
            (StrategyKind.FRUSTRATING, FM(1, 4)),
            (StrategyKind.SEQUENTIAL, FM(1, 4)),
        ]
        assert [kind for kind, _ in pareto_front(points)] == [
            StrategyKind.SEQUENTIAL,
            StrategyKind.FRUSTRATING,
        ]


class TestBitCounts:
    def test_popcount(self):
        assert popcount(5) == 2
        assert popcount(0) == 0
        assert popcount(255) == 8

    def test_zeroes_below_msb(self):
        assert zeroes_below_msb(8) == 3
        assert zeroes_below_msb(1) == 0
        assert zeroes_below_msb(0) == 0
        assert zeroes_below_msb(5) == 1

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            popcount(-1)
        with pytest.raises(ValueError):
            zeroes_below_msb(-3)


class TestPredicted:
    def test_fun_negatives_is_popcount(self):
        assert predicted(StrategyKind.FUN, 16, 5).negatives_pred == 2.0

    def test_binary_is_log_n(self):
        for p in (0, 3, 16):
            curve = predicted(StrategyKind.BINARY, 16, p)
            assert curve.negatives_pred == 4.0
            assert curve.total_pred == 5.0

    def test_frustrating_negatives_is_zeroes(self):
        assert predicted(StrategyKind.FRUSTRATING, 16, 8).negatives_pred == 3.0

    def test_log_terms_clamp_at_zero(self):
        curve = predicted(StrategyKind.DOUBLING, 16, 0)
        assert curve.negatives_pred == 1.0
        assert curve.total_pred == 1.0
        assert predicted(StrategyKind.SEQUENTIAL, 16, 0).total_pred == 0.0

    def test_curves_non_negative(self):
        for kind in StrategyKind:
            for p in range(0, 17):
                curve = predicted(kind, 16, p)
                assert curve.negatives_pred >= 0.0
                assert curve.total_pred >= 0.0

    def test_sequential_paper_curve(self):
        curve = predicted(StrategyKind.SEQUENTIAL, 16, 9)
        assert curve.negatives_pred == 1.0
        assert curve.total_pred == 8.0


class TestInstanceLowerBound:
    def test_extremes(self):
        assert instance_lower_bound(8, 0) == FM(1, 1)
        assert instance_lower_bound(8, 8) == FM(0, 1)
        assert instance_lower_bound(8, 3) == FM(1, 2)

    def test_every_trace_at_least_bound(self):
        for kind in StrategyKind:
            for n in (1, 2, 9, 16):
                for p in range(n + 1):
                    m = measure(trace_of(kind, n, p))
                    lb = instance_lower_bound(n, p)
                    assert m.negatives >= lb.negatives
                    assert m.total >= lb.total


@pytest.fixture(scope="module")
def measures_256():
    return {kind: sweep_measures(kind, 256) for kind in StrategyKind}


class TestOptimalityRatio:
    def test_sequential_negatives_ratio_is_one(self, measures_256):
        ratio = optimality_ratio(StrategyKind.SEQUENTIAL, 256, measures_256)
        assert ratio.negatives_ratio == 1.0

    def test_fun_ratio_grows_at_all_ones_threshold(self, measures_256):
        # p = 255 pays popcount(255) = 8 fails while the down-galloper needs
        # one; p = 254 ties (popcount 7 plus the even correction) and is hit
        # first by the argmax scan.
        ratio = optimality_ratio(StrategyKind.FUN, 256, measures_256)
        assert ratio.negatives_ratio >= 8.0
        assert ratio.negatives_argmax_p in (254, 255)

    def test_frustrating_ratio_grows_at_power_of_two(self, measures_256):
        ratio = optimality_ratio(StrategyKind.FRUSTRATING, 256, measures_256)
        assert ratio.negatives_ratio >= 6.0

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            optimality_ratio(StrategyKind.FUN, 1)

    def test_total_ratio_bounded_below_by_one(self, measures_256):
        for kind in StrategyKind:
            ratio = optimality_ratio(kind, 256, measures_256)
            assert ratio.total_ratio >= 1.0


class TestPredictedVersusEmpirical:
    def test_sequential_negatives_match_for_interior_p(self):
        n = 64
        for p in range(1, n):
            m = measure(trace_of(StrategyKind.SEQUENTIAL, n, p))
            assert m.negatives == int(
                predicted(StrategyKind.SEQUENTIAL, n, p).negatives_pred
            )

    def test_binary_total_bound(self):
        for n in (3, 7, 16, 100, 1023):
            cap = math.ceil(math.log2(n + 1))
            for p in range(0, n + 1, max(1, n // 19)):
                m = measure(trace_of(StrategyKind.BINARY, n, p))
                assert m.total <= cap
                assert m.negatives <= m.total
