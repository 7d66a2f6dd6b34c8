from fractions import Fraction
from itertools import combinations
from math import comb

import pytest

from lexieval.lexiprec import sgn_lexiprecision
from lexieval.model import LexiEvalError, PositionVector
from lexieval.theory import (
    distinct_rr1_values,
    enumerate_arrangements,
    psych_relevance_preference,
    psych_relevance_utilities,
    recall_level_preference,
    tie_curve,
    tie_probability,
    tie_probability_by_enumeration,
    top_utility_multiplicity,
    value_count_ratio,
)


def pv(*positions, R=None):
    return PositionVector(tuple(positions), R if R is not None else len(positions))


class TestTieProbability:
    def test_enumerated_examples(self):
        # Enumerate all C(5, 2) = 10 arrangements and count first positions.
        arr = list(combinations(range(1, 6), 2))
        assert sum(a[0] == 1 for a in arr) == 4
        assert sum(a[0] == 4 for a in arr) == 1
        assert tie_probability(5, 2, 1) == Fraction(4, 10)
        assert tie_probability(5, 2, 4) == Fraction(1, 10)

    @pytest.mark.parametrize("D", [1, 4, 9])
    def test_single_relevant_uniform(self, D):
        assert all(tie_probability(D, 1, r) == Fraction(1, D) for r in range(1, D + 1))

    def test_range(self):
        with pytest.raises(ValueError):
            tie_probability(5, 2, 5)
        with pytest.raises(ValueError):
            tie_probability(5, 2, 0)

    def test_sums_to_one(self):
        assert sum(tie_probability(20, 4, r) for r in range(1, 18)) == 1

    def test_curve_matches_closed_form(self):
        assert list(tie_curve(15, 4)) == [(r, tie_probability(15, 4, r)) for r in range(1, 13)]

    def test_enumeration_helper(self):
        assert tie_probability_by_enumeration(6, 3, 2) == tie_probability(6, 3, 2)


class TestValueCountRatio:
    def test_examples(self):
        assert value_count_ratio(10, 2, 0) == 1
        assert value_count_ratio(10, 2, 1) == Fraction(120, 45)
        assert value_count_ratio(10, 2, 2) == Fraction(210, 45)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            value_count_ratio(5, 3, 3)


class TestEnumerate:
    def test_examples(self):
        assert list(enumerate_arrangements(3, 2)) == [(1, 2), (1, 3), (2, 3)]
        assert list(enumerate_arrangements(4, 1)) == [(1,), (2,), (3,), (4,)]
        assert len(list(enumerate_arrangements(10, 3))) == comb(10, 3)

    def test_cap(self):
        with pytest.raises(LexiEvalError, match="cap"):
            enumerate_arrangements(40, 20)
        with pytest.raises(LexiEvalError):
            enumerate_arrangements(10, 3, cap=100)


class TestPsychRelevance:
    def test_example(self):
        x, y = pv(1, 3), pv(1, 4)
        assert psych_relevance_utilities(x) == [1, 1, Fraction(1, 3)]
        assert psych_relevance_utilities(y) == [1, 1, Fraction(1, 4)]
        assert psych_relevance_preference(x, y) == 1 == sgn_lexiprecision(x, y)

    def test_identical(self):
        assert psych_relevance_preference(pv(2, 5), pv(2, 5)) == 0

    def test_top_multiplicity(self):
        assert top_utility_multiplicity(pv(1, 3)) == 2
        assert top_utility_multiplicity(pv(2, 3, 9, R=5)) == 16

    def test_multiplicity_per_level(self):
        # level i is the best utility for 2**(R - i) users
        u = psych_relevance_utilities(pv(1, 2, 5, 7))
        for i, p in enumerate((1, 2, 5, 7), start=1):
            assert u.count(Fraction(1, p)) == 2 ** (4 - i)

    def test_unretrieved_users_get_zero(self):
        u = psych_relevance_utilities(pv(3, R=2))
        assert u == [Fraction(1, 3), Fraction(1, 3), 0]

    def test_bound(self):
        with pytest.raises(LexiEvalError):
            psych_relevance_utilities(PositionVector((), 21))


class TestRecallLevel:
    def test_examples(self):
        assert recall_level_preference(pv(2), pv(3)) == 1
        assert recall_level_preference(pv(R=2), pv(R=2)) == 0

    def test_exhaustive_small(self):
        arr = [pv(*a) for a in enumerate_arrangements(7, 3)]
        for x in arr:
            for y in arr:
                assert recall_level_preference(x, y) == sgn_lexiprecision(x, y)


@pytest.mark.parametrize("D, R", [(6, 2), (8, 3), (9, 5), (12, 1)])
def test_distinct_rr1_values(D, R):
    assert distinct_rr1_values(D, R) == D - R + 1
