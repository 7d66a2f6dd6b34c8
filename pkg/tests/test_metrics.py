from fractions import Fraction

import pytest
from hypothesis import given

from lexieval.metrics import (
    delta_rr,
    esl1,
    recall_level_utilities,
    reciprocal_rank,
    rr_at_level,
)
from lexieval.model import PositionVector, ShapeError

from strategies import vector_pairs


def pv(*positions, R=None):
    return PositionVector(tuple(positions), R if R is not None else len(positions))


class TestReciprocalRank:
    @pytest.mark.parametrize("vec, expected", [
        (pv(1, 4, 5), Fraction(1)),
        (pv(3, 5, 9), Fraction(1, 3)),
        (pv(R=2), Fraction(0)),
    ])
    def test_values(self, vec, expected):
        assert reciprocal_rank(vec) == expected


class TestESL:
    def test_values(self):
        assert esl1(pv(3, 5, 9)) == 3
        assert esl1(pv(R=1)) is None
        assert esl1(pv(1)) == 1


class TestRRAtLevel:
    def test_retrieved(self):
        assert rr_at_level(pv(2, 4), 2) == Fraction(1, 4)
        assert rr_at_level(pv(1, 2, 3), 1) == 1

    def test_unretrieved(self):
        assert rr_at_level(pv(2, 4, R=3), 3) == 0

    def test_out_of_range(self):
        with pytest.raises(ShapeError):
            rr_at_level(pv(2, 4), 3)
        with pytest.raises(ShapeError):
            rr_at_level(pv(2, 4), 0)


class TestDeltaRR:
    def test_values(self):
        assert delta_rr(pv(1), pv(2), 1) == Fraction(1, 2)
        assert delta_rr(pv(2, 8), pv(2, 4), 2) == Fraction(-1, 8)
        assert delta_rr(pv(3, 7), pv(3, 7), 2) == 0

    def test_mismatched_relevant(self):
        with pytest.raises(ShapeError):
            delta_rr(pv(1, R=2), pv(1, R=3), 1)


@given(vector_pairs())
def test_rr_and_esl_induce_same_order(pair):
    x, y = pair
    inf = float("inf")
    ex = esl1(x) if esl1(x) is not None else inf
    ey = esl1(y) if esl1(y) is not None else inf
    assert (reciprocal_rank(x) > reciprocal_rank(y)) == (ex < ey)


@given(vector_pairs())
def test_utilities_non_increasing(pair):
    for v in pair:
        u = recall_level_utilities(v)
        assert len(u) == v.total_relevant
        assert all(a >= b for a, b in zip(u, u[1:]))
