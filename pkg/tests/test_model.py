from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lexieval.model import (
    DuplicateError,
    Judgments,
    LexiEvalError,
    PositionVector,
    Preference,
    RunRanking,
    ShapeError,
    order_submission,
    position_vector,
)


def judgments(rel, topic="q1"):
    return Judgments({topic: {d: 1 for d in rel}})


class TestPositionVector:
    def test_single_relevant(self):
        pv = position_vector(RunRanking("r", {"q1": ["d1", "d2", "d3"]}), judgments({"d2"}), "q1")
        assert pv.positions == (2,)
        assert pv.total_relevant == 1

    def test_unretrieved_relevant(self):
        pv = position_vector(RunRanking("r", {"q1": ["d1", "d2", "d3"]}), judgments({"d9"}), "q1")
        assert pv.positions == ()
        assert pv.total_relevant == 1

    def test_mixed(self):
        pv = position_vector(RunRanking("r", {"q1": ["d1", "d2", "d3"]}), judgments({"d1", "d3", "d9"}), "q1")
        assert pv.positions == (1, 3)
        assert pv.total_relevant == 3
        assert pv.unretrieved == 1

    def test_unknown_topic(self):
        with pytest.raises(LexiEvalError, match="topic has no judgments"):
            position_vector(RunRanking("r", {}), judgments({"d1"}), "q9")

    def test_missing_topic_in_run_is_empty(self):
        pv = position_vector(RunRanking("r", {"other": ["d1"]}), judgments({"d1"}), "q1")
        assert pv.positions == ()

    def test_threshold(self):
        j = Judgments({"q1": {"a": 1, "b": 2, "c": 0}}, binarization_threshold=2)
        assert j.relevant_set("q1") == {"b"}
        assert j.with_threshold(1).relevant_set("q1") == {"a", "b"}

    def test_invalid_vectors(self):
        with pytest.raises(ShapeError):
            PositionVector((3, 2), 2)
        with pytest.raises(ShapeError):
            PositionVector((1, 2, 3), 2)
        with pytest.raises(ShapeError):
            PositionVector((0,), 1)

    @given(
        n_docs=st.integers(min_value=1, max_value=30),
        rel=st.sets(st.integers(min_value=0, max_value=40), max_size=15),
        data=st.data(),
    )
    def test_nonrelevant_shuffle_invariance(self, n_docs, rel, data):
        docs = [f"d{i}" for i in range(n_docs)]
        j = Judgments({"q": {f"d{i}": 1 for i in rel}})
        relset = j.relevant_set("q")
        pv = position_vector(RunRanking("r", {"q": docs}), j, "q")
        slots = [i for i, d in enumerate(docs) if d not in relset]
        perm = data.draw(st.permutations([docs[i] for i in slots]))
        shuffled = list(docs)
        for i, d in zip(slots, perm):
            shuffled[i] = d
        assert position_vector(RunRanking("r", {"q": shuffled}), j, "q") == pv
        assert pv.retrieved + pv.unretrieved == pv.total_relevant


class TestOrderSubmission:
    def test_by_score(self):
        assert order_submission([("dB", 2, 1.0), ("dA", 1, 2.0)]) == ("dA", "dB")

    def test_score_tie_broken_by_docid_descending(self):
        assert order_submission([("dA", 1, 1.0), ("dB", 2, 1.0)]) == ("dB", "dA")

    def test_duplicate(self):
        with pytest.raises(DuplicateError, match="dA"):
            order_submission([("dA", 1, 1.0), ("dA", 2, 0.5)])

    def test_trust_rank(self):
        rows = [("dA", 2, 5.0), ("dB", 1, 1.0)]
        assert order_submission(rows, trust_rank=True) == ("dB", "dA")


class TestRunRanking:
    def test_duplicate_document(self):
        with pytest.raises(DuplicateError):
            RunRanking("r", {"q": ["a", "b", "a"]})

    def test_depth(self):
        assert RunRanking("r", {"q": ["a", "b"]}).depth == 2
        with pytest.raises(ShapeError):
            RunRanking("r", {"q": ["a", "b"]}, depth=1)


class TestPreference:
    def test_consistency(self):
        Preference(2, 1, Fraction(1, 12))
        Preference(None, 0, Fraction(0))
        with pytest.raises(ValueError):
            Preference(None, 1, Fraction(1, 2))
        with pytest.raises(ValueError):
            Preference(1, -1, Fraction(1, 2))
        with pytest.raises(ValueError):
            Preference(1, 0, Fraction(0))
