import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from lexieval.ingest import (
    parse_qrels,
    parse_run,
    read_runs,
    synth_generate,
    write_qrels,
    write_run,
    write_synth,
)
from lexieval.model import DuplicateError, Judgments, ParseError, RunRanking, position_vector
from lexieval.theory import tie_probability


class TestParseRun:
    def test_single_row(self):
        run = parse_run(io.StringIO("q1 Q0 dA 1 2.5 sys1\n"))
        assert run.run_tag == "sys1"
        assert run.ranking("q1") == ("dA",)

    def test_wrong_field_count(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_run(io.StringIO("q1 Q0 dA 1 2.5 sys1\nq1 Q0 dB 2 1.0\n"))

    def test_duplicate(self):
        with pytest.raises(DuplicateError, match="dA"):
            parse_run(io.StringIO("q1 Q0 dA 1 2.5 s\nq1 Q0 dA 2 1.0 s\n"))

    def test_mixed_tags(self):
        with pytest.raises(ParseError, match="run tag"):
            parse_run(io.StringIO("q1 Q0 dA 1 2.5 s\nq1 Q0 dB 2 1.0 t\n"))

    def test_whitespace_and_blank_lines(self):
        text = "q1\tQ0  dA 1 2.5 s  \n\n   \nq1 Q0 dB\t2 3.0 s\n"
        assert parse_run(io.StringIO(text)).ranking("q1") == ("dB", "dA")

    def test_bad_number(self):
        with pytest.raises(ParseError, match="line 1"):
            parse_run(io.StringIO("q1 Q0 dA one 2.5 s\n"))

    def test_depth_truncates(self):
        run = parse_run(io.StringIO("q Q0 a 1 3 s\nq Q0 b 2 2 s\nq Q0 c 3 1 s\n"), depth=2)
        assert run.ranking("q") == ("a", "b")


class TestParseQrels:
    def test_grade(self):
        j = parse_qrels(io.StringIO("q1 0 dA 2\n"))
        assert j.grade("q1", "dA") == 2

    def test_duplicate(self):
        with pytest.raises(DuplicateError):
            parse_qrels(io.StringIO("q1 0 dA 1\nq1 0 dA 1\n"))

    def test_negative(self):
        with pytest.raises(ParseError, match="negative"):
            parse_qrels(io.StringIO("q1 0 dA -1\n"))

    def test_malformed(self):
        with pytest.raises(ParseError, match="line 1"):
            parse_qrels(io.StringIO("q1 0 dA\n"))


ident = st.text(alphabet="abcdefgXYZ0123456789_-.", min_size=1, max_size=6)


@given(st.dictionaries(ident, st.lists(ident, unique=True, max_size=8), max_size=5), ident)
def test_run_roundtrip(rankings, tag):
    run = RunRanking(tag, rankings)
    buf = io.StringIO()
    write_run(run, buf)
    if not any(rankings.values()):
        return
    back = parse_run(io.StringIO(buf.getvalue()))
    assert {t: d for t, d in back.rankings.items()} == {t: tuple(d) for t, d in rankings.items() if d}


@given(st.dictionaries(ident, st.dictionaries(ident, st.integers(0, 4), max_size=6), max_size=5))
def test_qrels_roundtrip(grades):
    j = Judgments(grades)
    buf = io.StringIO()
    write_qrels(j, buf)
    back = parse_qrels(io.StringIO(buf.getvalue()))
    assert {t: dict(d) for t, d in back.grades.items()} == {t: d for t, d in grades.items() if d}


class TestSynth:
    def test_deterministic_bytes(self, tmp_path):
        for name in ("a", "b"):
            j, runs = synth_generate(4, 3, 10, 3, [0.1, 0.5, 0.9], seed=7)
            write_synth(j, runs, tmp_path / name)
        for rel in ["qrels.txt", "runs/synth1.run", "runs/synth2.run", "runs/synth3.run"]:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_shape(self):
        j, runs = synth_generate(1, 3, 10, 2, 0.5, seed=1)
        assert len(runs) == 2
        assert len(j.topics) == 1
        assert all(len(r.ranking("t1")) == 10 for r in runs)
        assert j.numrel("t1") == 3

    def test_seed_changes_output(self):
        _, a = synth_generate(2, 3, 10, 1, 0.5, seed=1)
        _, b = synth_generate(2, 3, 10, 1, 0.5, seed=2)
        assert a[0].rankings != b[0].rankings

    def test_invalid(self):
        with pytest.raises(ValueError):
            synth_generate(0, 3, 10, 1, 0.5, seed=1)
        with pytest.raises(ValueError):
            synth_generate(1, 3, 10, 1, 1.5, seed=1)
        with pytest.raises(ValueError):
            synth_generate(1, 30, 10, 1, 0.5, seed=1, corpus_size=20)

    def test_quality_pulls_relevant_up(self):
        j, runs = synth_generate(40, 5, 20, 2, [0.0, 1.0], seed=3)
        mean_first = []
        for run in runs:
            firsts = [position_vector(run, j, t).positions[:1] for t in j.topics]
            mean_first.append(sum(f[0] if f else 21 for f in firsts) / len(firsts))
        assert mean_first[1] < mean_first[0]

    def test_quality_zero_matches_uniform_first_position(self):
        # Chi-square goodness of fit of the first relevant position against
        # the closed-form distribution C(D - r, R - 1) / C(D, R).
        D, R = 12, 3
        j, runs = synth_generate(3000, R, D, 1, 0.0, seed=2024, corpus_size=D)
        observed = [0] * (D - R + 1)
        for t in j.topics:
            observed[position_vector(runs[0], j, t).positions[0] - 1] += 1
        n = sum(observed)
        expected = [n * float(tie_probability(D, R, r)) for r in range(1, D - R + 2)]
        # pool the sparse tail so every expected count is >= 5
        while expected[-1] < 5:
            expected[-2] += expected.pop()
            observed[-2] += observed.pop()
        chi2 = sum((o - e) ** 2 / e for o, e in zip(observed, expected))
        p = stats.chi2.sf(chi2, len(expected) - 1)
        assert p > 0.001


def test_read_runs_directory(tmp_path):
    (tmp_path / "b.run").write_text("q Q0 x 1 1 beta\n")
    (tmp_path / "a.run").write_text("q Q0 y 1 1 alpha\n")
    runs = read_runs([tmp_path])
    assert [r.run_tag for r in runs] == ["alpha", "beta"]
    (tmp_path / "c.run").write_text("q Q0 y 1 1 alpha\n")
    with pytest.raises(DuplicateError):
        read_runs([tmp_path])
