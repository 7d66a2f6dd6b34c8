"""Core domain types: judgments, run rankings, position vectors, preferences."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence


class LexiEvalError(Exception):
    """Base class for data errors raised by this package."""


class ParseError(LexiEvalError, ValueError):
    """Malformed run or qrels input."""


class DuplicateError(LexiEvalError, ValueError):
    """The same (topic, document) pair appears twice."""


class ShapeError(LexiEvalError, ValueError):
    """Inputs that cannot be combined, e.g. mismatched relevant counts."""


@dataclass(frozen=True)
class Judgments:
    """Graded relevance labels for a collection of topics.

    ``grades`` maps topic -> document -> grade.  A document is relevant when
    its grade is at least ``binarization_threshold``.
    """

    grades: Mapping[str, Mapping[str, int]]
    binarization_threshold: int = 1

    def __post_init__(self) -> None:
        if self.binarization_threshold < 1:
            raise ValueError("binarization_threshold must be >= 1")
        frozen = {}
        for topic, docs in self.grades.items():
            for doc, grade in docs.items():
                if grade < 0:
                    raise ParseError(f"negative grade {grade} for ({topic}, {doc})")
            frozen[topic] = MappingProxyType(dict(docs))
        object.__setattr__(self, "grades", MappingProxyType(frozen))
        object.__setattr__(self, "_relevant", {})

    @property
    def topics(self) -> frozenset[str]:
        return frozenset(self.grades)

    def sorted_topics(self) -> list[str]:
        return sorted(self.grades)

    def grade(self, topic: str, doc: str) -> int:
        return self.grades.get(topic, {}).get(doc, 0)

    def relevant_set(self, topic: str) -> frozenset[str]:
        cache = self._relevant  # type: ignore[attr-defined]
        if topic not in cache:
            if topic not in self.grades:
                raise LexiEvalError(f"topic has no judgments: {topic!r}")
            t = self.binarization_threshold
            cache[topic] = frozenset(d for d, g in self.grades[topic].items() if g >= t)
        return cache[topic]

    def numrel(self, topic: str) -> int:
        return len(self.relevant_set(topic))

    def with_threshold(self, threshold: int) -> "Judgments":
        return Judgments(self.grades, threshold)

    def restrict(self, topics: Iterable[str]) -> "Judgments":
        keep = set(topics)
        return Judgments({t: d for t, d in self.grades.items() if t in keep},
                         self.binarization_threshold)


@dataclass(frozen=True)
class RunRanking:
    """One system's ordered documents per topic, most preferred first."""

    run_tag: str
    rankings: Mapping[str, tuple[str, ...]]
    depth: Optional[int] = None

    def __post_init__(self) -> None:
        frozen = {}
        longest = 0
        for topic, docs in self.rankings.items():
            docs = tuple(docs)
            if len(set(docs)) != len(docs):
                seen: set[str] = set()
                for d in docs:
                    if d in seen:
                        raise DuplicateError(
                            f"duplicate document {d!r} for topic {topic!r} in run {self.run_tag!r}")
                    seen.add(d)
            frozen[topic] = docs
            longest = max(longest, len(docs))
        object.__setattr__(self, "rankings", MappingProxyType(frozen))
        if self.depth is None:
            object.__setattr__(self, "depth", longest)
        elif longest > self.depth:
            raise ShapeError(f"run {self.run_tag!r} retrieves {longest} documents, beyond depth {self.depth}")

    def ranking(self, topic: str) -> tuple[str, ...]:
        return self.rankings.get(topic, ())


@dataclass(frozen=True)
class PositionVector:
    """Sorted 1-based ranks of the retrieved relevant documents.

    Relevant documents that were not retrieved are absent from ``positions``
    and only show up through ``total_relevant``.
    """

    positions: tuple[int, ...]
    total_relevant: int
    corpus_size: Optional[int] = None

    def __post_init__(self) -> None:
        pos = tuple(self.positions)
        object.__setattr__(self, "positions", pos)
        if len(pos) > self.total_relevant:
            raise ShapeError(f"{len(pos)} positions but only {self.total_relevant} relevant")
        prev = 0
        for p in pos:
            if p <= prev:
                raise ShapeError(f"positions must be strictly increasing integers >= 1: {pos}")
            prev = p
        if self.corpus_size is not None and pos and pos[-1] > self.corpus_size:
            raise ShapeError(f"position {pos[-1]} beyond corpus size {self.corpus_size}")

    @property
    def retrieved(self) -> int:
        return len(self.positions)

    @property
    def unretrieved(self) -> int:
        return self.total_relevant - len(self.positions)


@dataclass(frozen=True)
class Preference:
    """Outcome of comparing two rankings.

    ``istar`` is the decisive recall level (None on a full tie), ``sign`` the
    direction and ``magnitude`` the reciprocal-rank difference at ``istar``.
    """

    istar: Optional[int]
    sign: int
    magnitude: Fraction = field(default=Fraction(0))

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")
        tied = self.sign == 0
        if tied != (self.istar is None) or tied != (self.magnitude == 0):
            raise ValueError("sign 0, istar None and magnitude 0 must coincide")
        if not tied and (self.magnitude > 0) != (self.sign > 0):
            raise ValueError("magnitude and sign disagree")


def position_vector(
    run: RunRanking,
    judgments: Judgments,
    topic: str,
    corpus_size: Optional[int] = None,
) -> PositionVector:
    """Ranks of ``topic``'s relevant documents within ``run``.

    A topic missing from the run is an empty ranking.
    """
    relevant = judgments.relevant_set(topic)
    ranking = run.ranking(topic)
    positions = tuple(i for i, doc in enumerate(ranking, start=1) if doc in relevant)
    return PositionVector(positions, len(relevant), corpus_size)


def order_submission(
    rows: Sequence[tuple[str, int, float]],
    trust_rank: bool = False,
) -> tuple[str, ...]:
    """Order one topic's ``(document, rank, score)`` rows.

    By default rows are sorted by score descending with ties broken by
    document identifier descending, as trec_eval does.  With ``trust_rank``
    the submitted rank field decides (ties by document ascending).
    """
    seen: set[str] = set()
    for doc, _, _ in rows:
        if doc in seen:
            raise DuplicateError(f"duplicate document {doc!r}")
        seen.add(doc)
    if trust_rank:
        ordered = sorted(rows, key=lambda r: (r[1], r[0]))
    else:
        ordered = sorted(rows, key=lambda r: (r[2], r[0]), reverse=True)
    return tuple(r[0] for r in ordered)


def position_table(
    runs: Sequence[RunRanking],
    judgments: Judgments,
    topics: Optional[Sequence[str]] = None,
) -> dict[str, dict[str, PositionVector]]:
    """Position vectors for every run and topic: ``table[run_tag][topic]``."""
    if topics is None:
        topics = judgments.sorted_topics()
    table: dict[str, dict[str, PositionVector]] = {}
    for run in runs:
        if run.run_tag in table:
            raise DuplicateError(f"duplicate run tag {run.run_tag!r}")
        table[run.run_tag] = {t: position_vector(run, judgments, t) for t in topics}
    return table
