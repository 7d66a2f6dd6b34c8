"""Reading and writing TREC run/qrels files, plus synthetic benchmarks.

Run rows are ``<topic> <Q0> <doc> <rank> <score> <tag>`` and qrels rows are
``<topic> <iter> <doc> <grade>``.  Any run of spaces or tabs separates
fields; blank lines are skipped.
"""

from __future__ import annotations

import math
import os
from collections import defaultdict
from pathlib import Path
from typing import IO, Iterable, Iterator, Optional, Sequence, Union

from .model import DuplicateError, Judgments, ParseError, RunRanking, order_submission
from .rng import SplitMix64, derive

PathLike = Union[str, os.PathLike]


def _rows(stream: Iterable[str], width: int, kind: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, line in enumerate(stream, start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != width:
            raise ParseError(f"{kind} line {lineno}: expected {width} fields, got {len(fields)}")
        yield lineno, fields


def parse_run(stream: Iterable[str], trust_rank: bool = False, depth: Optional[int] = None) -> RunRanking:
    """Parse a six-column run into a :class:`RunRanking`."""
    per_topic: dict[str, list[tuple[str, int, float]]] = defaultdict(list)
    tag = None
    for lineno, (topic, _, doc, rank, score, run_tag) in _rows(stream, 6, "run"):
        try:
            rank_value = int(rank)
            score_value = float(score)
        except ValueError as exc:
            raise ParseError(f"run line {lineno}: {exc}") from None
        if math.isnan(score_value):
            raise ParseError(f"run line {lineno}: score is NaN")
        if tag is None:
            tag = run_tag
        elif run_tag != tag:
            raise ParseError(f"run line {lineno}: run tag {run_tag!r} differs from {tag!r}")
        per_topic[topic].append((doc, rank_value, score_value))
    if tag is None:
        raise ParseError("run contains no rows")
    rankings = {}
    for topic, rows in per_topic.items():
        try:
            rankings[topic] = order_submission(rows, trust_rank=trust_rank)
        except DuplicateError as exc:
            raise DuplicateError(f"topic {topic!r}: {exc}") from None
    if depth is not None:
        rankings = {t: docs[:depth] for t, docs in rankings.items()}
    return RunRanking(tag, rankings, depth)


def parse_qrels(stream: Iterable[str], binarization_threshold: int = 1) -> Judgments:
    """Parse a four-column qrels file into :class:`Judgments`."""
    grades: dict[str, dict[str, int]] = defaultdict(dict)
    for lineno, (topic, _, doc, grade) in _rows(stream, 4, "qrels"):
        try:
            value = int(grade)
        except ValueError:
            raise ParseError(f"qrels line {lineno}: grade {grade!r} is not an integer") from None
        if value < 0:
            raise ParseError(f"qrels line {lineno}: negative grade {value}")
        if doc in grades[topic]:
            raise DuplicateError(f"qrels line {lineno}: duplicate judgment for ({topic}, {doc})")
        grades[topic][doc] = value
    return Judgments(dict(grades), binarization_threshold)


def write_run(run: RunRanking, stream: IO[str]) -> None:
    """Serialize ``run`` with rank ``i`` and score ``n - i + 1`` per topic."""
    for topic in sorted(run.rankings):
        docs = run.rankings[topic]
        n = len(docs)
        for i, doc in enumerate(docs, start=1):
            stream.write(f"{topic} Q0 {doc} {i} {n - i + 1} {run.run_tag}\n")


def write_qrels(judgments: Judgments, stream: IO[str]) -> None:
    for topic in judgments.sorted_topics():
        docs = judgments.grades[topic]
        for doc in sorted(docs):
            stream.write(f"{topic} 0 {doc} {docs[doc]}\n")


def read_run(path: PathLike, trust_rank: bool = False, depth: Optional[int] = None) -> RunRanking:
    with open(path, encoding="utf-8") as f:
        try:
            return parse_run(f, trust_rank=trust_rank, depth=depth)
        except ParseError as exc:
            raise type(exc)(f"{path}: {exc}") from None


def read_qrels(path: PathLike, binarization_threshold: int = 1) -> Judgments:
    with open(path, encoding="utf-8") as f:
        try:
            return parse_qrels(f, binarization_threshold)
        except ParseError as exc:
            raise type(exc)(f"{path}: {exc}") from None


def read_runs(paths: Sequence[PathLike], trust_rank: bool = False, depth: Optional[int] = None) -> list[RunRanking]:
    """Load runs from files and/or directories (every regular file inside, sorted by name)."""
    files: list[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(q for q in p.iterdir() if q.is_file() and not q.name.startswith(".")))
        else:
            files.append(p)
    runs = [read_run(f, trust_rank=trust_rank, depth=depth) for f in files]
    tags = [r.run_tag for r in runs]
    if len(set(tags)) != len(tags):
        dup = sorted(t for t in set(tags) if tags.count(t) > 1)
        raise DuplicateError(f"duplicate run tags: {', '.join(dup)}")
    return sorted(runs, key=lambda r: r.run_tag)


def synth_generate(
    n_topics: int,
    relevant: int,
    depth: int,
    n_runs: int,
    quality: Union[float, Sequence[float]],
    seed: int,
    corpus_size: Optional[int] = None,
    boost: float = 20.0,
) -> tuple[Judgments, list[RunRanking]]:
    """Generate a synthetic benchmark.

    Each topic has ``corpus_size`` documents of which ``relevant`` are
    relevant (grade 1).  A run orders the corpus by weighted sampling without
    replacement (Efraimidis-Spirakis keys ``log(u) / w``), where non-relevant
    documents have weight 1 and relevant ones ``1 + boost * quality``, and
    keeps the top ``depth``.  ``quality`` may be a single value or one per
    run.  With quality 0 every arrangement of relevant positions is equally
    likely.

    The corpus defaults to ``2 * max(depth, relevant)`` documents.  Topic
    ``t`` draws its relevant set from stream ``derive(seed, t)`` and run
    ``r`` draws its keys for that topic from ``derive(seed, t, r)``.
    """
    if min(n_topics, relevant, depth, n_runs) < 1:
        raise ValueError("n_topics, relevant, depth and n_runs must all be >= 1")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    if corpus_size is None:
        corpus_size = 2 * max(depth, relevant)
    if relevant > corpus_size:
        raise ValueError(f"relevant={relevant} exceeds corpus_size={corpus_size}")
    qualities = [float(quality)] * n_runs if isinstance(quality, (int, float)) else [float(q) for q in quality]
    if len(qualities) != n_runs:
        raise ValueError(f"expected {n_runs} quality values, got {len(qualities)}")
    if any(not 0.0 <= q <= 1.0 for q in qualities):
        raise ValueError("quality must lie in [0, 1]")
    if boost < 0:
        raise ValueError("boost must be non-negative")

    tw, dw, rw = len(str(n_topics)), len(str(corpus_size - 1)), len(str(n_runs))
    topics = [f"t{i + 1:0{tw}d}" for i in range(n_topics)]
    docs = [f"d{j:0{dw}d}" for j in range(corpus_size)]
    tags = [f"synth{r + 1:0{rw}d}" for r in range(n_runs)]

    grades: dict[str, dict[str, int]] = {}
    rankings: list[dict[str, tuple[str, ...]]] = [{} for _ in range(n_runs)]
    for ti, topic in enumerate(topics):
        rel_idx = set(SplitMix64(derive(seed, ti)).sample(range(corpus_size), relevant))
        grades[topic] = {docs[j]: 1 for j in sorted(rel_idx)}
        for r, q in enumerate(qualities):
            rng = SplitMix64(derive(seed, ti, r))
            w_rel = 1.0 + boost * q
            keys = []
            for j in range(corpus_size):
                u = 1.0 - rng.random()
                w = w_rel if j in rel_idx else 1.0
                keys.append((math.log(u) / w, -j))
            keys.sort(reverse=True)
            rankings[r][topic] = tuple(docs[-neg] for _, neg in keys[:depth])
    judgments = Judgments(grades)
    runs = [RunRanking(tag, rk, depth) for tag, rk in zip(tags, rankings)]
    return judgments, runs


def write_synth(judgments: Judgments, runs: Sequence[RunRanking], out_dir: PathLike) -> list[Path]:
    """Write ``qrels.txt`` and ``runs/<tag>.run`` under ``out_dir``."""
    out = Path(out_dir)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    written = [out / "qrels.txt"]
    with open(written[0], "w", encoding="utf-8", newline="\n") as f:
        write_qrels(judgments, f)
    for run in runs:
        path = out / "runs" / f"{run.run_tag}.run"
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            write_run(run, f)
        written.append(path)
    return written
