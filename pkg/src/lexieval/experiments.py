"""Benchmark-level analyses over all pairs of runs.

Every analysis iterates over unordered run pairs (lexicographic by run tag)
and the judged topics that have at least one relevant document.  Results
are exact where they are counts or preference sums; only the final
percentages and regression statistics are floats.  All randomness flows
from :mod:`lexieval.rng`, so a seed reproduces a report byte for byte.
"""

from __future__ import annotations

import math
import statistics
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np

from .lexiprec import decide_positions, magnitude_at
from .model import Judgments, LexiEvalError, RunRanking
from .rng import SplitMix64, derive
from .stats import (
    DEFAULT_ALPHA,
    PairResult,
    TestResult,
    UndefinedStatistic,
    add_intercept,
    bonferroni,
    ols,
    paired_t_test,
    pearson,
    sign_test,
    tukey_hsd,
)

T = TypeVar("T")
R_ = TypeVar("R_")

METHODS = ("rr", "rrlp", "sgnlp")
TESTS = ("hsd", "paired")
DEFAULT_FRACTIONS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

Positions = tuple[int, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "rrlp"
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    n_samples: int = 10
    seed: int = 0
    alpha: float = DEFAULT_ALPHA
    binarization_threshold: int = 1
    stratified: bool = False

    def __post_init__(self) -> None:
        if self.scheme not in ("rrlp", "sgnlp", "rr"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if any(not 0.0 <= f < 1.0 for f in self.fractions):
            raise ValueError("removal fractions must lie in [0, 1)")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["fractions"] = list(self.fractions)
        return d


def pmap(fn: Callable[[T], R_], items: Sequence[T], threads: int = 1) -> list[R_]:
    """Ordered map, optionally over a thread pool; output never depends on ``threads``."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _pct(num: int, den: int) -> Optional[float]:
    return None if den == 0 else float(Fraction(100 * num, den))


class Benchmark:
    """Position tuples for every run on every evaluated topic.

    Topics are the judged topics with at least one relevant document
    (``topics`` overrides this).  A topic a run did not answer is an empty
    ranking.
    """

    def __init__(self, runs: Sequence[RunRanking], judgments: Judgments,
                 topics: Optional[Iterable[str]] = None) -> None:
        if topics is None:
            topics = [t for t in judgments.sorted_topics() if judgments.numrel(t) > 0]
        self.topics = sorted(topics)
        self.judgments = judgments
        self.tags = sorted(r.run_tag for r in runs)
        if len(set(self.tags)) != len(self.tags):
            raise LexiEvalError("duplicate run tags")
        self.numrel = {t: judgments.numrel(t) for t in self.topics}
        self.positions: dict[str, list[Positions]] = {}
        for run in runs:
            rows = []
            for t in self.topics:
                rel = judgments.relevant_set(t)
                rows.append(tuple(i for i, d in enumerate(run.ranking(t), start=1) if d in rel))
            self.positions[run.run_tag] = rows

    @property
    def pairs(self) -> list[tuple[str, str]]:
        return list(combinations(self.tags, 2))

    def require_pairs(self) -> None:
        if len(self.tags) < 2:
            raise LexiEvalError("analysis needs at least 2 runs")
        if not self.topics:
            raise LexiEvalError("no topic has a relevant document")


def _rr1(xs: Positions) -> Fraction:
    return Fraction(1, xs[0]) if xs else Fraction(0)


def _rr_level(xs: Positions, i: int) -> float:
    return 1.0 / xs[i - 1] if i <= len(xs) else 0.0


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def pair_values(xs: Positions, ys: Positions, method: str) -> Fraction:
    """Per-topic preference of x over y under ``method`` (rr, rrlp or sgnlp)."""
    if method == "rr":
        return _rr1(xs) - _rr1(ys)
    istar, sign = decide_positions(xs, ys)
    if istar is None:
        return Fraction(0)
    if method == "sgnlp":
        return Fraction(sign)
    if method == "rrlp":
        return magnitude_at(xs, ys, istar)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# ties


@dataclass
class TieCensus:
    comparisons: int
    rr1_ties: int
    lexi_ties: int
    tie_by_r1: dict[int, tuple[int, int]] = field(default_factory=dict)
    tie_by_level: dict[int, tuple[int, int]] = field(default_factory=dict)

    @property
    def rr1_tie_pct(self) -> Optional[float]:
        return _pct(self.rr1_ties, self.comparisons)

    @property
    def lexi_tie_pct(self) -> Optional[float]:
        return _pct(self.lexi_ties, self.comparisons)

    def rows(self) -> list[dict]:
        out = [{"table": "ties", "key": "comparisons", "value": self.comparisons},
               {"table": "ties", "key": "rr1_tie_pct", "value": self.rr1_tie_pct},
               {"table": "ties", "key": "lexi_tie_pct", "value": self.lexi_tie_pct}]
        for r1, (ties, total) in sorted(self.tie_by_r1.items()):
            out.append({"table": "tie_by_r1", "key": r1, "ties": ties, "total": total,
                        "value": float(Fraction(ties, total))})
        for lvl, (ties, total) in sorted(self.tie_by_level.items()):
            out.append({"table": "tie_by_level", "key": lvl, "ties": ties, "total": total,
                        "value": float(Fraction(ties, total))})
        return out


def _census_pair(bench: Benchmark, pair: tuple[str, str], max_level: int):
    a, b = pair
    comparisons = rr1_ties = lexi_ties = 0
    by_r1: Counter = Counter()
    by_r1_total: Counter = Counter()
    by_level: Counter = Counter()
    by_level_total: Counter = Counter()
    for ti, t in enumerate(bench.topics):
        xs, ys = bench.positions[a][ti], bench.positions[b][ti]
        comparisons += 1
        x1 = xs[0] if xs else None
        y1 = ys[0] if ys else None
        tie1 = x1 == y1
        rr1_ties += tie1
        lexi_ties += xs == ys
        # Conditioned on each side's first relevant position in turn.
        for r in (x1, y1):
            if r is not None:
                by_r1_total[r] += 1
                by_r1[r] += tie1
        for lvl in range(1, min(max_level, bench.numrel[t]) + 1):
            by_level_total[lvl] += 1
            px = xs[lvl - 1] if lvl <= len(xs) else None
            py = ys[lvl - 1] if lvl <= len(ys) else None
            by_level[lvl] += px == py
    return comparisons, rr1_ties, lexi_ties, by_r1, by_r1_total, by_level, by_level_total


def tie_census(runs: Sequence[RunRanking], judgments: Judgments, max_level: int = 20,
               threads: int = 1, bench: Optional[Benchmark] = None) -> TieCensus:
    """Tie rates of reciprocal rank and lexiprecision over all run pairs and topics.

    Also reports P(tie | first relevant position = r), counting each ordered
    side of a pair, and P(delta RR_i = 0) per recall level i over topics
    with at least i relevant documents.
    """
    bench = bench or Benchmark(runs, judgments)
    bench.require_pairs()
    parts = pmap(lambda p: _census_pair(bench, p, max_level), bench.pairs, threads)
    census = TieCensus(0, 0, 0)
    r1_t: Counter = Counter()
    r1_n: Counter = Counter()
    lv_t: Counter = Counter()
    lv_n: Counter = Counter()
    for c, t1, tl, br, brn, bl, bln in parts:
        census.comparisons += c
        census.rr1_ties += t1
        census.lexi_ties += tl
        r1_t.update(br)
        r1_n.update(brn)
        lv_t.update(bl)
        lv_n.update(bln)
    census.tie_by_r1 = {r: (r1_t[r], r1_n[r]) for r in sorted(r1_n)}
    census.tie_by_level = {i: (lv_t[i], lv_n[i]) for i in sorted(lv_n)}
    return census


def ecdf(levels: Iterable[int]) -> list[tuple[int, int, float]]:
    """``(level, count, cumulative fraction)`` for every level from 1 to the maximum."""
    counts = Counter(levels)
    if not counts:
        return []
    total = sum(counts.values())
    out = []
    running = 0
    for lvl in range(1, max(counts) + 1):
        running += counts.get(lvl, 0)
        out.append((lvl, counts.get(lvl, 0), float(Fraction(running, total))))
    return out


def istar_ecdf(runs: Sequence[RunRanking], judgments: Judgments, threads: int = 1,
               bench: Optional[Benchmark] = None) -> list[tuple[int, int, float]]:
    """ECDF of the decisive recall level over all decided (pair, topic) comparisons."""
    bench = bench or Benchmark(runs, judgments)
    bench.require_pairs()

    def levels(pair):
        a, b = pair
        out = []
        for xs, ys in zip(bench.positions[a], bench.positions[b]):
            istar, _ = decide_positions(xs, ys)
            if istar is not None:
                out.append(istar)
        return out

    found: list[int] = []
    for part in pmap(levels, bench.pairs, threads):
        found.extend(part)
    return ecdf(found)


# ---------------------------------------------------------------------------
# agreement


def masked_prefix_outcome(xs: Positions, ys: Positions) -> Optional[tuple[int, int, int]]:
    """``(target, suffix sgnLP, suffix delta RR)`` or None when delta RR_1 is 0.

    The predictors see only the positions after each side's top relevant item.
    """
    target = _sign(_rr1(xs) - _rr1(ys))
    if target == 0:
        return None
    sx, sy = xs[1:], ys[1:]
    return target, decide_positions(sx, sy)[1], _sign(_rr1(sx) - _rr1(sy))


def masked_prefix_agreement(runs: Sequence[RunRanking], judgments: Judgments, threads: int = 1,
                            bench: Optional[Benchmark] = None) -> dict:
    """Agreement of suffix-only predictors with the sign of delta RR_1.

    A tied suffix predicts 0 and counts as a disagreement.
    """
    bench = bench or Benchmark(runs, judgments)
    bench.require_pairs()

    def count(pair):
        a, b = pair
        n = lp = rr2 = 0
        for xs, ys in zip(bench.positions[a], bench.positions[b]):
            o = masked_prefix_outcome(xs, ys)
            if o is None:
                continue
            n += 1
            lp += o[1] == o[0]
            rr2 += o[2] == o[0]
        return n, lp, rr2

    n = lp = rr2 = 0
    for cn, clp, crr in pmap(count, bench.pairs, threads):
        n, lp, rr2 = n + cn, lp + clp, rr2 + crr
    if n == 0:
        raise LexiEvalError("no (pair, topic) with delta RR_1 != 0")
    return {"comparisons": n, "sgnlp_agreement_pct": _pct(lp, n), "drr2_agreement_pct": _pct(rr2, n)}


def _removal_count(fraction: float, n: int) -> int:
    # Fractions are read as their decimal literal so 0.29 * 100 gives 29.
    return math.floor(Fraction(repr(float(fraction))) * n)


def degrade_labels(judgments: Judgments, fraction: float, seed: int, stratified: bool = False) -> Judgments:
    """Drop ``floor(fraction * #relevant labels)`` relevant labels at random.

    Labels are drawn uniformly over the whole collection (sorted by topic,
    then document, before sampling); with ``stratified`` the floor count is
    applied topic by topic instead, each topic using stream
    ``derive(seed, topic index)``.  Dropped documents become unlabeled and so
    non-relevant.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must lie in [0, 1)")
    thr = judgments.binarization_threshold
    grades = {t: dict(d) for t, d in judgments.grades.items()}
    topics = judgments.sorted_topics()
    if stratified:
        for ti, t in enumerate(topics):
            rel = sorted(d for d, g in grades[t].items() if g >= thr)
            for d in SplitMix64(derive(seed, ti)).sample(rel, _removal_count(fraction, len(rel))):
                del grades[t][d]
    else:
        labels = [(t, d) for t in topics for d in sorted(grades[t]) if grades[t][d] >= thr]
        for t, d in SplitMix64(seed).sample(labels, _removal_count(fraction, len(labels))):
            del grades[t][d]
    return Judgments(grades, thr)


def degrade_queries(topics: Iterable[str], fraction: float, seed: int) -> list[str]:
    """Remove ``floor(fraction * #topics)`` topics at random; returns the survivors sorted."""
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must lie in [0, 1)")
    pool = sorted(topics)
    drop = set(SplitMix64(seed).sample(pool, _removal_count(fraction, len(pool))))
    kept = [t for t in pool if t not in drop]
    if not kept:
        raise LexiEvalError("query removal left no topics")
    return kept


def _agreement_sample(full: Benchmark, degraded: Benchmark, full_sign: dict, full_mean_sign: dict) -> dict:
    """Ranking and system agreement of each method on ``degraded`` with full-data delta RR_1."""
    topic_index = {t: i for i, t in enumerate(full.topics)}
    idx = [topic_index[t] for t in degraded.topics]
    rank_agree = Counter()
    rank_total = 0
    sys_agree = Counter()
    sys_total = 0
    rr1_ties = lexi_ties = comparisons = 0
    for a, b in full.pairs:
        px, py = degraded.positions[a], degraded.positions[b]
        sums = {m: Fraction(0) for m in METHODS}
        signs = full_sign[(a, b)]
        for di, fi in enumerate(idx):
            xs, ys = px[di], py[di]
            vals = {m: pair_values(xs, ys, m) for m in METHODS}
            comparisons += 1
            rr1_ties += vals["rr"] == 0
            lexi_ties += vals["sgnlp"] == 0
            for m in METHODS:
                sums[m] += vals[m]
            target = signs[fi]
            if target != 0:
                rank_total += 1
                for m in METHODS:
                    rank_agree[m] += _sign(vals[m]) == target
        target = full_mean_sign[(a, b)]
        if target != 0:
            sys_total += 1
            for m in METHODS:
                sys_agree[m] += _sign(sums[m]) == target
    out = {}
    for m in METHODS:
        out[("ranking", m)] = _pct(rank_agree[m], rank_total)
        out[("system", m)] = _pct(sys_agree[m], sys_total)
    out[("ties", "rr")] = _pct(rr1_ties, comparisons)
    out[("ties", "lexi")] = _pct(lexi_ties, comparisons)
    return out


def _summarize(values: list[Optional[float]]) -> tuple[Optional[float], Optional[float]]:
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    mean = math.fsum(vals) / len(vals)
    sd = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return mean, sd


def agreement_under_degradation(
    runs: Sequence[RunRanking],
    judgments: Judgments,
    config: ExperimentConfig,
    mode: str = "labels",
    threads: int = 1,
) -> list[dict]:
    """Agreement with full-data delta RR_1 after removing labels or queries.

    For every removal fraction and sample ``s`` the removal stream is
    ``derive(seed, s)``; since samples are prefixes of one random order,
    removed sets are nested across fractions within a sample.  Ranking
    agreement counts (pair, topic) cases whose full-data delta RR_1 is
    nonzero; system agreement compares signs of per-pair mean preferences
    for pairs whose full-data mean delta RR_1 is nonzero.  Rows report the
    mean and sample standard deviation over samples.
    """
    if mode not in ("labels", "queries"):
        raise ValueError(f"unknown degradation mode {mode!r}")
    judgments = judgments.with_threshold(config.binarization_threshold)
    full = Benchmark(runs, judgments)
    full.require_pairs()
    full_sign = {}
    full_mean_sign = {}
    for a, b in full.pairs:
        diffs = [_rr1(x) - _rr1(y) for x, y in zip(full.positions[a], full.positions[b])]
        full_sign[(a, b)] = [_sign(d) for d in diffs]
        full_mean_sign[(a, b)] = _sign(sum(diffs, Fraction(0)))

    jobs = [(fi, s) for fi in range(len(config.fractions)) for s in range(config.n_samples)]

    def run(job):
        fi, s = job
        fraction = config.fractions[fi]
        sample_seed = derive(config.seed, s)
        if mode == "labels":
            degraded_j = degrade_labels(judgments, fraction, sample_seed, config.stratified)
            degraded = Benchmark(runs, degraded_j, topics=full.topics)
        else:
            degraded = Benchmark(runs, judgments, topics=degrade_queries(full.topics, fraction, sample_seed))
        return _agreement_sample(full, degraded, full_sign, full_mean_sign)

    results = pmap(run, jobs, threads)
    rows = []
    keys = [(k, m) for k in ("ranking", "system") for m in METHODS] + [("ties", "rr"), ("ties", "lexi")]
    for fi, fraction in enumerate(config.fractions):
        samples = [results[fi * config.n_samples + s] for s in range(config.n_samples)]
        for kind, method in keys:
            mean, sd = _summarize([r[(kind, method)] for r in samples])
            rows.append({"mode": mode, "fraction": fraction, "kind": kind, "method": method,
                         "mean": mean, "std": sd, "samples": config.n_samples})
    return rows


# ---------------------------------------------------------------------------
# backoff locality


def delta_matrix(runs: Sequence[RunRanking], judgments: Judgments, max_level: int,
                 bench: Optional[Benchmark] = None) -> np.ndarray:
    """Rows of ``(delta RR_1, ..., delta RR_max_level)`` for every pair and topic.

    Levels beyond a topic's relevant count, like unretrieved levels, have
    utility 0 on both sides.
    """
    bench = bench or Benchmark(runs, judgments)
    bench.require_pairs()
    rows = []
    for a, b in bench.pairs:
        for xs, ys in zip(bench.positions[a], bench.positions[b]):
            rows.append([_rr_level(xs, i) - _rr_level(ys, i) for i in range(1, max_level + 1)])
    return np.asarray(rows, dtype=float).reshape(-1, max_level)


@dataclass
class BackoffResult:
    max_level: int
    horizon: int
    correlation: list[list[Optional[float]]]
    regressions: dict[int, Optional[dict]]

    def rows(self) -> list[dict]:
        out = []
        for i, row in enumerate(self.correlation, start=1):
            for j, r in enumerate(row, start=1):
                out.append({"table": "correlation", "level_i": i, "level_j": j, "value": r})
        for target, fit in sorted(self.regressions.items()):
            if fit is None:
                out.append({"table": "regression", "target": target, "regressor": None, "value": None})
                continue
            out.append({"table": "regression", "target": target, "regressor": "intercept",
                        "value": fit["intercept"]})
            for lvl, c in fit["coefficients"].items():
                out.append({"table": "regression", "target": target, "regressor": lvl, "value": c})
        return out


def backoff_from_deltas(deltas: np.ndarray, horizon: int, targets: Sequence[int] = (1, 2, 3, 4)) -> BackoffResult:
    """Pearson grid between levels and OLS of each target level on the next ``horizon`` levels."""
    deltas = np.asarray(deltas, dtype=float)
    max_level = deltas.shape[1]
    if max_level < 2:
        raise ValueError("max_level must be >= 2")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    grid: list[list[Optional[float]]] = []
    for i in range(max_level):
        row = []
        for j in range(max_level):
            try:
                row.append(pearson(deltas[:, i], deltas[:, j]))
            except UndefinedStatistic:
                row.append(None)
        grid.append(row)
    regressions: dict[int, Optional[dict]] = {}
    for target in targets:
        regressors = list(range(target + 1, min(target + horizon, max_level) + 1))
        if target > max_level or not regressors:
            regressions[target] = None
            continue
        X = add_intercept(deltas[:, [r - 1 for r in regressors]])
        try:
            beta = ols(X, deltas[:, target - 1])
        except UndefinedStatistic:
            regressions[target] = None
            continue
        regressions[target] = {"intercept": float(beta[0]),
                               "coefficients": {lvl: float(c) for lvl, c in zip(regressors, beta[1:])}}
    return BackoffResult(max_level, horizon, grid, regressions)


def backoff_analysis(runs: Sequence[RunRanking], judgments: Judgments, max_level: int = 8,
                     horizon: int = 4, targets: Sequence[int] = (1, 2, 3, 4)) -> BackoffResult:
    if max_level < 2:
        raise ValueError("max_level must be >= 2")
    return backoff_from_deltas(delta_matrix(runs, judgments, max_level), horizon, targets)


# ---------------------------------------------------------------------------
# discriminative power


@dataclass
class DiscriminativePower:
    method: str
    test: str
    alpha: float
    n_pairs: int
    n_significant: int
    pairs: list[PairResult]

    @property
    def percent(self) -> float:
        return float(Fraction(100 * self.n_significant, self.n_pairs))


def preference_scores(bench: Benchmark, method: str, threads: int = 1) -> np.ndarray:
    """Systems x topics matrix used by Tukey HSD.

    For ``rr`` this is reciprocal rank.  For the preference methods it is
    each system's mean preference against every other system on the topic.
    """
    k, n = len(bench.tags), len(bench.topics)
    if method == "rr":
        return np.array([[float(_rr1(xs)) for xs in bench.positions[t]] for t in bench.tags])
    index = {t: i for i, t in enumerate(bench.tags)}

    def prefs(pair):
        a, b = pair
        return [float(pair_values(x, y, method)) for x, y in zip(bench.positions[a], bench.positions[b])]

    totals = np.zeros((k, n))
    for (a, b), vals in zip(bench.pairs, pmap(prefs, bench.pairs, threads)):
        v = np.asarray(vals)
        totals[index[a]] += v
        totals[index[b]] -= v
    return totals / (k - 1)


def discriminative_power(
    runs: Sequence[RunRanking],
    judgments: Judgments,
    method: str,
    test: str,
    alpha: float = DEFAULT_ALPHA,
    threads: int = 1,
    bench: Optional[Benchmark] = None,
) -> DiscriminativePower:
    """Share of run pairs whose difference is significant at ``alpha``.

    ``paired``: t-test on per-topic delta RR_1 (``rr``) or rrLP values, exact
    sign test on sgnLP wins and losses (ties dropped), Bonferroni over all
    pairs.  ``hsd``: Tukey HSD on :func:`preference_scores`.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if test not in TESTS:
        raise ValueError(f"unknown test {test!r}; expected one of {TESTS}")
    bench = bench or Benchmark(runs, judgments)
    bench.require_pairs()
    pairs = bench.pairs

    if test == "hsd":
        results = tukey_hsd(preference_scores(bench, method, threads), alpha=alpha, names=bench.tags)
        n_sig = sum(r.significant for r in results)
        return DiscriminativePower(method, test, alpha, len(pairs), n_sig, results)

    def one(pair):
        a, b = pair
        vals = [pair_values(x, y, method) for x, y in zip(bench.positions[a], bench.positions[b])]
        mean = float(sum(vals, Fraction(0)) / len(vals))
        if method == "sgnlp":
            pos = sum(1 for v in vals if v > 0)
            neg = sum(1 for v in vals if v < 0)
            res = sign_test(pos, neg) if pos + neg else TestResult(0.0, 1.0, 0)
        else:
            if len(vals) < 2:
                raise LexiEvalError("paired t-test needs at least 2 topics")
            res = paired_t_test([float(v) for v in vals])
        return mean, res

    raw = pmap(one, pairs, threads)
    corrected = bonferroni([r.p_value for _, r in raw])
    results = []
    for (a, b), (mean, res), p in zip(pairs, raw, corrected):
        adj = TestResult(res.statistic, p, res.n, res.df)
        results.append(PairResult(a, b, mean, adj, p < alpha))
    n_sig = sum(r.significant for r in results)
    return DiscriminativePower(method, test, alpha, len(pairs), n_sig, results)
