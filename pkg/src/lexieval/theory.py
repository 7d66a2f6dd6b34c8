"""Exact combinatorics of ties, plus exhaustive oracles for small corpora.

Everything here returns exact integers or fractions.  The preference
oracles deliberately do not reuse :mod:`lexieval.lexiprec`; they rebuild
the user populations (recall requirements, psychologically relevant
subsets) from scratch so they can check it.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterator, Sequence

from .model import LexiEvalError, PositionVector, ShapeError

DEFAULT_ENUMERATION_CAP = 10**6
MAX_PSYCH_RELEVANT = 20


def tie_probability(D: int, R: int, r1: int) -> Fraction:
    """P(a uniformly random arrangement has its first relevant item at ``r1``).

    Equivalently, the chance that a random second ranking ties reciprocal
    rank with a ranking whose first relevant item sits at ``r1``:
    ``C(D - r1, R - 1) / C(D, R)``.
    """
    if R < 1 or D < R:
        raise ValueError(f"need 1 <= R <= D, got D={D}, R={R}")
    if not 1 <= r1 <= D - R + 1:
        raise ValueError(f"r1={r1} outside [1, {D - R + 1}]")
    return Fraction(comb(D - r1, R - 1), comb(D, R))


def value_count_ratio(D: int, R: int, k: int) -> Fraction:
    """Growth in distinct position vectors when ``k`` relevant items are added.

    Computed as the product over i in (R, R + k] of (D + 1 - i) / i, which
    equals C(D, R + k) / C(D, R).
    """
    if k < 0 or R < 0:
        raise ValueError("R and k must be non-negative")
    if R + k > D:
        raise ValueError(f"R + k = {R + k} exceeds D = {D}")
    ratio = Fraction(1)
    for i in range(R + 1, R + k + 1):
        ratio *= Fraction(D + 1 - i, i)
    return ratio


def enumerate_arrangements(D: int, R: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[tuple[int, ...]]:
    """All ``C(D, R)`` strictly increasing R-tuples over [1, D], lexicographically."""
    if R < 0 or D < R:
        raise ValueError(f"need 0 <= R <= D, got D={D}, R={R}")
    total = comb(D, R)
    if total > cap:
        raise LexiEvalError(f"C({D}, {R}) = {total} arrangements exceeds enumeration cap {cap}")
    return combinations(range(1, D + 1), R)


def tie_probability_by_enumeration(D: int, R: int, r1: int) -> Fraction:
    arrangements = list(enumerate_arrangements(D, R))
    return Fraction(sum(1 for a in arrangements if a[0] == r1), len(arrangements))


def _utilities(pv: PositionVector) -> list[Fraction]:
    # Unretrieved relevant items contribute utility 0.
    return [Fraction(1, p) for p in pv.positions] + [Fraction(0)] * pv.unretrieved


def lex_sign(u: Sequence[Fraction], v: Sequence[Fraction]) -> int:
    for a, b in zip(u, v):
        if a != b:
            return 1 if a > b else -1
    return 0


def psych_relevance_utilities(pv: PositionVector) -> list[Fraction]:
    """Best-case utility of each of the ``2**R - 1`` psychological-relevance users.

    User ``S`` (a non-empty subset of the relevant items) gets 1 over the
    rank of its highest-ranked member, or 0 if none of ``S`` was retrieved.
    Returned sorted from best to worst.
    """
    R = pv.total_relevant
    if R > MAX_PSYCH_RELEVANT:
        raise LexiEvalError(f"R={R} too large to enumerate 2**R - 1 user states")
    items = _utilities(pv)
    out = []
    for mask in range(1, 1 << R):
        out.append(max(items[j] for j in range(R) if mask >> j & 1))
    out.sort(reverse=True)
    return out


def psych_relevance_preference(pvx: PositionVector, pvy: PositionVector) -> int:
    """Leximax comparison over all psychological-relevance users."""
    if pvx.total_relevant != pvy.total_relevant:
        raise ShapeError("position vectors have different R")
    return lex_sign(psych_relevance_utilities(pvx), psych_relevance_utilities(pvy))


def recall_level_preference(pvx: PositionVector, pvy: PositionVector) -> int:
    """Leximax comparison over the R recall-requirement users.

    User ``i`` needs ``i`` relevant items and has utility RR_i.
    """
    if pvx.total_relevant != pvy.total_relevant:
        raise ShapeError("position vectors have different R")
    return lex_sign(sorted(_utilities(pvx), reverse=True), sorted(_utilities(pvy), reverse=True))


def top_utility_multiplicity(pv: PositionVector) -> int:
    """How many psychological-relevance users attain the best utility."""
    u = psych_relevance_utilities(pv)
    return sum(1 for v in u if v == u[0])


def distinct_rr1_values(D: int, R: int) -> int:
    return len({a[0] for a in enumerate_arrangements(D, R)})


def tie_curve(D: int, R: int) -> Iterator[tuple[int, Fraction]]:
    """``(r1, P(tie | r1))`` for every feasible ``r1``.

    Uses the ratio C(D - r - 1, R - 1) / C(D - r, R - 1) = (D - r - R + 1) / (D - r)
    to step along r1 so large corpora stay cheap.
    """
    p = tie_probability(D, R, 1)
    for r1 in range(1, D - R + 2):
        yield r1, p
        if r1 < D - R + 1:
            p = p * Fraction(D - r1 - R + 1, D - r1)
