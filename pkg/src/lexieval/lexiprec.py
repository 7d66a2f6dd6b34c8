"""Lexicographic precision: preferences decided at the first differing recall level.

Two rankings are compared through their position vectors.  Walking down the
recall levels, the first level ``i*`` where the reciprocal ranks differ
decides the preference.  ``sgnLP`` reports only the direction, ``rrLP`` the
reciprocal-rank difference at ``i*``.  A tie happens only when both rankings
put the relevant documents at exactly the same ranks.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .metrics import check_same_relevant
from .model import LexiEvalError, PositionVector, Preference

SCHEMES = ("rrlp", "sgnlp")


def decide_positions(xs: Sequence[int], ys: Sequence[int]) -> tuple[Optional[int], int]:
    """``(i*, sign)`` for two raw position tuples."""
    # A shorter vector means the next level is unretrieved (utility 0).
    for i, (a, b) in enumerate(zip(xs, ys), start=1):
        if a != b:
            return i, (1 if a < b else -1)
    if len(xs) == len(ys):
        return None, 0
    i = min(len(xs), len(ys)) + 1
    return i, (1 if len(xs) > len(ys) else -1)


def magnitude_at(xs: Sequence[int], ys: Sequence[int], i: int) -> Fraction:
    a = Fraction(1, xs[i - 1]) if i <= len(xs) else Fraction(0)
    b = Fraction(1, ys[i - 1]) if i <= len(ys) else Fraction(0)
    return a - b


def decisive_level(pvx: PositionVector, pvy: PositionVector) -> Optional[int]:
    """Smallest recall level with a nonzero reciprocal-rank difference, or None."""
    check_same_relevant(pvx, pvy)
    return decide_positions(pvx.positions, pvy.positions)[0]


def sgn_lexiprecision(pvx: PositionVector, pvy: PositionVector) -> int:
    check_same_relevant(pvx, pvy)
    return decide_positions(pvx.positions, pvy.positions)[1]


def rr_lexiprecision(pvx: PositionVector, pvy: PositionVector) -> Fraction:
    check_same_relevant(pvx, pvy)
    istar, _ = decide_positions(pvx.positions, pvy.positions)
    return Fraction(0) if istar is None else magnitude_at(pvx.positions, pvy.positions, istar)


def lexi_compare(pvx: PositionVector, pvy: PositionVector) -> Preference:
    """Decisive level, sign and rrLP magnitude in one pass."""
    check_same_relevant(pvx, pvy)
    istar, sign = decide_positions(pvx.positions, pvy.positions)
    if istar is None:
        return Preference(None, 0, Fraction(0))
    return Preference(istar, sign, magnitude_at(pvx.positions, pvy.positions, istar))


def preference_value(pref: Preference, scheme: str) -> Fraction:
    scheme = scheme.lower()
    if scheme == "rrlp":
        return pref.magnitude
    if scheme == "sgnlp":
        return Fraction(pref.sign)
    raise ValueError(f"unknown magnitude scheme {scheme!r}; expected one of {SCHEMES}")


def aggregate_preference(
    preferences: Iterable[Union[Preference, Fraction, int]],
    scheme: str = "rrlp",
) -> Fraction:
    """Mean preference over topics under ``scheme`` (exact).

    Plain numbers are taken as already-scored per-topic values.
    """
    values: list[Fraction] = []
    for p in preferences:
        values.append(preference_value(p, scheme) if isinstance(p, Preference) else Fraction(p))
    if not values:
        raise LexiEvalError("cannot aggregate preferences over an empty topic set")
    return sum(values, Fraction(0)) / len(values)


def compare_runs(
    pvs_x: Sequence[PositionVector],
    pvs_y: Sequence[PositionVector],
) -> list[Preference]:
    """Per-topic preferences for two aligned sequences of position vectors."""
    if len(pvs_x) != len(pvs_y):
        raise LexiEvalError("runs must be compared over the same topics")
    return [lexi_compare(x, y) for x, y in zip(pvs_x, pvs_y)]
