"""Recall-level-1 metrics and per-recall-level reciprocal ranks.

All reciprocal ranks are exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .model import PositionVector, ShapeError

ZERO = Fraction(0)


def reciprocal_rank(pv: PositionVector) -> Fraction:
    """1 / rank of the first relevant document; 0 when none was retrieved."""
    return Fraction(1, pv.positions[0]) if pv.positions else ZERO


def esl1(pv: PositionVector) -> Optional[int]:
    """Type-1 expected search length, or None when nothing relevant was retrieved."""
    return pv.positions[0] if pv.positions else None


def rr_at_level(pv: PositionVector, i: int) -> Fraction:
    """Reciprocal rank of the ``i``-th relevant document (0 if unretrieved)."""
    if not 1 <= i <= pv.total_relevant:
        raise ShapeError(f"recall level {i} outside [1, {pv.total_relevant}]")
    return Fraction(1, pv.positions[i - 1]) if i <= len(pv.positions) else ZERO


def recall_level_utilities(pv: PositionVector) -> tuple[Fraction, ...]:
    """``(RR_1, ..., RR_R)``; non-increasing by construction."""
    rr = tuple(Fraction(1, p) for p in pv.positions)
    return rr + (ZERO,) * pv.unretrieved


def check_same_relevant(pvx: PositionVector, pvy: PositionVector) -> None:
    if pvx.total_relevant != pvy.total_relevant:
        raise ShapeError(
            f"position vectors judged against different relevant sets "
            f"(R={pvx.total_relevant} vs R={pvy.total_relevant})")


def delta_rr(pvx: PositionVector, pvy: PositionVector, i: int) -> Fraction:
    """``RR_i(x) - RR_i(y)``."""
    check_same_relevant(pvx, pvy)
    return rr_at_level(pvx, i) - rr_at_level(pvy, i)


def delta_rr_float(pvx: PositionVector, pvy: PositionVector, i: int) -> float:
    """Floating-point ``delta_rr`` for statistics; 0.0 for levels beyond R."""
    xs, ys = pvx.positions, pvy.positions
    a = 1.0 / xs[i - 1] if i <= len(xs) else 0.0
    b = 1.0 / ys[i - 1] if i <= len(ys) else 0.0
    return a - b
