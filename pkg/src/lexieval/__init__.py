"""Best-case ranking evaluation: reciprocal rank and lexicographic precision."""

from .lexiprec import (
    aggregate_preference,
    decisive_level,
    lexi_compare,
    rr_lexiprecision,
    sgn_lexiprecision,
)
from .metrics import delta_rr, esl1, reciprocal_rank, rr_at_level
from .model import (
    Judgments,
    LexiEvalError,
    ParseError,
    PositionVector,
    Preference,
    RunRanking,
    order_submission,
    position_vector,
)

__version__ = "0.1.0"

__all__ = [
    "Judgments",
    "LexiEvalError",
    "ParseError",
    "PositionVector",
    "Preference",
    "RunRanking",
    "aggregate_preference",
    "decisive_level",
    "delta_rr",
    "esl1",
    "lexi_compare",
    "order_submission",
    "position_vector",
    "reciprocal_rank",
    "rr_at_level",
    "rr_lexiprecision",
    "sgn_lexiprecision",
]
