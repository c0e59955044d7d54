"""Scoring primitives: partial-match NER counts, edit distance, numeric and
multiple-choice metrics.

Everything here is a pure function over in-memory values; file handling and
report assembly live in :mod:`chemtext.harness` and :mod:`chemtext.cli`.
"""

from __future__ import annotations

from .editdist import dp_edit_distance, edit_distance, mean_pct_edit_distance
from .mcq import ABSTAIN, mcq_accuracy, mcq_macro_f1
from .ner import (
    MIN_PARTIAL_SUBSTRING_LEN,
    MatchCounts,
    PRF,
    Schema,
    TypedEntity,
    match_entities,
    match_entities_optimal,
    prf,
)
from .numeric import mape, parse_number, relative_improvement

__all__ = [
    "ABSTAIN",
    "MIN_PARTIAL_SUBSTRING_LEN",
    "MatchCounts",
    "PRF",
    "Schema",
    "TypedEntity",
    "dp_edit_distance",
    "edit_distance",
    "mape",
    "match_entities",
    "match_entities_optimal",
    "mcq_accuracy",
    "mcq_macro_f1",
    "mean_pct_edit_distance",
    "parse_number",
    "prf",
    "relative_improvement",
]
