"""Numeric metrics: MAPE over free-text predictions and relative improvement.

Model output for a numeric question is rarely a clean number, so scoring
starts from a lenient parse: the first numeric token in the text (optional
sign, decimal point, scientific notation) is taken and everything else —
units, prose, whitespace — is ignored.  Text with no numeric token at all is
coerced to 0.0, which makes a fully non-numeric prediction list score a MAPE
of exactly 1.0 against positive gold values.
"""

from __future__ import annotations

import re
from typing import Sequence

from chemtext.errors import ValidationError

_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


def parse_number(text: str) -> float | None:
    """Extract the first numeric token from ``text``, or ``None``.

    Accepts an optional sign, decimal fractions, and scientific notation;
    surrounding words, units, and whitespace are skipped.
    """
    match = _NUMBER_RE.search(text)
    if match is None:
        return None
    return float(match.group())


def mape(gold: Sequence[float], pred: Sequence[float | str]) -> float:
    """Mean absolute percentage error, as a ratio.

    ``pred`` entries may be numbers or free text; text is parsed with
    :func:`parse_number` and unparseable text is coerced to 0.0 (so it
    contributes exactly |gold|/|gold| = 1.0 to the mean).  Gold values must
    be strictly positive and the two sequences must have equal, non-zero
    length.
    """
    if len(gold) != len(pred):
        raise ValidationError(
            f"mape: length mismatch, {len(gold)} gold vs {len(pred)} predicted"
        )
    if len(gold) == 0:
        raise ValidationError("mape: empty input")

    total = 0.0
    for i, (g, p) in enumerate(zip(gold, pred)):
        if g <= 0:
            raise ValidationError(f"mape: gold value at index {i} is not positive: {g}")
        if isinstance(p, str):
            parsed = parse_number(p)
            value = 0.0 if parsed is None else parsed
        else:
            value = float(p)
        total += abs(g - value) / abs(g)
    return total / len(gold)


def relative_improvement(new: float, base: float) -> float:
    """Percent change of ``new`` over ``base``: ``100 * (new - base) / base``.

    ``base`` must be strictly positive; improvement over a zero or negative
    baseline is undefined.
    """
    if base <= 0:
        raise ValidationError(f"relative_improvement: base must be positive, got {base}")
    return 100.0 * (new - base) / base
