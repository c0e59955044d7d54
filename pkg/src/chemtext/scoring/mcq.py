"""Multiple-choice metrics: accuracy and macro-averaged F1.

Predictions are choice indices.  A model that refused or produced nothing
parseable is represented by :data:`ABSTAIN`; an abstention never equals a
gold index, so it scores as incorrect, and for macro F1 it contributes a
false negative to the gold label without being a label of its own.
"""

from __future__ import annotations

from typing import Sequence

from chemtext.errors import ValidationError

#: Sentinel prediction index for "no answer extracted".
ABSTAIN = -1


def _check_lengths(gold: Sequence[int], pred: Sequence[int]) -> None:
    if len(gold) != len(pred):
        raise ValidationError(
            f"length mismatch: {len(gold)} gold vs {len(pred)} predicted"
        )
    if len(gold) == 0:
        raise ValidationError("empty input")


def mcq_accuracy(gold: Sequence[int], pred: Sequence[int]) -> float:
    """Fraction of predictions equal to their gold choice index."""
    _check_lengths(gold, pred)
    return sum(1 for g, p in zip(gold, pred) if g == p) / len(gold)


def mcq_macro_f1(gold: Sequence[int], pred: Sequence[int], num_choices: int) -> float:
    """Macro-averaged F1 over all ``num_choices`` labels.

    Per-label F1 uses the 0/0 -> 0 convention, so a label absent from both
    gold and predictions contributes 0 to the average (labels are not
    skipped).  Gold indices must lie in ``[0, num_choices)``; predictions
    may additionally be :data:`ABSTAIN`.
    """
    _check_lengths(gold, pred)
    if num_choices < 1:
        raise ValidationError(f"num_choices must be >= 1, got {num_choices}")
    for i, g in enumerate(gold):
        if not 0 <= g < num_choices:
            raise ValidationError(
                f"gold index at position {i} out of range [0, {num_choices}): {g}"
            )
    for i, p in enumerate(pred):
        if p != ABSTAIN and not 0 <= p < num_choices:
            raise ValidationError(
                f"prediction at position {i} out of range [0, {num_choices}): {p}"
            )

    f1_total = 0.0
    for label in range(num_choices):
        tp = sum(1 for g, p in zip(gold, pred) if g == label and p == label)
        fp = sum(1 for g, p in zip(gold, pred) if g != label and p == label)
        fn = sum(1 for g, p in zip(gold, pred) if g == label and p != label)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        f1_total += f1
    return f1_total / num_choices
