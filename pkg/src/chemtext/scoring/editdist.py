"""Levenshtein edit distance and the mean percent-edit-distance metric.

Two routes to the same answer ship side by side:

- :func:`edit_distance` — the fast path, a bit-parallel formulation
  (Myers/Hyyrö style) in which one column of the dynamic-programming table
  is carried as bit vectors and each text character costs a handful of word
  operations.  Python integers serve as arbitrary-width words, so patterns
  longer than a machine word extend blockwise through big-int arithmetic.
- :func:`dp_edit_distance` — the reference oracle, the textbook O(m*n)
  two-row dynamic program.

The two must agree everywhere; the test suite holds them to that.
Both operate on Unicode scalar values (Python ``str`` code points).
"""

from __future__ import annotations

from typing import Iterable, Sequence

from chemtext.errors import ValidationError


def dp_edit_distance(a: str, b: str) -> int:
    """Reference Levenshtein distance via the classic two-row dynamic program.

    Unit costs for insertion, deletion, and substitution.  Quadratic time;
    kept deliberately plain so it can serve as the oracle for
    :func:`edit_distance`.
    """
    m, n = len(a), len(b)
    if m == 0:
        return n
    if n == 0:
        return m
    prev = list(range(n + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * n
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[n]


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance via bit-parallel vertical-delta propagation.

    The shorter string becomes the pattern; its positions live in bit
    vectors (``pv``/``mv`` carry the +1/-1 vertical deltas of the DP column)
    and each character of the longer string updates them in O(ceil(m/w))
    word operations.  Always equals :func:`dp_edit_distance`.
    """
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) > len(b):
        a, b = b, a

    m = len(a)
    peq: dict[str, int] = {}
    for i, ch in enumerate(a):
        peq[ch] = peq.get(ch, 0) | (1 << i)

    mask = (1 << m) - 1
    high = 1 << (m - 1)
    pv = mask  # every column entry starts one above its upper neighbour
    mv = 0
    score = m

    for ch in b:
        eq = peq.get(ch, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | (~(xh | pv) & mask)
        mh = pv & xh
        if ph & high:
            score += 1
        elif mh & high:
            score -= 1
        ph = ((ph << 1) | 1) & mask
        mh = (mh << 1) & mask
        pv = mh | (~(xv | ph) & mask)
        mv = ph & xv
    return score


def mean_pct_edit_distance(pairs: Iterable[Sequence[str]]) -> float:
    """Mean edit distance between gold and predicted strings, each pair
    normalized by the gold string's length.

    ``pairs`` yields ``(gold, predicted)`` tuples.  The result is a ratio
    (1.0 means the average pair is as wrong as the gold is long); identical
    strings contribute 0.  An empty pair list or an empty gold string is a
    validation error because the normalization is undefined there.
    """
    total = 0.0
    count = 0
    for gold, pred in pairs:
        if len(gold) == 0:
            raise ValidationError(
                "mean_pct_edit_distance: gold string is empty; "
                "normalization by gold length is undefined"
            )
        total += edit_distance(gold, pred) / len(gold)
        count += 1
    if count == 0:
        raise ValidationError("mean_pct_edit_distance: no pairs given")
    return total / count
