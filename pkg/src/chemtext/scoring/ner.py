"""Partial-match scoring for named-entity lists.

Predicted and gold entities are matched one-to-one and every entity ends up
in exactly one of four categories:

- ``COR``: exact match (casefolded surface equality),
- ``PAR``: partial match (token overlap or a long-enough substring),
- ``INC``: predicted entity with no remaining gold partner,
- ``MIS``: gold entity with no remaining predicted partner.

Precision, recall, and F1 then credit partial matches at half weight:

    possible = COR + PAR + MIS          (everything in the gold list)
    actual   = COR + PAR + INC          (everything the model produced)
    P = (COR + 0.5 * PAR) / actual
    R = (COR + 0.5 * PAR) / possible
    F1 = 2 * P * R / (P + R)

Two schemas are supported: ``constrained`` requires the entity-class labels
to be equal before two surfaces may pair up (in both the exact and the
partial pass); ``unconstrained`` also admits cross-label pairs.  Within each
pass the unconstrained matcher pairs same-label candidates before
cross-label ones, so relaxing the schema can only add pairs on top of the
constrained matching — unconstrained COR and F1 never drop below their
constrained counterparts on the same input.

The production matcher is greedy and deterministic given input order.  A
brute-force optimal matcher over all one-to-one pairings is included for
small lists as an independent oracle; greedy-vs-optimal divergence is
reported by the test suite, not hidden.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from chemtext.errors import ValidationError

#: Minimum length of the contained surface for the substring arm of the
#: partial-overlap predicate.  Published so downstream users can see (and
#: future versions can tighten) what counts as "partial".
MIN_PARTIAL_SUBSTRING_LEN = 3

#: Largest list size accepted by :func:`match_entities_optimal`.
MAX_OPTIMAL_ENTITIES = 8


class Schema(str, Enum):
    """Whether entity-class labels constrain the surface comparison."""

    CONSTRAINED = "constrained"
    UNCONSTRAINED = "unconstrained"


@dataclass(frozen=True)
class TypedEntity:
    """A surface string plus its entity-class label.

    ``label`` is compared by equality only, so any string works; instruction
    tasks use :class:`chemtext.instruct.EntityClass` values.
    """

    surface: str
    label: str


@dataclass(frozen=True)
class MatchCounts:
    """COR/PAR/INC/MIS tallies from one or more matched entity lists."""

    cor: int = 0
    par: int = 0
    inc: int = 0
    mis: int = 0

    @property
    def possible(self) -> int:
        """Number of gold entities (COR + PAR + MIS)."""
        return self.cor + self.par + self.mis

    @property
    def actual(self) -> int:
        """Number of predicted entities (COR + PAR + INC)."""
        return self.cor + self.par + self.inc

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        return MatchCounts(
            cor=self.cor + other.cor,
            par=self.par + other.par,
            inc=self.inc + other.inc,
            mis=self.mis + other.mis,
        )


@dataclass(frozen=True)
class PRF:
    """Precision / recall / F1 triple."""

    precision: float
    recall: float
    f1: float


def prf(counts: MatchCounts) -> PRF:
    """Compute precision, recall, and F1 from partial-match tallies.

    Partial matches count half.  Every 0/0 ratio (no gold, no predictions,
    or P + R == 0) is defined as 0.0.
    """
    weighted = counts.cor + 0.5 * counts.par
    act = counts.actual
    pos = counts.possible
    precision = weighted / act if act else 0.0
    recall = weighted / pos if pos else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return PRF(precision=precision, recall=recall, f1=f1)


# =============================================================================
# Matching
# =============================================================================


def _check_entities(entities: Sequence[TypedEntity], side: str) -> None:
    for ent in entities:
        if not ent.surface.strip():
            raise ValidationError(f"{side} entity has an empty surface: {ent!r}")


def _exact(a: str, b: str) -> bool:
    return a == b


def _partial(a: str, b: str) -> bool:
    """Partial-overlap predicate over casefolded surfaces.

    True when the two surfaces share at least one whitespace-delimited token,
    or when one is a substring of the other and the contained surface is at
    least :data:`MIN_PARTIAL_SUBSTRING_LEN` characters long.
    """
    if set(a.split()) & set(b.split()):
        return True
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    return len(short) >= MIN_PARTIAL_SUBSTRING_LEN and short in long_


def _compatible(
    gold: TypedEntity,
    pred: TypedEntity,
    gold_cf: str,
    pred_cf: str,
    require_label: bool,
    predicate,
) -> bool:
    if require_label and gold.label != pred.label:
        return False
    return predicate(gold_cf, pred_cf)


def _phases(schema: Schema) -> tuple[tuple[object, bool], ...]:
    """Greedy phases as (surface predicate, labels must be equal) pairs.

    The unconstrained schema splits each pass into a same-label sub-phase
    followed by a cross-label one.  The same-label sub-phases replay the
    constrained run on the same input, so every pair the constrained matcher
    finds is also claimed (or bettered) here before any cross-label pairing
    may consume an entity; this is what guarantees schema monotonicity.
    """
    if schema is Schema.CONSTRAINED:
        return ((_exact, True), (_partial, True))
    return ((_exact, True), (_exact, False), (_partial, True), (_partial, False))


def match_entities(
    gold: Sequence[TypedEntity],
    pred: Sequence[TypedEntity],
    schema: Schema = Schema.CONSTRAINED,
) -> MatchCounts:
    """Greedily match predicted entities to gold entities one-to-one.

    Pass 1 pairs exact matches (casefolded surface equality), pass 2 pairs
    the remainder under the partial-overlap predicate; both passes walk
    predictions and gold in input order, so the result is deterministic for
    a given ordering.  Under ``Schema.CONSTRAINED`` the class labels must be
    equal in both passes; under ``Schema.UNCONSTRAINED`` each pass prefers
    same-label pairs before admitting cross-label ones (see
    :func:`_phases`), which keeps the unconstrained score from ever falling
    below the constrained score for the same input.

    Returns the COR/PAR/INC/MIS tallies; conservation always holds:
    ``counts.possible == len(gold)`` and ``counts.actual == len(pred)``.
    """
    _check_entities(gold, "gold")
    _check_entities(pred, "predicted")
    schema = Schema(schema)

    gold_cf = [g.surface.casefold() for g in gold]
    pred_cf = [p.surface.casefold() for p in pred]
    gold_taken = [False] * len(gold)
    pred_taken = [False] * len(pred)
    cor = par = 0

    for predicate, require_label in _phases(schema):
        for i, p in enumerate(pred):
            if pred_taken[i]:
                continue
            for j, g in enumerate(gold):
                if gold_taken[j]:
                    continue
                if _compatible(
                    g, p, gold_cf[j], pred_cf[i], require_label, predicate
                ):
                    gold_taken[j] = True
                    pred_taken[i] = True
                    if predicate is _exact:
                        cor += 1
                    else:
                        par += 1
                    break

    inc = pred_taken.count(False)
    mis = gold_taken.count(False)
    return MatchCounts(cor=cor, par=par, inc=inc, mis=mis)


def match_entities_optimal(
    gold: Sequence[TypedEntity],
    pred: Sequence[TypedEntity],
    schema: Schema = Schema.CONSTRAINED,
) -> MatchCounts:
    """Brute-force optimal one-to-one matching, maximizing (COR, then PAR).

    An independent oracle for :func:`match_entities` on small lists; both
    sides are limited to :data:`MAX_OPTIMAL_ENTITIES` entities.  The search
    considers every assignment of predictions to distinct gold entities and
    picks the lexicographic maximum of (exact pairs, partial pairs).
    """
    if len(gold) > MAX_OPTIMAL_ENTITIES or len(pred) > MAX_OPTIMAL_ENTITIES:
        raise ValidationError(
            "match_entities_optimal is limited to "
            f"{MAX_OPTIMAL_ENTITIES} entities per side, got "
            f"{len(gold)} gold / {len(pred)} predicted"
        )
    _check_entities(gold, "gold")
    _check_entities(pred, "predicted")
    schema = Schema(schema)

    gold_cf = [g.surface.casefold() for g in gold]
    pred_cf = [p.surface.casefold() for p in pred]

    # Pair quality matrix: 2 = exact, 1 = partial, 0 = incompatible.
    require_label = schema is Schema.CONSTRAINED
    quality = [[0] * len(gold) for _ in pred]
    for i, p in enumerate(pred):
        for j, g in enumerate(gold):
            if _compatible(g, p, gold_cf[j], pred_cf[i], require_label, _exact):
                quality[i][j] = 2
            elif _compatible(g, p, gold_cf[j], pred_cf[i], require_label, _partial):
                quality[i][j] = 1

    memo: dict[tuple[int, int], tuple[int, int]] = {}

    def best(i: int, used: int) -> tuple[int, int]:
        """Best (cor, par) achievable for predictions i.. with gold mask used."""
        if i == len(pred):
            return (0, 0)
        key = (i, used)
        cached = memo.get(key)
        if cached is not None:
            return cached
        result = best(i + 1, used)  # leave prediction i unmatched
        row = quality[i]
        for j in range(len(gold)):
            q = row[j]
            if q == 0 or used & (1 << j):
                continue
            sub_cor, sub_par = best(i + 1, used | (1 << j))
            cand = (sub_cor + 1, sub_par) if q == 2 else (sub_cor, sub_par + 1)
            if cand > result:
                result = cand
        memo[key] = result
        return result

    cor, par = best(0, 0)
    return MatchCounts(
        cor=cor,
        par=par,
        inc=len(pred) - cor - par,
        mis=len(gold) - cor - par,
    )
