"""Instruction-task construction for the five chemistry tasks.

Tasks:

- **CEE** (chemical entity extraction): list every entity of one class that
  appears in a text, as written.
- **CER** (chemical entity recognition): list the entity classes present in
  a text.
- **MFG** (molecular formula generation): give the formula for an IUPAC name.
- **ISG** (isomeric SELFIES generation): give the SELFIES string for a name.
- **MWE** (molecular weight estimation): give the weight for a name.

Prompts follow the instruction/response layout with a fixed preamble and
``### Instruction:`` / ``### Text:`` / ``### Response:`` section markers,
one section per line; the prompt always ends at ``### Response:`` and the
gold completion is stored separately.  Gold lists serialize with the
``", "`` delimiter; parsing splits on exactly that delimiter, trims, and
drops empties, so an empty generation parses to an empty list.

Dataset splitting operates on *source records*, not examples, so no record
leaks e.g. its MFG item into train and its MWE item into test.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from chemtext._jsonio import read_jsonl, write_jsonl
from chemtext.errors import ValidationError

logger = logging.getLogger(__name__)

#: Serialization delimiter for gold and predicted lists.
LIST_DELIMITER = ", "

_PREAMBLE = (
    "Below is an instruction that describes a task. "
    "Write a response that appropriately completes the request."
)


class Task(str, Enum):
    """The five instruction tasks."""

    CEE = "CEE"
    CER = "CER"
    MFG = "MFG"
    ISG = "ISG"
    MWE = "MWE"


class EntityClass(str, Enum):
    """Closed set of chemical entity classes; member order is the canonical
    order used when serializing class lists."""

    TRIVIAL = "Trivial"
    FAMILY = "Family"
    SYSTEMATIC = "Systematic"
    FORMULA = "Formula"
    ABBREVIATION = "Abbreviation"
    MULTIPLE = "Multiple"
    IDENTIFIER = "Identifier"


_CLASS_BY_CASEFOLD = {cls.value.casefold(): cls for cls in EntityClass}


# =============================================================================
# Records
# =============================================================================


@dataclass(frozen=True)
class Mention:
    """One annotated entity occurrence in a text."""

    surface: str
    entity_class: EntityClass
    start: int | None = None
    end: int | None = None


@dataclass(frozen=True)
class ChemdnerRecord:
    """A text with its annotated chemical entity mentions."""

    id: str
    text: str
    mentions: tuple[Mention, ...]

    def __post_init__(self) -> None:
        if not self.text:
            raise ValidationError(f"record {self.id!r}: empty text")
        for mention in self.mentions:
            if not mention.surface.strip():
                raise ValidationError(f"record {self.id!r}: mention with empty surface")
            if (mention.start is None) != (mention.end is None):
                raise ValidationError(
                    f"record {self.id!r}: mention span must set both start and end"
                )
            if mention.start is not None and mention.end is not None:
                if not 0 <= mention.start < mention.end <= len(self.text):
                    raise ValidationError(
                        f"record {self.id!r}: span [{mention.start}, {mention.end}) "
                        f"outside text of length {len(self.text)}"
                    )
                if self.text[mention.start : mention.end] != mention.surface:
                    raise ValidationError(
                        f"record {self.id!r}: span [{mention.start}, {mention.end}) "
                        f"does not slice to the mention surface {mention.surface!r}"
                    )


@dataclass(frozen=True)
class PubchemRecord:
    """One compound: IUPAC name plus the three gold properties."""

    cid: str
    iupac_name: str
    molecular_formula: str
    isomeric_selfies: str
    molecular_weight: float

    def __post_init__(self) -> None:
        for key in ("cid", "iupac_name", "molecular_formula", "isomeric_selfies"):
            if not getattr(self, key):
                raise ValidationError(f"compound record: empty field {key!r}")
        if self.molecular_weight <= 0:
            raise ValidationError(
                f"compound {self.cid!r}: molecular_weight must be positive, "
                f"got {self.molecular_weight}"
            )


@dataclass(frozen=True)
class InstructionExample:
    """One prompt/response pair plus provenance metadata.

    ``meta`` always carries ``example_id`` and ``record_id``; CEE examples
    add ``entity_class`` and MWE examples add the numeric
    ``molecular_weight``.
    """

    task: str
    prompt: str
    response: str
    meta: dict

    def __post_init__(self) -> None:
        Task(self.task)  # raises ValueError for unknown task names
        if not self.response:
            raise ValidationError(
                f"example {self.meta.get('example_id')!r}: empty gold response"
            )

    @property
    def example_id(self) -> str:
        return self.meta["example_id"]

    @property
    def record_id(self) -> str:
        return self.meta["record_id"]


# =============================================================================
# Prompt templates
# =============================================================================


@dataclass(frozen=True)
class _Template:
    instruction: str
    placeholders: tuple[str, ...]
    has_text_section: bool


_TEMPLATES: dict[Task, _Template] = {
    Task.CEE: _Template(
        instruction="Identify all {entity_class} entities in the given text as written.",
        placeholders=("entity_class", "text"),
        has_text_section=True,
    ),
    Task.CER: _Template(
        instruction="What are the types of entities in the given text?",
        placeholders=("text",),
        has_text_section=True,
    ),
    Task.MFG: _Template(
        instruction="Give the molecular formula for {name}.",
        placeholders=("name",),
        has_text_section=False,
    ),
    Task.ISG: _Template(
        instruction="Give the SELFIE string for {name}.",
        placeholders=("name",),
        has_text_section=False,
    ),
    Task.MWE: _Template(
        instruction="Give the molecular weight for {name}.",
        placeholders=("name",),
        has_text_section=False,
    ),
}


def render_prompt(task: Task | str, **fields: str) -> str:
    """Render the prompt for ``task``, ending at ``### Response:``.

    ``fields`` must contain exactly the task's placeholders (CEE:
    ``entity_class`` and ``text``; CER: ``text``; MFG/ISG/MWE: ``name``),
    each a non-empty string.  Missing, unexpected, or empty placeholders
    raise :class:`ValidationError`.
    """
    template = _TEMPLATES[Task(task)]
    given = set(fields)
    required = set(template.placeholders)
    missing = sorted(required - given)
    extra = sorted(given - required)
    if missing:
        raise ValidationError(f"{Task(task).value} prompt: missing placeholder(s) {missing}")
    if extra:
        raise ValidationError(f"{Task(task).value} prompt: unexpected placeholder(s) {extra}")

    values: dict[str, str] = {}
    for key, value in fields.items():
        if isinstance(value, Enum):
            value = value.value
        if not isinstance(value, str) or not value:
            raise ValidationError(
                f"{Task(task).value} prompt: placeholder {key!r} must be a non-empty string"
            )
        values[key] = value

    sections = [_PREAMBLE, "### Instruction: " + template.instruction.format(**values)]
    if template.has_text_section:
        sections.append("### Text: " + values["text"])
    sections.append("### Response:")
    return "\n".join(sections)


# =============================================================================
# Builders
# =============================================================================


def _ordered_mentions(record: ChemdnerRecord) -> list[Mention]:
    """Mentions in order of first appearance: by span start when every
    mention carries a span, otherwise in input order."""
    if record.mentions and all(m.start is not None for m in record.mentions):
        return sorted(record.mentions, key=lambda m: (m.start, m.end))
    return list(record.mentions)


def build_chemdner_examples(records: Iterable[ChemdnerRecord]) -> list[InstructionExample]:
    """Build CEE and CER examples from annotated texts.

    Per record: one CEE example for each entity class present (response =
    that class's surfaces in order of first appearance, duplicates kept) and
    one CER example (response = the distinct classes present, in
    :class:`EntityClass` enumeration order).  Records with zero mentions are
    skipped; the skip count is logged as a warning.
    """
    examples: list[InstructionExample] = []
    skipped = 0
    for record in records:
        if not record.mentions:
            skipped += 1
            continue
        surfaces_by_class: dict[EntityClass, list[str]] = {}
        for mention in _ordered_mentions(record):
            surfaces_by_class.setdefault(mention.entity_class, []).append(mention.surface)

        for cls in EntityClass:
            surfaces = surfaces_by_class.get(cls)
            if surfaces is None:
                continue
            examples.append(
                InstructionExample(
                    task=Task.CEE.value,
                    prompt=render_prompt(Task.CEE, entity_class=cls.value, text=record.text),
                    response=LIST_DELIMITER.join(surfaces),
                    meta={
                        "example_id": f"{record.id}:CEE:{cls.value}",
                        "record_id": record.id,
                        "entity_class": cls.value,
                    },
                )
            )
        present = [cls.value for cls in EntityClass if cls in surfaces_by_class]
        examples.append(
            InstructionExample(
                task=Task.CER.value,
                prompt=render_prompt(Task.CER, text=record.text),
                response=LIST_DELIMITER.join(present),
                meta={"example_id": f"{record.id}:CER", "record_id": record.id},
            )
        )
    if skipped:
        logger.warning("build_chemdner_examples: skipped %d record(s) with zero mentions", skipped)
    return examples


def format_weight(weight: float) -> str:
    """Shortest decimal rendering that round-trips to the stored weight."""
    return repr(float(weight))


def build_pubchem_examples(records: Iterable[PubchemRecord]) -> list[InstructionExample]:
    """Build exactly three examples per compound: MFG, ISG, and MWE, all
    sharing the compound's record id."""
    examples: list[InstructionExample] = []
    for record in records:
        rid = record.cid
        examples.append(
            InstructionExample(
                task=Task.MFG.value,
                prompt=render_prompt(Task.MFG, name=record.iupac_name),
                response=record.molecular_formula,
                meta={"example_id": f"{rid}:MFG", "record_id": rid},
            )
        )
        examples.append(
            InstructionExample(
                task=Task.ISG.value,
                prompt=render_prompt(Task.ISG, name=record.iupac_name),
                response=record.isomeric_selfies,
                meta={"example_id": f"{rid}:ISG", "record_id": rid},
            )
        )
        examples.append(
            InstructionExample(
                task=Task.MWE.value,
                prompt=render_prompt(Task.MWE, name=record.iupac_name),
                response=format_weight(record.molecular_weight),
                meta={
                    "example_id": f"{rid}:MWE",
                    "record_id": rid,
                    "molecular_weight": float(record.molecular_weight),
                },
            )
        )
    return examples


# =============================================================================
# Splitting
# =============================================================================


@dataclass(frozen=True)
class SplitSpec:
    """Target split sizes, in units of source records.

    Either all integers (exact record counts; infeasible counts are an
    error) or all floats (proportions of the available records, floored,
    with the unassigned rest reported as remainder).
    """

    train: int | float
    val: int | float
    test: int | float

    def __post_init__(self) -> None:
        values = (self.train, self.val, self.test)
        if all(isinstance(v, int) for v in values):
            if any(v < 0 for v in values):
                raise ValidationError(f"split counts must be non-negative: {values}")
        elif all(isinstance(v, float) for v in values):
            if any(not 0.0 <= v <= 1.0 for v in values):
                raise ValidationError(f"split fractions must lie in [0, 1]: {values}")
            if sum(values) > 1.0 + 1e-9:
                raise ValidationError(f"split fractions sum to more than 1: {values}")
        else:
            raise ValidationError(
                f"split sizes must be all counts or all fractions, got {values}"
            )

    @property
    def fractional(self) -> bool:
        return isinstance(self.train, float)


@dataclass
class DatasetSplit:
    """Record-disjoint train/val/test example lists.

    ``remainder`` holds examples of records left unassigned (fractional
    flooring, or integer counts that do not consume every record); it is
    reported rather than silently merged into a split.
    """

    train: list[InstructionExample] = field(default_factory=list)
    val: list[InstructionExample] = field(default_factory=list)
    test: list[InstructionExample] = field(default_factory=list)
    remainder: list[InstructionExample] = field(default_factory=list)

    def summary(self) -> dict:
        def block(examples: list[InstructionExample]) -> dict:
            return {
                "examples": len(examples),
                "records": len({ex.record_id for ex in examples}),
            }

        return {
            "train": block(self.train),
            "val": block(self.val),
            "test": block(self.test),
            "remainder": block(self.remainder),
        }


def split_dataset(
    examples: Sequence[InstructionExample],
    spec: SplitSpec,
    seed: int = 0,
) -> DatasetSplit:
    """Split examples into record-disjoint train/val/test sets.

    Records (not examples) are shuffled with ``random.Random(seed)`` and
    assigned to splits; every example of a record lands in that record's
    split, preserving input example order within each split.  Integer specs
    must fit in the available records or a :class:`ValidationError` with
    both counts is raised.
    """
    record_ids: list[str] = []
    seen: set[str] = set()
    for example in examples:
        rid = example.record_id
        if rid not in seen:
            seen.add(rid)
            record_ids.append(rid)

    n = len(record_ids)
    if spec.fractional:
        n_train = int(n * spec.train)
        n_val = int(n * spec.val)
        n_test = int(n * spec.test)
    else:
        n_train, n_val, n_test = spec.train, spec.val, spec.test
        requested = n_train + n_val + n_test
        if requested > n:
            raise ValidationError(
                f"split requests {requested} records "
                f"(train {n_train} / val {n_val} / test {n_test}) "
                f"but only {n} records are available"
            )

    shuffled = list(record_ids)
    random.Random(seed).shuffle(shuffled)
    assignment: dict[str, str] = {}
    bounds = (
        ("train", 0, n_train),
        ("val", n_train, n_train + n_val),
        ("test", n_train + n_val, n_train + n_val + n_test),
    )
    for name, lo, hi in bounds:
        for rid in shuffled[lo:hi]:
            assignment[rid] = name

    split = DatasetSplit()
    buckets = {
        "train": split.train,
        "val": split.val,
        "test": split.test,
    }
    for example in examples:
        bucket = buckets.get(assignment.get(example.record_id, "remainder"))
        if bucket is None:
            split.remainder.append(example)
        else:
            bucket.append(example)
    return split


# =============================================================================
# Response parsing
# =============================================================================


def serialize_list(items: Sequence[str]) -> str:
    """Join items with the list delimiter (inverse of
    :func:`parse_list_response` for clean items)."""
    return LIST_DELIMITER.join(items)


def parse_list_response(text: str) -> list[str]:
    """Split a generated list on the ``", "`` delimiter, trim whitespace,
    and drop empty items.  Total: any text parses; ``""`` parses to ``[]``."""
    items = (item.strip() for item in text.split(LIST_DELIMITER))
    return [item for item in items if item]


def parse_class_list(text: str) -> tuple[list[EntityClass], list[str]]:
    """Parse a generated class list, mapping items to :class:`EntityClass`
    case-insensitively.  Unmappable items are returned in the rejects list,
    never dropped silently."""
    classes: list[EntityClass] = []
    rejects: list[str] = []
    for item in parse_list_response(text):
        cls = _CLASS_BY_CASEFOLD.get(item.casefold())
        if cls is None:
            rejects.append(item)
        else:
            classes.append(cls)
    return classes, rejects


# =============================================================================
# File I/O
# =============================================================================


def _mention_from_obj(obj: Mapping, where: str) -> Mention:
    if not isinstance(obj, Mapping):
        raise ValidationError(f"{where}: mention must be an object")
    for key in ("surface", "class"):
        if key not in obj:
            raise ValidationError(f"{where}: mention missing key {key!r}")
    cls = _CLASS_BY_CASEFOLD.get(str(obj["class"]).casefold())
    if cls is None:
        raise ValidationError(f"{where}: unknown entity class {obj['class']!r}")
    return Mention(
        surface=obj["surface"],
        entity_class=cls,
        start=obj.get("start"),
        end=obj.get("end"),
    )


def read_chemdner(path: str | Path) -> Iterator[ChemdnerRecord]:
    """Read annotated texts from JSONL (keys ``text``, ``mentions``, optional
    ``id``) or, for ``.tsv``/``.tab`` files, tab-separated lines of
    ``id <TAB> text <TAB> mentions-as-JSON``.

    Records without an explicit id are named by line number.
    """
    path = Path(path)
    if path.suffix.lower() in (".tsv", ".tab"):
        yield from _read_chemdner_tsv(path)
        return
    for lineno, obj in read_jsonl(path):
        where = f"{path}:{lineno}"
        if "text" not in obj or "mentions" not in obj:
            raise ValidationError(f"{where}: record needs 'text' and 'mentions'")
        if not isinstance(obj["mentions"], list):
            raise ValidationError(f"{where}: 'mentions' must be a list")
        yield ChemdnerRecord(
            id=str(obj.get("id", f"rec-{lineno:06d}")),
            text=obj["text"],
            mentions=tuple(_mention_from_obj(m, where) for m in obj["mentions"]),
        )


def _read_chemdner_tsv(path: Path) -> Iterator[ChemdnerRecord]:
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            where = f"{path}:{lineno}"
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValidationError(
                    f"{where}: expected 3 tab-separated columns "
                    f"(id, text, mentions JSON), got {len(parts)}"
                )
            record_id, text, mentions_json = parts
            try:
                mentions = json.loads(mentions_json)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{where}: invalid mentions JSON: {exc}") from exc
            if not isinstance(mentions, list):
                raise ValidationError(f"{where}: mentions column must be a JSON list")
            yield ChemdnerRecord(
                id=record_id,
                text=text,
                mentions=tuple(_mention_from_obj(m, where) for m in mentions),
            )


def read_pubchem(path: str | Path) -> Iterator[PubchemRecord]:
    """Read compound records from JSONL with keys ``cid``, ``iupac_name``,
    ``molecular_formula``, ``isomeric_selfies``, ``molecular_weight``."""
    required = ("cid", "iupac_name", "molecular_formula", "isomeric_selfies", "molecular_weight")
    for lineno, obj in read_jsonl(path):
        where = f"{path}:{lineno}"
        for key in required:
            if key not in obj:
                raise ValidationError(f"{where}: missing key {key!r}")
        weight = obj["molecular_weight"]
        if not isinstance(weight, (int, float)) or isinstance(weight, bool):
            raise ValidationError(f"{where}: 'molecular_weight' must be a number")
        try:
            yield PubchemRecord(
                cid=str(obj["cid"]),
                iupac_name=obj["iupac_name"],
                molecular_formula=obj["molecular_formula"],
                isomeric_selfies=obj["isomeric_selfies"],
                molecular_weight=float(weight),
            )
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from exc


def write_examples(path: str | Path, examples: Iterable[InstructionExample]) -> int:
    """Write instruction examples as JSONL; returns the number written."""
    return write_jsonl(
        path,
        (
            {"task": ex.task, "prompt": ex.prompt, "response": ex.response, "meta": ex.meta}
            for ex in examples
        ),
    )


def read_examples(path: str | Path) -> Iterator[InstructionExample]:
    """Read instruction examples written by :func:`write_examples`."""
    for lineno, obj in read_jsonl(path):
        where = f"{path}:{lineno}"
        for key in ("task", "prompt", "response", "meta"):
            if key not in obj:
                raise ValidationError(f"{where}: missing key {key!r}")
        if not isinstance(obj["meta"], dict) or "example_id" not in obj["meta"]:
            raise ValidationError(f"{where}: meta must carry 'example_id'")
        try:
            yield InstructionExample(
                task=obj["task"],
                prompt=obj["prompt"],
                response=obj["response"],
                meta=obj["meta"],
            )
        except (ValidationError, ValueError) as exc:
            raise ValidationError(f"{where}: {exc}") from exc
