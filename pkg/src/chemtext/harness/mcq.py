"""Multiple-choice question prompts, answer extraction, and benchmark I/O.

Prompt layout: each question renders as a block of

    Question: <question>
    A. <choice>
    B. <choice>
    C. <choice>
    D. <choice>
    Answer: <letter>

Few-shot exemplars reveal their answer letter; the target block ends at
``Answer:`` so the model supplies the continuation.  Blocks are separated by
one blank line.

Answer selection prefers per-choice likelihood scoring (argmax over the
endpoint's choice log-probabilities, ties to the lowest index); when only
free text is available, the first standalone A–D letter wins, and a
generation containing none abstains — a value scored as incorrect, never an
error.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from chemtext._jsonio import read_jsonl
from chemtext.errors import ValidationError
from chemtext.scoring import ABSTAIN

#: Choice letters, in choice-index order.
LETTERS = "ABCD"

_STANDALONE_LETTER = re.compile(r"(?<![A-Za-z0-9])([A-D])(?![A-Za-z0-9])")


@dataclass(frozen=True)
class McqItem:
    """One four-choice question with its gold answer index."""

    question: str
    choices: tuple[str, str, str, str]
    answer: int
    task_name: str

    def __post_init__(self) -> None:
        if len(self.choices) != len(LETTERS):
            raise ValidationError(
                f"question needs exactly {len(LETTERS)} choices, got {len(self.choices)}"
            )
        if not 0 <= self.answer < len(LETTERS):
            raise ValidationError(
                f"answer index must lie in [0, {len(LETTERS)}), got {self.answer}"
            )
        if not self.question:
            raise ValidationError("empty question")


@dataclass(frozen=True)
class TaskData:
    """One benchmark task: scored items plus the dev pool that few-shot
    exemplars are drawn from."""

    name: str
    items: tuple[McqItem, ...]
    dev_items: tuple[McqItem, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("task name must be non-empty")
        if not self.items:
            raise ValidationError(f"task {self.name!r} has no items")


def format_mcq_block(item: McqItem, reveal_answer: bool) -> str:
    """Render one question block; exemplars reveal the answer letter, the
    target ends at ``Answer:``."""
    lines = [f"Question: {item.question}"]
    for letter, choice in zip(LETTERS, item.choices):
        lines.append(f"{letter}. {choice}")
    lines.append(f"Answer: {LETTERS[item.answer]}" if reveal_answer else "Answer:")
    return "\n".join(lines)


def build_mcq_prompt(item: McqItem, shots: Sequence[McqItem] = ()) -> str:
    """Render the few-shot prompt for ``item``; deterministic in its inputs.

    The item must not appear among its own exemplars (that would reveal the
    answer) — :class:`ValidationError` otherwise.
    """
    if any(shot == item for shot in shots):
        raise ValidationError("item appears in its own few-shot exemplars")
    blocks = [format_mcq_block(shot, reveal_answer=True) for shot in shots]
    blocks.append(format_mcq_block(item, reveal_answer=False))
    return "\n\n".join(blocks)


def select_answer(response) -> int:
    """Extract a choice index from a generation outcome.

    Likelihood mode: argmax over choice log-probabilities, ties broken
    toward the lowest index.  Text mode: first standalone A–D letter (not
    embedded in a longer word or number).  No letter, empty text, or an
    error outcome → :data:`~chemtext.scoring.ABSTAIN` (scored incorrect).
    """
    if response.error is not None:
        return ABSTAIN
    if response.choice_logprobs is not None:
        scores = response.choice_logprobs
        best = 0
        for i in range(1, len(scores)):
            if scores[i] > scores[best]:
                best = i
        return best
    match = _STANDALONE_LETTER.search(response.text)
    if match is None:
        return ABSTAIN
    return LETTERS.index(match.group(1))


# =============================================================================
# Benchmark I/O
# =============================================================================


def _answer_index(raw, where: str) -> int:
    """Accept an answer as a letter (``"B"``) or an index (``1`` / ``"1"``)."""
    if isinstance(raw, int) and not isinstance(raw, bool):
        index = raw
    else:
        token = str(raw).strip()
        upper = token.upper()
        if upper in LETTERS:
            return LETTERS.index(upper)
        try:
            index = int(token)
        except ValueError:
            raise ValidationError(f"{where}: answer must be a letter A-D or index, got {raw!r}")
    if not 0 <= index < len(LETTERS):
        raise ValidationError(f"{where}: answer index out of range: {index}")
    return index


def task_name_from_filename(path: str | Path) -> str:
    """``.../high_school_chemistry_test.csv`` → ``high_school_chemistry``."""
    stem = Path(path).stem
    for suffix in ("_test", "_dev", "_val", "_train"):
        if stem.endswith(suffix):
            return stem[: -len(suffix)]
    return stem


def load_mcq_csv(path: str | Path, task_name: str | None = None) -> list[McqItem]:
    """Read headerless CSV rows of ``question, choice×4, answer letter``."""
    path = Path(path)
    name = task_name or task_name_from_filename(path)
    items: list[McqItem] = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            where = f"{path}:{lineno}"
            if len(row) != 6:
                raise ValidationError(
                    f"{where}: expected 6 columns (question, 4 choices, answer), got {len(row)}"
                )
            question, c0, c1, c2, c3, answer = row
            try:
                items.append(
                    McqItem(
                        question=question,
                        choices=(c0, c1, c2, c3),
                        answer=_answer_index(answer, where),
                        task_name=name,
                    )
                )
            except ValidationError as exc:
                raise ValidationError(f"{where}: {exc}") from exc
    return items


def load_mcq_jsonl(path: str | Path, task_name: str | None = None) -> list[McqItem]:
    """Read JSONL rows with keys ``question``, ``choices`` (list of 4), and
    ``answer`` (letter or index); optional per-row ``task_name``."""
    path = Path(path)
    default_name = task_name or task_name_from_filename(path)
    items: list[McqItem] = []
    for lineno, obj in read_jsonl(path):
        where = f"{path}:{lineno}"
        for key in ("question", "choices", "answer"):
            if key not in obj:
                raise ValidationError(f"{where}: missing key {key!r}")
        choices = obj["choices"]
        if not isinstance(choices, list) or len(choices) != 4:
            raise ValidationError(f"{where}: 'choices' must be a list of exactly 4 texts")
        try:
            items.append(
                McqItem(
                    question=obj["question"],
                    choices=tuple(choices),
                    answer=_answer_index(obj["answer"], where),
                    task_name=str(obj.get("task_name", default_name)),
                )
            )
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from exc
    return items


def load_mmlu_dir(directory: str | Path) -> list[TaskData]:
    """Load a benchmark directory of ``<task>_test.csv`` files (plus
    optional ``<task>_dev.csv`` exemplar pools) into per-task data, sorted
    by task name."""
    directory = Path(directory)
    test_files = sorted(directory.glob("*_test.csv"))
    if not test_files:
        raise ValidationError(f"no *_test.csv files found in {directory}")
    tasks: list[TaskData] = []
    for test_file in test_files:
        name = task_name_from_filename(test_file)
        dev_file = directory / f"{name}_dev.csv"
        dev_items = load_mcq_csv(dev_file, name) if dev_file.exists() else []
        tasks.append(
            TaskData(name=name, items=tuple(load_mcq_csv(test_file, name)), dev_items=tuple(dev_items))
        )
    return tasks
