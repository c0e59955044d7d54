"""Evaluation runs: bounded-concurrency dispatch, crash-safe resume, and
task/subset report assembly.

Execution model: every example becomes one generation request.  Requests are
dispatched through a thread pool capped at the configured concurrency, each
with a retry budget; every outcome (success or final error) is appended to a
JSONL generations log *before* scoring, so a killed run resumes by example
id and an uninterrupted rerun reproduces the same report.  Items that still
fail after retries are excluded from metric computation and counted; a run
whose failure rate exceeds the configured ceiling is marked invalid.

Scoring is pure and recomputable offline from the persisted generations:
multiple-choice tasks score accuracy and macro F1 (per-choice likelihoods
preferred, letter parsing as fallback); entity tasks score partial-match F1
under both the constrained and unconstrained schemas; formula and SELFIES
generation score mean percent edit distance; weight estimation scores MAPE.
"""

from __future__ import annotations

import json
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass
from pathlib import Path
from statistics import fmean
from typing import Iterable, Mapping, Sequence

from chemtext._jsonio import read_jsonl
from chemtext.errors import ValidationError
from chemtext.harness.client import GenerationClient, GenerationRequest, GenerationResponse
from chemtext.harness.mcq import McqItem, TaskData, build_mcq_prompt, select_answer
from chemtext.harness.subsets import (
    AVG_SUBSET_NAME,
    SubsetDef,
    aggregate_subsets,
    applicable_subsets,
)
from chemtext.instruct import (
    InstructionExample,
    Task,
    parse_class_list,
    parse_list_response,
)
from chemtext.scoring import (
    MatchCounts,
    Schema,
    TypedEntity,
    edit_distance,
    mape,
    match_entities,
    mcq_accuracy,
    mcq_macro_f1,
    mean_pct_edit_distance,
    parse_number,
    prf,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalConfig:
    """Run parameters; echoed verbatim into every report."""

    model_id: str = "unknown"
    shots: int = 0
    seed: int = 0
    concurrency: int = 4
    max_retries: int = 2
    temperature: float = 0.0
    max_new_tokens_mcq: int = 16
    max_new_tokens_list: int = 64
    max_new_tokens_isg: int = 256
    stop_sequences: tuple[str, ...] = ("\n\n",)
    use_logprobs: bool = True
    max_failure_rate: float = 0.1
    generations_path: str | None = None

    def __post_init__(self) -> None:
        if self.shots < 0:
            raise ValidationError(f"shots must be >= 0, got {self.shots}")
        if self.concurrency < 1:
            raise ValidationError(f"concurrency must be >= 1, got {self.concurrency}")
        if self.max_retries < 0:
            raise ValidationError(f"max_retries must be >= 0, got {self.max_retries}")
        if self.temperature < 0:
            raise ValidationError(f"temperature must be >= 0, got {self.temperature}")
        for key in ("max_new_tokens_mcq", "max_new_tokens_list", "max_new_tokens_isg"):
            if getattr(self, key) < 1:
                raise ValidationError(f"{key} must be >= 1, got {getattr(self, key)}")
        if not 0.0 <= self.max_failure_rate <= 1.0:
            raise ValidationError(
                f"max_failure_rate must lie in [0, 1], got {self.max_failure_rate}"
            )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["stop_sequences"] = list(self.stop_sequences)
        return out


@dataclass
class EvalReport:
    """Per-task and per-subset metrics plus run provenance.

    ``timing`` is measured wall clock and therefore excluded from
    :meth:`canonical_json`, the serialization used for determinism and
    resume-equivalence comparisons; ``to_dict`` includes it.
    """

    kind: str
    per_task: dict
    per_subset: dict
    config: dict
    failures: dict
    invalid: bool
    timing: dict

    def canonical_dict(self) -> dict:
        return {
            "kind": self.kind,
            "per_task": self.per_task,
            "per_subset": self.per_subset,
            "config": self.config,
            "failures": self.failures,
            "invalid": self.invalid,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.canonical_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n"

    def to_dict(self) -> dict:
        out = self.canonical_dict()
        out["timing"] = self.timing
        return out

    @classmethod
    def from_dict(cls, obj: Mapping) -> "EvalReport":
        for key in ("kind", "per_task", "config"):
            if key not in obj:
                raise ValidationError(f"report is missing key {key!r}")
        return cls(
            kind=obj["kind"],
            per_task=dict(obj["per_task"]),
            per_subset=dict(obj.get("per_subset", {})),
            config=dict(obj["config"]),
            failures=dict(obj.get("failures", {})),
            invalid=bool(obj.get("invalid", False)),
            timing=dict(obj.get("timing", {})),
        )


# =============================================================================
# Execution engine
# =============================================================================


@dataclass(frozen=True)
class _WorkItem:
    example_id: str
    task: str
    request: GenerationRequest


def _attempt(
    client: GenerationClient, request: GenerationRequest, max_retries: int
) -> tuple[GenerationResponse, int]:
    """Up to ``max_retries + 1`` attempts; returns the first success or the
    final error, plus the attempt count."""
    response = GenerationResponse(error="no attempt made")
    for attempt in range(1, max_retries + 2):
        response = client.generate(request)
        if response.error is None:
            return response, attempt
    return response, max_retries + 1


def _load_generations(path: Path) -> dict[str, GenerationResponse]:
    """Parse a generations log; later rows win, so a crashed run's partial
    rows are superseded on resume."""
    out: dict[str, GenerationResponse] = {}
    for lineno, obj in read_jsonl(path):
        if "example_id" not in obj or "response" not in obj:
            raise ValidationError(
                f"{path}:{lineno}: generations row needs 'example_id' and 'response'"
            )
        out[str(obj["example_id"])] = GenerationResponse.from_wire(obj["response"])
    return out


def _execute(
    work: Sequence[_WorkItem], client: GenerationClient, config: EvalConfig
) -> dict[str, GenerationResponse]:
    """Run all work items, persisting each raw outcome before any scoring.

    Items already present in the generations log with a non-error outcome
    are adopted without re-dispatch (crash-safe resume); prior errors are
    re-attempted.
    """
    ids = [w.example_id for w in work]
    if len(set(ids)) != len(ids):
        dupe = next(i for i in ids if ids.count(i) > 1)
        raise ValidationError(f"duplicate example id in work set: {dupe!r}")

    log_path = Path(config.generations_path) if config.generations_path else None
    results: dict[str, GenerationResponse] = {}
    if log_path is not None and log_path.exists():
        wanted = set(ids)
        for example_id, response in _load_generations(log_path).items():
            if example_id in wanted and response.error is None:
                results[example_id] = response
        if results:
            logger.info("resuming: %d of %d generations already on disk", len(results), len(ids))

    pending = [w for w in work if w.example_id not in results]
    handle = None
    if log_path is not None:
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handle = log_path.open("a", encoding="utf-8")
    try:
        with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            futures = {
                pool.submit(_attempt, client, item.request, config.max_retries): item
                for item in pending
            }
            for future in as_completed(futures):
                item = futures[future]
                response, attempts = future.result()
                if handle is not None:
                    row = {
                        "example_id": item.example_id,
                        "task": item.task,
                        "attempts": attempts,
                        "response": response.to_wire(),
                    }
                    handle.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
                    handle.flush()
                results[item.example_id] = response
    finally:
        if handle is not None:
            handle.close()
    return results


# =============================================================================
# Multiple-choice evaluation
# =============================================================================


def select_shots(task: TaskData, config: EvalConfig) -> tuple[McqItem, ...]:
    """Fixed per-task exemplars: a seeded sample from the task's dev pool."""
    if config.shots == 0:
        return ()
    if len(task.dev_items) < config.shots:
        raise ValidationError(
            f"task {task.name!r}: {config.shots} shots requested "
            f"but the dev pool holds {len(task.dev_items)}"
        )
    rng = random.Random(f"{config.seed}:{task.name}")
    return tuple(rng.sample(list(task.dev_items), config.shots))


def run_eval(
    tasks: Iterable[TaskData],
    client: GenerationClient,
    config: EvalConfig,
    subsets: Sequence[SubsetDef] | str | None = "auto",
) -> EvalReport:
    """Evaluate multiple-choice tasks end to end.

    ``subsets="auto"`` aggregates every built-in subset whose member tasks
    are all present, plus the all-task ``Avg``; an explicit subset list is
    aggregated strictly; ``None`` skips subset aggregation.
    """
    started = time.perf_counter()
    tasks = list(tasks)
    if not tasks:
        raise ValidationError("run_eval: no tasks")
    names = [task.name for task in tasks]
    if len(set(names)) != len(names):
        raise ValidationError(f"duplicate task names: {sorted(names)}")

    work: list[_WorkItem] = []
    for task in tasks:
        shots = select_shots(task, config)
        for index, item in enumerate(task.items):
            prompt = build_mcq_prompt(item, shots)
            work.append(
                _WorkItem(
                    example_id=f"{task.name}:{index}",
                    task=task.name,
                    request=GenerationRequest(
                        prompt=prompt,
                        max_new_tokens=config.max_new_tokens_mcq,
                        temperature=config.temperature,
                        stop_sequences=config.stop_sequences,
                        choices=item.choices if config.use_logprobs else None,
                    ),
                )
            )
    responses = _execute(work, client, config)

    per_task: dict[str, dict] = {}
    failures_per_task: dict[str, int] = {}
    for task in tasks:
        gold: list[int] = []
        pred: list[int] = []
        failed = 0
        for index, item in enumerate(task.items):
            response = responses.get(f"{task.name}:{index}")
            if response is None or response.error is not None:
                failed += 1
                continue
            gold.append(item.answer)
            pred.append(select_answer(response))
        metrics = {
            "n": len(task.items),
            "n_scored": len(gold),
            "failures": failed,
            "accuracy": mcq_accuracy(gold, pred) if gold else 0.0,
            "macro_f1": mcq_macro_f1(gold, pred, len(item.choices)) if gold else 0.0,
        }
        per_task[task.name] = metrics
        failures_per_task[task.name] = failed

    total_items = sum(len(task.items) for task in tasks)
    total_failed = sum(failures_per_task.values())
    failure_rate = total_failed / total_items
    invalid = failure_rate > config.max_failure_rate
    if invalid:
        logger.error(
            "run invalid: %d of %d items failed (%.1f%% > %.1f%% ceiling)",
            total_failed, total_items, 100 * failure_rate, 100 * config.max_failure_rate,
        )

    accuracy = {name: metrics["accuracy"] for name, metrics in per_task.items()}
    macro_f1 = {name: metrics["macro_f1"] for name, metrics in per_task.items()}
    per_subset: dict[str, dict] = {}
    if subsets == "auto":
        chosen: Sequence[SubsetDef] = applicable_subsets(accuracy)
        by_acc = aggregate_subsets(accuracy, chosen) if chosen else {}
        by_f1 = aggregate_subsets(macro_f1, chosen) if chosen else {}
        by_acc[AVG_SUBSET_NAME] = fmean(accuracy.values())
        by_f1[AVG_SUBSET_NAME] = fmean(macro_f1.values())
        per_subset = {name: {"accuracy": by_acc[name], "macro_f1": by_f1[name]} for name in by_acc}
    elif subsets is not None:
        by_acc = aggregate_subsets(accuracy, subsets)
        by_f1 = aggregate_subsets(macro_f1, subsets)
        per_subset = {name: {"accuracy": by_acc[name], "macro_f1": by_f1[name]} for name in by_acc}

    return EvalReport(
        kind="mcq",
        per_task=per_task,
        per_subset=per_subset,
        config=config.to_dict(),
        failures={"total": total_failed, "rate": failure_rate, "per_task": failures_per_task},
        invalid=invalid,
        timing={"wall_seconds": round(time.perf_counter() - started, 3)},
    )


# =============================================================================
# Instruction-task evaluation
# =============================================================================


def _zero_counts() -> MatchCounts:
    return MatchCounts(cor=0, par=0, inc=0, mis=0)


def _prf_block(totals: Mapping[Schema, MatchCounts]) -> dict:
    out: dict = {}
    for schema, label in ((Schema.CONSTRAINED, "constrained"), (Schema.UNCONSTRAINED, "unconstrained")):
        counts = totals[schema]
        measure = prf(counts)
        out[f"precision_{label}"] = measure.precision
        out[f"recall_{label}"] = measure.recall
        out[f"f1_{label}"] = measure.f1
        out[f"counts_{label}"] = {
            "cor": counts.cor, "par": counts.par, "inc": counts.inc, "mis": counts.mis,
        }
    return out


def _score_cee(examples: Sequence[InstructionExample], predictions: Mapping[str, str]) -> dict:
    """Score entity extraction per source record.

    Each record's gold is the union of its class-prompted examples' gold
    surfaces, labeled by prompted class; predictions are the parsed
    generations, labeled by the class their prompt asked for.  The
    unconstrained schema credits a surface recovered under the wrong class
    prompt; the constrained schema does not.
    """
    by_record: dict[str, list[InstructionExample]] = {}
    for example in examples:
        if example.example_id in predictions:
            by_record.setdefault(example.record_id, []).append(example)
    totals = {Schema.CONSTRAINED: _zero_counts(), Schema.UNCONSTRAINED: _zero_counts()}
    for siblings in by_record.values():
        gold = [
            TypedEntity(surface, example.meta["entity_class"])
            for example in siblings
            for surface in parse_list_response(example.response)
        ]
        pred = [
            TypedEntity(surface, example.meta["entity_class"])
            for example in siblings
            for surface in parse_list_response(predictions[example.example_id])
        ]
        for schema in totals:
            totals[schema] = totals[schema] + match_entities(gold, pred, schema)
    return _prf_block(totals)


def _score_cer(examples: Sequence[InstructionExample], predictions: Mapping[str, str]) -> dict:
    """Score class recognition with classes as typed entities (surface =
    label = class name); unmappable predicted items count against precision
    rather than being dropped."""
    totals = {Schema.CONSTRAINED: _zero_counts(), Schema.UNCONSTRAINED: _zero_counts()}
    for example in examples:
        if example.example_id not in predictions:
            continue
        gold = [TypedEntity(name, name) for name in parse_list_response(example.response)]
        classes, rejects = parse_class_list(predictions[example.example_id])
        pred = [TypedEntity(cls.value, cls.value) for cls in classes]
        pred.extend(TypedEntity(item, item) for item in rejects)
        for schema in totals:
            totals[schema] = totals[schema] + match_entities(gold, pred, schema)
    return _prf_block(totals)


def _score_edit_distance(
    examples: Sequence[InstructionExample], predictions: Mapping[str, str]
) -> dict:
    pairs = [
        (example.response, predictions[example.example_id])
        for example in examples
        if example.example_id in predictions
    ]
    mean_pct = mean_pct_edit_distance(pairs)
    counts = [0] * 11  # ten 0.1-wide bins over [0, 1) plus a >= 1 overflow bin
    for gold, pred in pairs:
        pct = edit_distance(gold, pred) / len(gold)
        counts[10 if pct >= 1.0 else int(pct * 10)] += 1
    return {
        "mean_pct_edit_distance": mean_pct,
        "pct_edit_distance_histogram": {
            "bin_edges": [i / 10 for i in range(11)],
            "counts": counts,
        },
    }


def _score_mwe(examples: Sequence[InstructionExample], predictions: Mapping[str, str]) -> dict:
    golds: list[float] = []
    preds: list[str] = []
    for example in examples:
        if example.example_id not in predictions:
            continue
        weight = example.meta.get("molecular_weight")
        if weight is None:
            weight = parse_number(example.response)
            if weight is None:
                raise ValidationError(
                    f"example {example.example_id!r}: no gold molecular weight available"
                )
        golds.append(float(weight))
        preds.append(predictions[example.example_id])
    return {"mape": mape(golds, preds)}


_SCORERS = {
    Task.CEE: _score_cee,
    Task.CER: _score_cer,
    Task.MFG: _score_edit_distance,
    Task.ISG: _score_edit_distance,
    Task.MWE: _score_mwe,
}


def score_instruction_task(
    examples: Sequence[InstructionExample], predictions: Mapping[str, str]
) -> dict:
    """Route one task's examples to its metric.

    ``predictions`` maps example id → generated text; examples without a
    prediction are excluded (they were failures upstream).  All examples
    must belong to a single task.
    """
    examples = list(examples)
    if not examples:
        raise ValidationError("score_instruction_task: no examples")
    task_names = {example.task for example in examples}
    if len(task_names) != 1:
        raise ValidationError(f"examples span multiple tasks: {sorted(task_names)}")
    if not any(example.example_id in predictions for example in examples):
        raise ValidationError("score_instruction_task: no example has a prediction")
    return _SCORERS[Task(task_names.pop())](examples, predictions)


def instruction_eval(
    examples: Iterable[InstructionExample],
    client: GenerationClient,
    config: EvalConfig,
    task: Task | str | None = None,
) -> EvalReport:
    """Evaluate one instruction task end to end: generate a continuation for
    every example, persist raw outputs, then score with the task's metric."""
    started = time.perf_counter()
    examples = list(examples)
    if not examples:
        raise ValidationError("instruction_eval: no examples")
    task_names = {example.task for example in examples}
    if len(task_names) != 1:
        raise ValidationError(f"examples span multiple tasks: {sorted(task_names)}")
    task_name = task_names.pop()
    if task is not None and Task(task).value != task_name:
        raise ValidationError(f"examples are {task_name}, but task {Task(task).value} was requested")
    the_task = Task(task_name)

    max_new_tokens = (
        config.max_new_tokens_isg if the_task is Task.ISG else config.max_new_tokens_list
    )
    work = [
        _WorkItem(
            example_id=example.example_id,
            task=task_name,
            request=GenerationRequest(
                prompt=example.prompt,
                max_new_tokens=max_new_tokens,
                temperature=config.temperature,
                stop_sequences=config.stop_sequences,
            ),
        )
        for example in examples
    ]
    responses = _execute(work, client, config)

    predictions: dict[str, str] = {}
    failed = 0
    for example in examples:
        response = responses.get(example.example_id)
        if response is None or response.error is not None or response.text is None:
            failed += 1
            continue
        predictions[example.example_id] = response.text
    failure_rate = failed / len(examples)
    invalid = failure_rate > config.max_failure_rate
    if invalid:
        logger.error(
            "run invalid: %d of %d examples failed (%.1f%% > %.1f%% ceiling)",
            failed, len(examples), 100 * failure_rate, 100 * config.max_failure_rate,
        )

    metrics: dict = {"n": len(examples), "n_scored": len(predictions), "failures": failed}
    if predictions:
        metrics.update(score_instruction_task(examples, predictions))
    return EvalReport(
        kind="instruction",
        per_task={task_name: metrics},
        per_subset={},
        config=config.to_dict(),
        failures={
            "total": failed,
            "rate": failure_rate,
            "per_task": {task_name: failed},
        },
        invalid=invalid,
        timing={"wall_seconds": round(time.perf_counter() - started, 3)},
    )
