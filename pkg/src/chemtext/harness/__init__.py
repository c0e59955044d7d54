"""Evaluation harness: prompt construction, endpoint clients, bounded-
concurrency execution with crash-safe resume, and report aggregation."""

from __future__ import annotations

from chemtext.harness.client import (
    GenerationClient,
    GenerationRequest,
    GenerationResponse,
    HttpGenerationClient,
)
from chemtext.harness.mcq import (
    LETTERS,
    McqItem,
    TaskData,
    build_mcq_prompt,
    load_mcq_csv,
    load_mcq_jsonl,
    load_mmlu_dir,
    select_answer,
)
from chemtext.harness.mockserver import (
    MockClient,
    MockGenerationServer,
    constant,
    flaky,
    gold_echo,
    hashed_choice,
)
from chemtext.harness.run import (
    EvalConfig,
    EvalReport,
    instruction_eval,
    run_eval,
    score_instruction_task,
    select_shots,
)
from chemtext.harness.subsets import (
    AVG_SUBSET_NAME,
    DEFAULT_SUBSETS,
    SubsetDef,
    aggregate_subsets,
    applicable_subsets,
    normalize_task_name,
)

__all__ = [
    "AVG_SUBSET_NAME",
    "DEFAULT_SUBSETS",
    "EvalConfig",
    "EvalReport",
    "GenerationClient",
    "GenerationRequest",
    "GenerationResponse",
    "HttpGenerationClient",
    "LETTERS",
    "McqItem",
    "MockClient",
    "MockGenerationServer",
    "SubsetDef",
    "TaskData",
    "aggregate_subsets",
    "applicable_subsets",
    "build_mcq_prompt",
    "constant",
    "flaky",
    "gold_echo",
    "hashed_choice",
    "instruction_eval",
    "load_mcq_csv",
    "load_mcq_jsonl",
    "load_mmlu_dir",
    "normalize_task_name",
    "run_eval",
    "score_instruction_task",
    "select_answer",
    "select_shots",
]
