"""Named benchmark subsets and per-subset aggregation.

Eight built-in subsets group the benchmark's tasks by domain (chemistry,
chemistry+bio/medicine, health, math, STEM, humanities, social sciences,
other); an ``Avg`` subset always covers every task present in the results.
Subset values are unweighted means of member-task values, so a report's
subset numbers recompute exactly from its per-task numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean
from typing import Mapping, Sequence

from chemtext.errors import ValidationError

#: Name of the all-tasks mean that accompanies the named subsets.
AVG_SUBSET_NAME = "Avg"


@dataclass(frozen=True)
class SubsetDef:
    """A named group of benchmark tasks."""

    name: str
    task_names: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("subset name must be non-empty")
        if not self.task_names:
            raise ValidationError(f"subset {self.name!r} has no tasks")


def normalize_task_name(name: str) -> str:
    """Canonical task-name form: trimmed, lowercased, spaces → underscores
    (``"College Chemistry"`` and ``"college_chemistry"`` are the same task)."""
    return "_".join(name.strip().lower().split())


_CHEM = ("college_chemistry", "high_school_chemistry")
_MED = (
    "college_biology",
    "high_school_biology",
    "clinical_knowledge",
    "college_medicine",
    "medical_genetics",
    "professional_medicine",
    "virology",
)

DEFAULT_SUBSETS: tuple[SubsetDef, ...] = (
    SubsetDef("Chem", _CHEM),
    SubsetDef("ChemBioMed", _CHEM + _MED),
    SubsetDef(
        "Health",
        (
            "anatomy",
            "clinical_knowledge",
            "college_medicine",
            "human_aging",
            "medical_genetics",
            "nutrition",
            "professional_medicine",
            "virology",
        ),
    ),
    SubsetDef(
        "Math",
        (
            "abstract_algebra",
            "college_mathematics",
            "elementary_mathematics",
            "high_school_mathematics",
            "high_school_statistics",
        ),
    ),
    SubsetDef(
        "STEM",
        (
            "college_chemistry",
            "high_school_chemistry",
            "astronomy",
            "college_physics",
            "high_school_physics",
            "conceptual_physics",
            "college_biology",
            "high_school_biology",
            "college_computer_science",
            "high_school_computer_science",
            "computer_security",
            "machine_learning",
            "electrical_engineering",
            "abstract_algebra",
            "college_mathematics",
            "high_school_mathematics",
            "high_school_statistics",
            "elementary_mathematics",
        ),
    ),
    SubsetDef(
        "Humanities",
        (
            "high_school_european_history",
            "high_school_us_history",
            "high_school_world_history",
            "prehistory",
            "formal_logic",
            "logical_fallacies",
            "moral_disputes",
            "moral_scenarios",
            "philosophy",
            "world_religions",
            "international_law",
            "jurisprudence",
            "professional_law",
        ),
    ),
    SubsetDef(
        "Social Sci.",
        (
            "high_school_government_and_politics",
            "public_relations",
            "security_studies",
            "us_foreign_policy",
            "human_sexuality",
            "sociology",
            "econometrics",
            "high_school_macroeconomics",
            "high_school_microeconomics",
            "high_school_geography",
            "high_school_psychology",
            "professional_psychology",
        ),
    ),
    SubsetDef(
        "Other",
        (
            "global_facts",
            "miscellaneous",
            "business_ethics",
            "professional_accounting",
            "management",
            "marketing",
            "anatomy",
            "clinical_knowledge",
            "college_medicine",
            "human_aging",
            "medical_genetics",
            "nutrition",
            "professional_medicine",
            "virology",
        ),
    ),
)


def _normalized_results(per_task: Mapping[str, float]) -> dict[str, float]:
    normalized: dict[str, float] = {}
    for name, value in per_task.items():
        key = normalize_task_name(name)
        if key in normalized:
            raise ValidationError(f"two result tasks normalize to the same name {key!r}")
        normalized[key] = value
    return normalized


def aggregate_subsets(
    per_task: Mapping[str, float],
    subsets: Sequence[SubsetDef] | None = None,
) -> dict[str, float]:
    """Unweighted mean of member-task values per subset.

    With ``subsets=None`` the built-in defaults apply, plus ``Avg`` over
    every task in ``per_task``.  A subset task absent from the results is a
    :class:`ValidationError` naming both the subset and the task.
    """
    if not per_task:
        raise ValidationError("aggregate_subsets: no per-task results")
    results = _normalized_results(per_task)
    use_defaults = subsets is None
    chosen = DEFAULT_SUBSETS if use_defaults else tuple(subsets)

    out: dict[str, float] = {}
    for subset in chosen:
        values = []
        for task in subset.task_names:
            key = normalize_task_name(task)
            if key not in results:
                raise ValidationError(
                    f"subset {subset.name!r} needs task {task!r}, which is absent from results"
                )
            values.append(results[key])
        out[subset.name] = fmean(values)
    if use_defaults:
        out[AVG_SUBSET_NAME] = fmean(results.values())
    return out


def applicable_subsets(per_task: Mapping[str, float]) -> list[SubsetDef]:
    """The built-in subsets whose member tasks are all present in
    ``per_task`` — what an evaluation run aggregates automatically."""
    results = _normalized_results(per_task)
    return [
        subset
        for subset in DEFAULT_SUBSETS
        if all(normalize_task_name(task) in results for task in subset.task_names)
    ]
