"""Cross-run report rendering: delimited summaries plus figures.

Takes one or more evaluation-report JSON artifacts and writes, to an output
directory:

- ``per_task.csv`` / ``per_subset.csv`` — long-format ``run, name, metric,
  value`` rows for every scalar metric;
- ``improvement.csv`` — relative improvement (percent) of each run over the
  baseline run, per task and subset;
- ``subset_accuracy.png`` — grouped bars of subset accuracy per run;
- ``improvement.png`` — relative-improvement bars versus the baseline;
- ``edit_distance_hist.png`` — percent-edit-distance histograms for
  instruction runs that carry them.

Figures render through the Agg backend (no display needed) with pinned PNG
metadata, so identical inputs reproduce identical bytes.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402 (backend must be pinned first)

from chemtext.errors import ValidationError  # noqa: E402
from chemtext.harness.run import EvalReport  # noqa: E402
from chemtext.scoring import relative_improvement  # noqa: E402

logger = logging.getLogger(__name__)

_PNG_METADATA = {"Software": "chemtext"}


def load_report(path: str | Path) -> EvalReport:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError(f"run file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    return EvalReport.from_dict(obj)


def _labels_for(paths: Sequence[Path]) -> list[str]:
    """One label per run, from the file stem; duplicates get a counter."""
    labels: list[str] = []
    seen: dict[str, int] = {}
    for path in paths:
        stem = path.stem
        count = seen.get(stem, 0)
        seen[stem] = count + 1
        labels.append(stem if count == 0 else f"{stem}#{count + 1}")
    return labels


def _scalar_metrics(metrics: Mapping) -> dict[str, float]:
    return {
        key: float(value)
        for key, value in metrics.items()
        if isinstance(value, (int, float)) and not isinstance(value, bool)
    }


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _metric_rows(runs: Sequence[tuple[str, EvalReport]], section: str) -> list[list]:
    rows: list[list] = []
    for label, report in runs:
        table = report.per_task if section == "per_task" else report.per_subset
        for name, metrics in table.items():
            for metric, value in sorted(_scalar_metrics(metrics).items()):
                rows.append([label, name, metric, repr(value)])
    return rows


_IMPROVEMENT_METRICS = ("accuracy", "macro_f1")


def _improvement_rows(
    baseline: tuple[str, EvalReport], others: Sequence[tuple[str, EvalReport]]
) -> list[list]:
    rows: list[list] = []
    base_label, base_report = baseline
    for scope, table_of in (("task", lambda r: r.per_task), ("subset", lambda r: r.per_subset)):
        base_table = table_of(base_report)
        for label, report in others:
            for name, metrics in table_of(report).items():
                if name not in base_table:
                    continue
                for metric in _IMPROVEMENT_METRICS:
                    if metric not in metrics or metric not in base_table[name]:
                        continue
                    base_value = float(base_table[name][metric])
                    value = float(metrics[metric])
                    if base_value <= 0:
                        logger.warning(
                            "skipping improvement for %s %s/%s: baseline value %g is not positive",
                            label, name, metric, base_value,
                        )
                        continue
                    rows.append(
                        [
                            label,
                            base_label,
                            scope,
                            name,
                            metric,
                            repr(base_value),
                            repr(value),
                            repr(relative_improvement(value, base_value)),
                        ]
                    )
    return rows


def _figure_subset_accuracy(runs: Sequence[tuple[str, EvalReport]], path: Path) -> Path | None:
    labeled = [(label, report) for label, report in runs if report.per_subset]
    if not labeled:
        return None
    subset_names = list(labeled[0][1].per_subset)
    for _, report in labeled[1:]:
        for name in report.per_subset:
            if name not in subset_names:
                subset_names.append(name)

    fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(subset_names)), 4.0))
    width = 0.8 / len(labeled)
    for run_index, (label, report) in enumerate(labeled):
        xs, ys = [], []
        for subset_index, name in enumerate(subset_names):
            metrics = report.per_subset.get(name)
            if metrics is None or "accuracy" not in metrics:
                continue
            xs.append(subset_index + run_index * width)
            ys.append(float(metrics["accuracy"]))
        ax.bar(xs, ys, width=width, label=label)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(subset_names))])
    ax.set_xticklabels(subset_names, rotation=30, ha="right")
    ax.set_ylabel("accuracy")
    ax.set_title("Accuracy by benchmark subset")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_METADATA)
    plt.close(fig)
    return path


def _figure_improvement(rows: Sequence[Sequence], path: Path) -> Path | None:
    bars = [
        (f"{row[0]}: {row[3]}", float(row[7]))
        for row in rows
        if row[2] == "subset" and row[4] == "accuracy"
    ]
    if not bars:
        bars = [
            (f"{row[0]}: {row[3]}", float(row[7]))
            for row in rows
            if row[2] == "task" and row[4] == "accuracy"
        ]
    if not bars:
        return None
    names = [name for name, _ in bars]
    values = [value for _, value in bars]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.6 * len(bars)), 4.0))
    ax.bar(range(len(bars)), values)
    ax.set_xticks(range(len(bars)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("relative improvement over baseline (%)")
    ax.set_title("Accuracy improvement vs baseline")
    ax.axhline(0.0, linewidth=0.8)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_METADATA)
    plt.close(fig)
    return path


def _figure_edit_distance(runs: Sequence[tuple[str, EvalReport]], path: Path) -> Path | None:
    series: list[tuple[str, list[float], list[int]]] = []
    for label, report in runs:
        for task_name, metrics in report.per_task.items():
            histogram = metrics.get("pct_edit_distance_histogram")
            if isinstance(histogram, Mapping):
                series.append(
                    (f"{label}: {task_name}", list(histogram["bin_edges"]), list(histogram["counts"]))
                )
    if not series:
        return None
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    n_bins = len(series[0][2])
    width = 0.8 / len(series)
    for index, (label, edges, counts) in enumerate(series):
        ax.bar([b + index * width for b in range(n_bins)], counts, width=width, label=label)
    labels = [f"{edges[i]:.1f}" for i in range(n_bins - 1)] + [f"≥{edges[-1]:.1f}"]
    ax.set_xticks(range(n_bins))
    ax.set_xticklabels(labels)
    ax.set_xlabel("percent edit distance (bin lower edge)")
    ax.set_ylabel("examples")
    ax.set_title("Edit-distance distribution")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_METADATA)
    plt.close(fig)
    return path


def render_report(
    run_paths: Sequence[str | Path],
    out_dir: str | Path,
    baseline: str | Path | None = None,
    subset_filter: Sequence[str] | None = None,
) -> list[Path]:
    """Render CSV summaries and figures for the given runs; returns the
    paths written.

    ``baseline`` names the run that improvements are computed against
    (default: the first run, when two or more are given).  ``subset_filter``
    restricts per-subset output to the named subsets.
    """
    if not run_paths:
        raise ValidationError("render_report: no runs")
    paths = [Path(p) for p in run_paths]
    baseline_path = Path(baseline) if baseline is not None else None
    if baseline_path is not None and baseline_path not in paths:
        paths = [baseline_path] + paths
    labels = _labels_for(paths)
    runs = [(label, load_report(path)) for label, path in zip(labels, paths)]

    if subset_filter is not None:
        wanted = set(subset_filter)
        for _, report in runs:
            report.per_subset = {
                name: metrics for name, metrics in report.per_subset.items() if name in wanted
            }

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    written.append(
        _write_csv(
            out_dir / "per_task.csv",
            ["run", "task", "metric", "value"],
            _metric_rows(runs, "per_task"),
        )
    )
    subset_rows = _metric_rows(runs, "per_subset")
    if subset_rows:
        written.append(
            _write_csv(
                out_dir / "per_subset.csv",
                ["run", "subset", "metric", "value"],
                subset_rows,
            )
        )

    improvement_rows: list[list] = []
    if len(runs) >= 2:
        base_index = 0
        if baseline_path is not None:
            base_index = paths.index(baseline_path)
        others = [run for index, run in enumerate(runs) if index != base_index]
        improvement_rows = _improvement_rows(runs[base_index], others)
        if improvement_rows:
            written.append(
                _write_csv(
                    out_dir / "improvement.csv",
                    [
                        "run", "baseline", "scope", "name", "metric",
                        "baseline_value", "value", "relative_improvement_pct",
                    ],
                    improvement_rows,
                )
            )

    for maybe in (
        _figure_subset_accuracy(runs, out_dir / "subset_accuracy.png"),
        _figure_improvement(improvement_rows, out_dir / "improvement.png"),
        _figure_edit_distance(runs, out_dir / "edit_distance_hist.png"),
    ):
        if maybe is not None:
            written.append(maybe)
    return written
