"""Report rendering tests: CSV tables, matplotlib figures, baseline
improvement math, label deduplication, and subset filtering.
"""
from __future__ import annotations

import csv
import json
import logging

import pytest

from chemtext.errors import ValidationError
from chemtext.harness import EvalReport
from chemtext.report import load_report, render_report
from chemtext.scoring import relative_improvement


def write_artifact(path, per_task, per_subset=None, kind="mcq"):
    artifact = {
        "kind": kind,
        "per_task": per_task,
        "per_subset": per_subset or {},
        "config": {"model_id": "m", "seed": 0},
        "failures": {"total": 0, "rate": 0.0, "per_task": {}},
        "invalid": False,
        "timing": {"wall_seconds": 1.0},
        "run_config": {"command": "bench run"},
    }
    path.write_text(json.dumps(artifact))
    return path


def mcq_metrics(accuracy, macro_f1=None):
    return {
        "n": 4,
        "n_scored": 4,
        "failures": 0,
        "accuracy": accuracy,
        "macro_f1": accuracy if macro_f1 is None else macro_f1,
    }


def read_csv(path):
    with path.open(newline="") as handle:
        return list(csv.DictReader(handle))


class TestLoadReport:
    def test_round_trip(self, tmp_path):
        path = write_artifact(
            tmp_path / "run.json",
            {"college_chemistry": mcq_metrics(0.5)},
            {"Chem": {"accuracy": 0.5, "macro_f1": 0.5}},
        )
        report = load_report(path)
        assert isinstance(report, EvalReport)
        assert report.kind == "mcq"
        assert report.per_task["college_chemistry"]["accuracy"] == 0.5
        assert report.per_subset["Chem"]["accuracy"] == 0.5

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="not found"):
            load_report(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError, match="not valid JSON"):
            load_report(path)

    def test_missing_required_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"kind": "mcq", "config": {}}))
        with pytest.raises(ValidationError, match="per_task"):
            load_report(path)


class TestRenderReport:
    def test_no_runs_rejected(self, tmp_path):
        with pytest.raises(ValidationError, match="no runs"):
            render_report([], tmp_path / "out")

    def test_single_run_without_subsets(self, tmp_path):
        run = write_artifact(tmp_path / "solo.json", {"t": mcq_metrics(0.5)})
        out_dir = tmp_path / "out"
        written = render_report([run], out_dir)
        assert [p.name for p in written] == ["per_task.csv"]
        rows = read_csv(out_dir / "per_task.csv")
        assert {row["run"] for row in rows} == {"solo"}
        by_metric = {row["metric"]: row["value"] for row in rows if row["task"] == "t"}
        assert float(by_metric["accuracy"]) == 0.5
        assert float(by_metric["n"]) == 4

    def test_subsets_produce_table_and_figure(self, tmp_path):
        run = write_artifact(
            tmp_path / "run.json",
            {"t": mcq_metrics(0.5)},
            {"Chem": {"accuracy": 0.5, "macro_f1": 0.4}, "Avg": {"accuracy": 0.5, "macro_f1": 0.4}},
        )
        out_dir = tmp_path / "out"
        written = render_report([run], out_dir)
        names = {p.name for p in written}
        assert "per_subset.csv" in names
        assert "subset_accuracy.png" in names
        assert (out_dir / "subset_accuracy.png").stat().st_size > 0
        rows = read_csv(out_dir / "per_subset.csv")
        assert {row["subset"] for row in rows} == {"Chem", "Avg"}

    def test_improvement_against_baseline(self, tmp_path):
        base = write_artifact(
            tmp_path / "base.json",
            {"t": mcq_metrics(0.5, macro_f1=0.25)},
            {"Chem": {"accuracy": 0.5, "macro_f1": 0.25}},
        )
        tuned = write_artifact(
            tmp_path / "tuned.json",
            {"t": mcq_metrics(0.75, macro_f1=0.5)},
            {"Chem": {"accuracy": 0.75, "macro_f1": 0.5}},
        )
        out_dir = tmp_path / "out"
        written = render_report([base, tuned], out_dir, baseline=base)
        names = {p.name for p in written}
        assert "improvement.csv" in names
        assert "improvement.png" in names
        rows = read_csv(out_dir / "improvement.csv")
        assert all(row["baseline"] == "base" for row in rows)
        assert all(row["run"] == "tuned" for row in rows)
        by_key = {
            (row["scope"], row["name"], row["metric"]): float(row["relative_improvement_pct"])
            for row in rows
        }
        assert by_key[("task", "t", "accuracy")] == relative_improvement(0.75, 0.5)
        assert by_key[("task", "t", "macro_f1")] == relative_improvement(0.5, 0.25)
        assert by_key[("subset", "Chem", "accuracy")] == 50.0

    def test_first_run_is_default_baseline(self, tmp_path):
        base = write_artifact(tmp_path / "a.json", {"t": mcq_metrics(0.5)})
        tuned = write_artifact(tmp_path / "b.json", {"t": mcq_metrics(1.0)})
        out_dir = tmp_path / "out"
        render_report([base, tuned], out_dir)
        rows = read_csv(out_dir / "improvement.csv")
        assert {row["baseline"] for row in rows} == {"a"}
        assert {row["run"] for row in rows} == {"b"}

    def test_baseline_outside_runs_is_prepended(self, tmp_path):
        base = write_artifact(tmp_path / "base.json", {"t": mcq_metrics(0.5)})
        tuned = write_artifact(tmp_path / "tuned.json", {"t": mcq_metrics(1.0)})
        out_dir = tmp_path / "out"
        render_report([tuned], out_dir, baseline=base)
        task_rows = read_csv(out_dir / "per_task.csv")
        assert {row["run"] for row in task_rows} == {"base", "tuned"}
        improvement = read_csv(out_dir / "improvement.csv")
        assert improvement[0]["run"] == "tuned"
        assert float(improvement[0]["relative_improvement_pct"]) == 100.0

    def test_duplicate_stems_get_counters(self, tmp_path):
        (tmp_path / "x").mkdir()
        (tmp_path / "y").mkdir()
        first = write_artifact(tmp_path / "x" / "run.json", {"t": mcq_metrics(0.5)})
        second = write_artifact(tmp_path / "y" / "run.json", {"t": mcq_metrics(1.0)})
        out_dir = tmp_path / "out"
        render_report([first, second], out_dir)
        rows = read_csv(out_dir / "per_task.csv")
        assert {row["run"] for row in rows} == {"run", "run#2"}

    def test_nonpositive_baseline_skipped_with_warning(self, tmp_path, caplog):
        base = write_artifact(tmp_path / "base.json", {"t": mcq_metrics(0.0)})
        tuned = write_artifact(tmp_path / "tuned.json", {"t": mcq_metrics(1.0)})
        out_dir = tmp_path / "out"
        with caplog.at_level(logging.WARNING):
            written = render_report([base, tuned], out_dir, baseline=base)
        assert "not positive" in caplog.text
        assert not any(p.name == "improvement.csv" for p in written)

    def test_subset_filter(self, tmp_path):
        run = write_artifact(
            tmp_path / "run.json",
            {"t": mcq_metrics(0.5)},
            {
                "Chem": {"accuracy": 0.5, "macro_f1": 0.5},
                "Health": {"accuracy": 0.6, "macro_f1": 0.6},
                "Avg": {"accuracy": 0.55, "macro_f1": 0.55},
            },
        )
        out_dir = tmp_path / "out"
        render_report([run], out_dir, subset_filter=["Chem", "Avg"])
        rows = read_csv(out_dir / "per_subset.csv")
        assert {row["subset"] for row in rows} == {"Chem", "Avg"}

    def test_edit_distance_histogram_figure(self, tmp_path):
        histogram = {
            "bin_edges": [i / 10 for i in range(11)],
            "counts": [3, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1],
        }
        run = write_artifact(
            tmp_path / "mfg.json",
            {"MFG": {
                "n": 5,
                "mean_pct_edit_distance": 0.2,
                "pct_edit_distance_histogram": histogram,
            }},
            kind="instruction",
        )
        out_dir = tmp_path / "out"
        written = render_report([run], out_dir)
        names = {p.name for p in written}
        assert "edit_distance_hist.png" in names
        assert (out_dir / "edit_distance_hist.png").stat().st_size > 0
        # The nested histogram is not a scalar, so the CSV keeps scalars only.
        rows = read_csv(out_dir / "per_task.csv")
        metrics = {row["metric"] for row in rows}
        assert "pct_edit_distance_histogram" not in metrics
        assert "mean_pct_edit_distance" in metrics
