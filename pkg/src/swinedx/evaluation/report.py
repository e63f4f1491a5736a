"""Report rendering: JSON payloads, plain-text tables, and CSV output."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

from .metrics import RUBRIC_DIMENSIONS, ClassificationReport, RubricReport, TopKReport


def _fmt(value, digits: int = 4) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def render_table(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Fixed-width text table."""
    cells = [[str(h) for h in headers]] + [[_fmt(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for r, row in enumerate(cells):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


# --- classification ---

def classification_payload(report: ClassificationReport) -> dict:
    return {
        "task": "classification",
        "labels": list(report.matrix.labels),
        "counts": [list(row) for row in report.matrix.counts],
        "per_class": {
            label: {"precision": m.precision, "recall": m.recall, "f1": m.f1}
            for label, m in report.per_class.items()
        },
        "accuracy": report.accuracy,
        "total": report.matrix.total(),
    }


def classification_table(report: ClassificationReport) -> str:
    rows = [
        [label, m.precision, m.recall, m.f1]
        for label, m in report.per_class.items()
    ]
    table = render_table(["class", "precision", "recall", "f1"], rows)
    return f"{table}\n\naccuracy: {report.accuracy:.4f} ({report.accuracy * 100:.2f}%)"


def classification_csv(report: ClassificationReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "precision", "recall", "f1"])
        for label, m in report.per_class.items():
            writer.writerow([label, m.precision, m.recall, m.f1])
        writer.writerow(["accuracy", report.accuracy, "", ""])


# --- diagnosis ---

def diagnosis_payload(report: TopKReport) -> dict:
    return {
        "task": "diagnosis",
        "k": report.k,
        "accuracy": report.accuracy,
        "per_class": {
            label: {"correct": c, "total": t} for label, (c, t) in report.per_class.items()
        },
        "per_class_time_s": report.per_class_time,
        "mean_exec_time_s": report.mean_exec_time_s,
    }


def diagnosis_table(report: TopKReport) -> str:
    rows = [
        [label, f"{c}/{t}", report.per_class_time[label]]
        for label, (c, t) in sorted(report.per_class.items())
    ]
    table = render_table(["disease", f"correct/total (top-{report.k})", "mean time (s)"], rows)
    return (
        f"{table}\n\naccuracy: {report.accuracy * 100:.2f}%  "
        f"mean execution time: {report.mean_exec_time_s:.2f}s"
    )


def diagnosis_csv(report: TopKReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["disease", "correct", "total", "mean_time_s"])
        for label, (c, t) in sorted(report.per_class.items()):
            writer.writerow([label, c, t, report.per_class_time[label]])
        writer.writerow(["accuracy", report.accuracy, "", ""])


# --- rubric ---

_COLUMNS = (*RUBRIC_DIMENSIONS, "final")


def rubric_payload(report: RubricReport, stats: dict | None = None) -> dict:
    payload = {
        "task": "retrieval-rubric",
        "rows": [
            {"split": split, "dataset": dataset, "system": system, "n": report.row_counts[key], **row}
            for key, row in sorted(report.rows.items())
            for split, dataset, system in [key]
        ],
        "averages": report.averages,
    }
    if stats:
        payload["significance"] = stats
    return payload


def rubric_table(report: RubricReport) -> str:
    rows = []
    for (split, dataset, system), row in sorted(report.rows.items()):
        rows.append([split, dataset, system, *[row[c] for c in _COLUMNS]])
    for system, row in sorted(report.averages.items()):
        rows.append(["average", "-", system, *[row[c] for c in _COLUMNS]])
    return render_table(["split", "dataset", "system", *_COLUMNS], rows)


def rubric_csv(report: RubricReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["split", "dataset", "system", *_COLUMNS])
        for (split, dataset, system), row in sorted(report.rows.items()):
            writer.writerow([split, dataset, system, *[row[c] for c in _COLUMNS]])
        for system, row in sorted(report.averages.items()):
            writer.writerow(["average", "-", system, *[row[c] for c in _COLUMNS]])


def write_json(payload: dict, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
