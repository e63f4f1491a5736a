"""Classification, diagnostic, and rubric metrics recomputed from raw records."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import EmptyMatrix, EmptyRecords, EmptyScores
from .datasets import DiagnosisRecord, RubricScore

RUBRIC_DIMENSIONS = ("expansiveness", "coherence", "correctness", "relevance", "accuracy")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Row = ground truth, column = prediction, in label order."""

    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.labels)
        if len(self.counts) != n or any(len(row) != n for row in self.counts):
            raise ValueError("counts grid must be square over the labels")
        if any(c < 0 for row in self.counts for c in row):
            raise ValueError("counts must be non-negative")

    @classmethod
    def from_pairs(
        cls, pairs: Iterable[tuple[str, str]], labels: Sequence[str] | None = None
    ) -> "ConfusionMatrix":
        pairs = list(pairs)
        if labels is None:
            seen: list[str] = []
            for actual, predicted in pairs:
                for label in (actual, predicted):
                    if label not in seen:
                        seen.append(label)
            labels = seen
        index = {label: i for i, label in enumerate(labels)}
        grid = [[0] * len(labels) for _ in labels]
        for actual, predicted in pairs:
            grid[index[actual]][index[predicted]] += 1
        return cls(labels=tuple(labels), counts=tuple(tuple(row) for row in grid))

    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


@dataclass(frozen=True)
class ClassMetrics:
    """Per-class precision/recall/F1; None marks an undefined (0/0) value."""

    precision: float | None
    recall: float | None
    f1: float | None


@dataclass(frozen=True)
class ClassificationReport:
    matrix: ConfusionMatrix
    per_class: dict[str, ClassMetrics]
    accuracy: float


def class_metrics(matrix: ConfusionMatrix) -> ClassificationReport:
    """Precision, recall, F1 per class plus overall accuracy.

    Zero denominators yield None rather than a conventional zero, so an
    absent class is visibly undefined instead of silently perfect or bad.
    """
    total = matrix.total()
    if total == 0:
        raise EmptyMatrix("confusion matrix has no counts")
    grid = np.asarray(matrix.counts, dtype=np.int64)
    per_class: dict[str, ClassMetrics] = {}
    for i, label in enumerate(matrix.labels):
        tp = int(grid[i, i])
        col = int(grid[:, i].sum())
        row = int(grid[i, :].sum())
        precision = tp / col if col else None
        recall = tp / row if row else None
        if precision is None or recall is None or (precision + recall) == 0:
            f1 = None if precision is None or recall is None else 0.0
        else:
            f1 = 2 * precision * recall / (precision + recall)
        per_class[label] = ClassMetrics(precision=precision, recall=recall, f1=f1)
    accuracy = float(np.trace(grid)) / total
    return ClassificationReport(matrix=matrix, per_class=per_class, accuracy=accuracy)


@dataclass(frozen=True)
class TopKReport:
    k: int
    accuracy: float
    per_class: dict[str, tuple[int, int]]  # label -> (correct, total)
    per_class_time: dict[str, float]
    mean_exec_time_s: float


def top_k_accuracy(records: Sequence[DiagnosisRecord], k: int = 2) -> TopKReport:
    """Fraction of cases whose actual label appears in the top k of the ranking.

    Execution times are averaged per class first, then over classes, so a
    class with many cases does not dominate the overall figure.
    """
    if not records:
        raise EmptyRecords("no diagnosis records")
    if k < 1:
        raise ValueError("k must be >= 1")
    correct_by: dict[str, int] = {}
    total_by: dict[str, int] = {}
    times_by: dict[str, list[float]] = {}
    hits = 0
    for record in records:
        label = record.actual
        total_by[label] = total_by.get(label, 0) + 1
        times_by.setdefault(label, []).append(record.exec_time_s)
        if label in record.ranking[:k]:
            correct_by[label] = correct_by.get(label, 0) + 1
            hits += 1
        else:
            correct_by.setdefault(label, 0)
    per_class = {label: (correct_by[label], total_by[label]) for label in total_by}
    per_class_time = {label: float(np.mean(ts)) for label, ts in times_by.items()}
    mean_time = float(np.mean(list(per_class_time.values())))
    return TopKReport(
        k=k,
        accuracy=hits / len(records),
        per_class=per_class,
        per_class_time=per_class_time,
        mean_exec_time_s=mean_time,
    )


@dataclass(frozen=True)
class RubricReport:
    # (split, dataset, system) -> {dimension or "final": mean}
    rows: dict[tuple[str, str, str], dict[str, float]]
    # system -> {dimension or "final": unweighted mean over (split, dataset) rows}
    averages: dict[str, dict[str, float]]
    row_counts: dict[tuple[str, str, str], int]


def rubric_aggregate(scores: Sequence[RubricScore]) -> RubricReport:
    """Dimension means per (split, dataset, system) plus the per-system grand average.

    The grand average is the unweighted mean over the (split, dataset) rows,
    not over pooled records, so differently sized groups contribute equally.
    """
    if not scores:
        raise EmptyScores("no rubric scores")
    grouped: dict[tuple[str, str, str], list[RubricScore]] = {}
    for score in scores:
        grouped.setdefault((score.split, score.dataset, score.system), []).append(score)
    rows: dict[tuple[str, str, str], dict[str, float]] = {}
    for key, group in grouped.items():
        row = {
            dim: float(np.mean([s.dimensions[dim] for s in group]))
            for dim in RUBRIC_DIMENSIONS
        }
        row["final"] = float(np.mean([s.final for s in group]))
        rows[key] = row
    averages: dict[str, dict[str, float]] = {}
    systems = {system for (_, _, system) in rows}
    for system in systems:
        system_rows = [row for (s, d, sys_), row in rows.items() if sys_ == system]
        averages[system] = {
            column: float(np.mean([row[column] for row in system_rows]))
            for column in (*RUBRIC_DIMENSIONS, "final")
        }
    return RubricReport(
        rows=rows,
        averages=averages,
        row_counts={key: len(group) for key, group in grouped.items()},
    )
