"""Matplotlib figure rendering for evaluation reports.

Figures are written to files next to the delimited output; nothing is shown
interactively, so the Agg backend is forced before pyplot is imported.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import RUBRIC_DIMENSIONS, ClassificationReport, RubricReport, TopKReport


def confusion_matrix_figure(report: ClassificationReport, path: Path) -> Path:
    """Heatmap of the confusion counts with per-cell annotations."""
    labels = report.matrix.labels
    grid = np.asarray(report.matrix.counts)
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(grid, cmap="Blues")
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right")
    ax.set_yticks(range(len(labels)), labels)
    ax.set_xlabel("Prediction")
    ax.set_ylabel("Ground truth")
    ax.set_title(f"Query classification (accuracy {report.accuracy * 100:.2f}%)")
    threshold = grid.max() / 2 if grid.max() else 0
    for i in range(len(labels)):
        for j in range(len(labels)):
            color = "white" if grid[i, j] > threshold else "black"
            ax.text(j, i, str(grid[i, j]), ha="center", va="center", color=color)
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def diagnosis_accuracy_figure(report: TopKReport, path: Path) -> Path:
    """Per-disease top-k accuracy bars with mean execution time in the title."""
    labels = sorted(report.per_class)
    fractions = [
        report.per_class[label][0] / report.per_class[label][1] for label in labels
    ]
    fig, ax = plt.subplots(figsize=(6, 4))
    bars = ax.bar(labels, fractions, color="#4878a8")
    for bar, label in zip(bars, labels):
        correct, total = report.per_class[label]
        ax.text(
            bar.get_x() + bar.get_width() / 2, bar.get_height() + 0.01,
            f"{correct}/{total}", ha="center", va="bottom", fontsize=9,
        )
    ax.set_ylim(0, 1.1)
    ax.set_ylabel(f"Top-{report.k} accuracy")
    ax.set_title(
        f"Diagnosis accuracy {report.accuracy * 100:.2f}% "
        f"(mean time {report.mean_exec_time_s:.1f}s)"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def rubric_averages_figure(report: RubricReport, path: Path) -> Path:
    """Grouped bars of the per-system averaged rubric dimensions."""
    columns = (*RUBRIC_DIMENSIONS, "final")
    systems = sorted(report.averages)
    x = np.arange(len(columns))
    width = 0.8 / max(len(systems), 1)
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, system in enumerate(systems):
        values = [report.averages[system][c] for c in columns]
        offset = (i - (len(systems) - 1) / 2) * width
        ax.bar(x + offset, values, width, label=system)
    ax.set_xticks(x, columns, rotation=30, ha="right")
    ax.set_ylim(0, 5)
    ax.set_ylabel("Mean score (0-5)")
    ax.set_title("Knowledge retrieval rubric averages")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
