"""Evaluation harness: metric recomputation from raw labeled fixtures."""

from .datasets import (
    ClassificationRecord,
    DiagnosisRecord,
    LabeledExample,
    RubricScore,
    load_dataset,
)
from .metrics import (
    ClassificationReport,
    ClassMetrics,
    ConfusionMatrix,
    RubricReport,
    TopKReport,
    class_metrics,
    rubric_aggregate,
    top_k_accuracy,
)
from .stats import BootstrapResult, TTestResult, bootstrap_t, paired_t_test, t_sf

__all__ = [
    "BootstrapResult",
    "ClassMetrics",
    "ClassificationRecord",
    "ClassificationReport",
    "ConfusionMatrix",
    "DiagnosisRecord",
    "LabeledExample",
    "RubricReport",
    "RubricScore",
    "TTestResult",
    "TopKReport",
    "bootstrap_t",
    "class_metrics",
    "load_dataset",
    "paired_t_test",
    "rubric_aggregate",
    "t_sf",
    "top_k_accuracy",
]
