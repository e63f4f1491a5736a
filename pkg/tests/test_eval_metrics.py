"""Metric recomputation against published-count fixtures and identities."""

import pytest

from swinedx.errors import EmptyMatrix, EmptyRecords, EmptyScores
from swinedx.evaluation import (
    ConfusionMatrix,
    DiagnosisRecord,
    RubricScore,
    class_metrics,
    rubric_aggregate,
    top_k_accuracy,
)

# Test-set confusion grid: rows are ground truth, columns predictions,
# order General / Retrieval / Diagnosis / TBC.
CONFUSION_LABELS = ("General", "Retrieval", "Diagnosis", "TBC")
CONFUSION_COUNTS = (
    (24, 0, 0, 0),
    (6, 301, 5, 6),
    (0, 2, 82, 1),
    (2, 0, 0, 32),
)

# Published per-class metrics for that grid.
PUBLISHED_CLASS_METRICS = {
    "General": (0.750, 1.000, 0.857),
    "Retrieval": (0.993, 0.947, 0.969),
    "Diagnosis": (0.943, 0.965, 0.953),
    "TBC": (0.821, 0.941, 0.877),
}
PUBLISHED_ACCURACY_PCT = 95.23


def classification_report():
    matrix = ConfusionMatrix(labels=CONFUSION_LABELS, counts=CONFUSION_COUNTS)
    return class_metrics(matrix)


def test_published_class_metrics_reproduced():
    report = classification_report()
    for label, (precision, recall, f1) in PUBLISHED_CLASS_METRICS.items():
        metrics = report.per_class[label]
        assert metrics.precision == pytest.approx(precision, abs=0.0005)
        assert metrics.recall == pytest.approx(recall, abs=0.0005)
        assert metrics.f1 == pytest.approx(f1, abs=0.0005)


def test_published_accuracy_reproduced():
    report = classification_report()
    assert report.accuracy * 100 == pytest.approx(PUBLISHED_ACCURACY_PCT, abs=0.01)
    assert report.matrix.total() == 461
    assert report.accuracy == pytest.approx(439 / 461)


def test_identity_matrix_is_perfect():
    matrix = ConfusionMatrix(labels=("a", "b"), counts=((3, 0), (0, 5)))
    report = class_metrics(matrix)
    assert report.accuracy == 1.0
    for metrics in report.per_class.values():
        assert metrics.precision == metrics.recall == metrics.f1 == 1.0


def test_confusion_identities():
    report = classification_report()
    grid = report.matrix.counts
    trace = sum(grid[i][i] for i in range(len(grid)))
    # Micro-averaged recall equals accuracy.
    micro = trace / report.matrix.total()
    assert micro == pytest.approx(report.accuracy)
    for metrics in report.per_class.values():
        for value in (metrics.precision, metrics.recall, metrics.f1):
            assert 0.0 <= value <= 1.0


def test_zero_denominator_is_explicitly_undefined():
    matrix = ConfusionMatrix(labels=("a", "b"), counts=((2, 0), (0, 0)))
    report = class_metrics(matrix)
    assert report.per_class["b"].precision is None
    assert report.per_class["b"].recall is None
    assert report.per_class["b"].f1 is None


def test_empty_matrix_rejected():
    with pytest.raises(EmptyMatrix):
        class_metrics(ConfusionMatrix(labels=("a",), counts=((0,),)))


def test_from_pairs_builds_grid():
    pairs = [("a", "a"), ("a", "b"), ("b", "b")]
    matrix = ConfusionMatrix.from_pairs(pairs, labels=("a", "b"))
    assert matrix.counts == ((1, 1), (0, 1))


# --- top-k accuracy ---

def tally_records(tallies, prefix=""):
    """Materialize (correct, total) tallies as top-2 diagnosis records."""
    records = []
    case = 0
    for label, (correct, total) in tallies.items():
        for i in range(total):
            case += 1
            if i < correct:
                ranking = (label, "OTHER")
            else:
                ranking = ("OTHER", "OTHER2")
            records.append(
                DiagnosisRecord(
                    case_id=f"{prefix}{case}", actual=label, ranking=ranking, exec_time_s=10.0
                )
            )
    return records


GPT4O_TEST = {"ASF": (5, 5), "PRRS": (11, 14), "PED": (5, 5), "FMD": (7, 7), "OOD": (1, 1)}
GEMINI_VALIDATION = {"ASF": (7, 7), "PRRS": (5, 5), "PED": (4, 4), "FMD": (3, 6), "OOD": (30, 30)}


def test_top2_accuracy_published_examples():
    gpt = top_k_accuracy(tally_records(GPT4O_TEST), k=2)
    assert gpt.accuracy * 100 == pytest.approx(90.63, abs=0.01)
    gemini = top_k_accuracy(tally_records(GEMINI_VALIDATION), k=2)
    assert gemini.accuracy * 100 == pytest.approx(94.23, abs=0.01)
    assert gemini.per_class["FMD"] == (3, 6)


def test_rank_one_hit_counts():
    record = DiagnosisRecord("c1", "ASF", ("ASF", "PRRS"), 1.0)
    assert top_k_accuracy([record], k=2).accuracy == 1.0


def test_rank_beyond_k_misses():
    record = DiagnosisRecord("c1", "ASF", ("PRRS", "PED", "ASF"), 1.0)
    assert top_k_accuracy([record], k=2).accuracy == 0.0
    assert top_k_accuracy([record], k=3).accuracy == 1.0


def test_mean_time_averages_per_class_then_overall():
    records = [
        DiagnosisRecord("a", "ASF", ("ASF",), 10.0),
        DiagnosisRecord("b", "ASF", ("ASF",), 20.0),
        DiagnosisRecord("c", "PED", ("PED",), 40.0),
    ]
    report = top_k_accuracy(records)
    assert report.per_class_time["ASF"] == pytest.approx(15.0)
    assert report.mean_exec_time_s == pytest.approx((15.0 + 40.0) / 2)


def test_empty_records_rejected():
    with pytest.raises(EmptyRecords):
        top_k_accuracy([])


# --- rubric aggregation ---

def row_score(system, split, dataset, values, final):
    dims = dict(
        zip(("accuracy", "relevance", "correctness", "coherence", "expansiveness"), values)
    )
    return RubricScore.build(
        example_id=f"{system}-{split}-{dataset}",
        system=system,
        split=split,
        dataset=dataset,
        dimensions=dims,
        final=final,
    )


# Published per-row means: (accuracy, relevance, correctness, coherence,
# expansiveness) and the row's final score.
TABLE_ROWS = [
    ("baseline", "validation", "vaccine", (4.12, 4.22, 4.15, 4.51, 4.03), 4.20),
    ("baseline", "validation", "disease", (1.89, 1.57, 2.09, 2.98, 1.82), 2.06),
    ("baseline", "test", "vaccine", (3.50, 3.62, 3.47, 4.10, 3.27), 3.57),
    ("baseline", "test", "disease", (3.32, 3.36, 3.42, 4.07, 2.76), 3.39),
    ("ours", "validation", "vaccine", (4.46, 4.49, 4.47, 4.74, 4.17), 4.46),
    ("ours", "validation", "disease", (4.14, 4.21, 4.15, 4.69, 3.44), 4.13),
    ("ours", "test", "vaccine", (4.04, 4.04, 4.04, 4.49, 3.80), 4.08),
    ("ours", "test", "disease", (3.84, 3.85, 3.83, 4.52, 3.42), 4.02),
]

PUBLISHED_AVERAGES = {
    "baseline": {
        "accuracy": 3.21, "relevance": 3.19, "correctness": 3.28,
        "coherence": 3.92, "expansiveness": 2.97, "final": 3.31,
    },
    "ours": {
        "accuracy": 4.12, "relevance": 4.15, "correctness": 4.12,
        "coherence": 4.61, "expansiveness": 3.71, "final": 4.17,
    },
}


def table_scores():
    return [row_score(*row) for row in TABLE_ROWS]


def test_rubric_average_row_reproduced():
    report = rubric_aggregate(table_scores())
    for system, expected in PUBLISHED_AVERAGES.items():
        for column, value in expected.items():
            assert report.averages[system][column] == pytest.approx(value, abs=0.005 + 1e-9), (
                system, column,
            )


def test_published_examples_row_means():
    report = rubric_aggregate(table_scores())
    assert report.averages["ours"]["accuracy"] == pytest.approx(4.12, abs=1e-9)
    assert report.averages["baseline"]["final"] == pytest.approx(3.305, abs=1e-9)


def test_all_fives_average_five():
    scores = [
        row_score("ours", split, dataset, (5.0,) * 5, 5.0)
        for split in ("validation", "test")
        for dataset in ("vaccine", "disease")
    ]
    report = rubric_aggregate(scores)
    assert all(v == 5.0 for v in report.averages["ours"].values())


def test_final_defaults_to_dimension_mean():
    score = RubricScore.build(
        "x", "ours", "test", "disease",
        {"accuracy": 4, "relevance": 3, "correctness": 5, "coherence": 4, "expansiveness": 2},
    )
    assert score.final == pytest.approx((4 + 3 + 5 + 4 + 2) / 5, abs=1e-9)


def test_rubric_validation():
    with pytest.raises(EmptyScores):
        rubric_aggregate([])
    with pytest.raises(Exception):
        RubricScore.build("x", "ours", "test", "disease", {"accuracy": 4.0})
    with pytest.raises(ValueError):
        RubricScore.build(
            "x", "ours", "test", "disease",
            {"accuracy": 9.0, "relevance": 3, "correctness": 5, "coherence": 4, "expansiveness": 2},
        )


def test_grouping_keys_are_split_dataset_system():
    scores = table_scores()
    report = rubric_aggregate(scores)
    assert ("validation", "vaccine", "ours") in report.rows
    assert len(report.rows) == 8
    assert report.row_counts[("validation", "vaccine", "ours")] == 1
