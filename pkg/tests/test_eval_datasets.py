"""Dataset loading: schema validation, error reporting, field preservation."""

import json

import pytest

from swinedx.errors import ParseError, SchemaError
from swinedx.evaluation import (
    ClassificationRecord,
    DiagnosisRecord,
    LabeledExample,
    RubricScore,
    load_dataset,
)


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records))
    return path


def example_record(**overrides):
    record = {
        "question": "What samples are used for ASF testing?",
        "scenario": "multi-turn dialogue",
        "question_type": "factoid",
        "document_source": ["ASF-2022.pdf", 12],
        "example_answer": "Blood, saliva, lymph nodes, organ samples.",
        "split": "test",
    }
    record.update(overrides)
    return record


def test_load_labeled_examples(tmp_path):
    path = write_jsonl(tmp_path / "examples.jsonl", [example_record(), example_record(split="validation")])
    records = load_dataset(path)
    assert all(isinstance(r, LabeledExample) for r in records)
    assert records[0].document_source == ("ASF-2022.pdf", 12)
    assert {r.split for r in records} == {"test", "validation"}


def test_table_scale_fixture_loads(tmp_path):
    rows = [example_record(split="validation") for _ in range(220)]
    rows += [example_record() for _ in range(461)]
    path = write_jsonl(tmp_path / "classification_examples.jsonl", rows)
    records = load_dataset(path, kind="examples")
    assert sum(1 for r in records if r.split == "validation") == 220
    assert sum(1 for r in records if r.split == "test") == 461


def test_parse_error_cites_line(tmp_path):
    path = tmp_path / "broken.jsonl"
    lines = [json.dumps(example_record()) for _ in range(6)]
    lines.append("{not json")
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError) as excinfo:
        load_dataset(path)
    assert excinfo.value.line == 7


def test_schema_error_names_missing_field(tmp_path):
    record = example_record()
    del record["question_type"]
    path = write_jsonl(tmp_path / "missing.jsonl", [record])
    with pytest.raises(SchemaError) as excinfo:
        load_dataset(path, kind="examples")
    assert excinfo.value.field == "question_type"


def test_classification_records_and_sniffing(tmp_path):
    path = write_jsonl(
        tmp_path / "preds.jsonl",
        [{"actual": "General", "predicted": "General", "note": "kept"}],
    )
    records = load_dataset(path)
    assert isinstance(records[0], ClassificationRecord)
    assert records[0].extras == {"note": "kept"}


def test_diagnosis_records(tmp_path):
    path = write_jsonl(
        tmp_path / "diag.jsonl",
        [
            {
                "case_id": "c1",
                "actual": "ASF",
                "ranking": ["ASF", "PRRS"],
                "exec_time_s": 17.83,
                "model": "gpt-4o",
                "split": "test",
            }
        ],
    )
    records = load_dataset(path)
    record = records[0]
    assert isinstance(record, DiagnosisRecord)
    assert record.ranking == ("ASF", "PRRS")
    assert record.extras["model"] == "gpt-4o"


def test_rubric_records_final_optional(tmp_path):
    base = {
        "example_id": "e1",
        "system": "ours",
        "split": "test",
        "dataset": "disease",
        "dimensions": {
            "expansiveness": 3.0,
            "coherence": 4.0,
            "correctness": 4.0,
            "relevance": 5.0,
            "accuracy": 4.0,
        },
    }
    with_final = dict(base, example_id="e2", final=4.5)
    path = write_jsonl(tmp_path / "rubric.jsonl", [base, with_final])
    records = load_dataset(path)
    assert isinstance(records[0], RubricScore)
    assert records[0].final == pytest.approx(4.0)
    assert records[1].final == 4.5


def test_blank_lines_skipped(tmp_path):
    path = tmp_path / "gaps.jsonl"
    path.write_text(
        json.dumps({"actual": "G", "predicted": "G"}) + "\n\n" + json.dumps({"actual": "K", "predicted": "K"}) + "\n"
    )
    assert len(load_dataset(path, kind="classification")) == 2


def test_unknown_kind_rejected(tmp_path):
    path = write_jsonl(tmp_path / "x.jsonl", [{"actual": "G", "predicted": "G"}])
    with pytest.raises(ValueError):
        load_dataset(path, kind="nonsense")


def test_unsniffable_record(tmp_path):
    path = write_jsonl(tmp_path / "weird.jsonl", [{"foo": 1}])
    with pytest.raises(SchemaError):
        load_dataset(path)
