"""JSONL fixture loading with schema validation.

Four record kinds share the loader: labeled examples, classification
predictions, diagnosis records, and rubric scores. The kind is passed
explicitly or sniffed from the first record's fields. Malformed lines raise
ParseError with the 1-based line number; missing fields raise SchemaError
naming the field. Unknown fields are preserved on each record's ``extras``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ParseError, SchemaError

RUBRIC_DIMENSIONS = ("expansiveness", "coherence", "correctness", "relevance", "accuracy")

KINDS = ("examples", "classification", "diagnosis", "rubric")

_REQUIRED = {
    "examples": ("question", "scenario", "question_type", "document_source", "example_answer", "split"),
    "classification": ("actual", "predicted"),
    "diagnosis": ("case_id", "actual", "ranking", "exec_time_s"),
    "rubric": ("example_id", "system", "split", "dataset", "dimensions"),
}


@dataclass(frozen=True)
class LabeledExample:
    question: str
    scenario: str
    question_type: str
    document_source: tuple[str, int]
    example_answer: str
    split: str
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ClassificationRecord:
    actual: str
    predicted: str
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DiagnosisRecord:
    case_id: str
    actual: str  # disease code or "OOD"
    ranking: tuple[str, ...]
    exec_time_s: float
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.ranking:
            raise ValueError(f"{self.case_id}: ranking must be non-empty")
        if self.exec_time_s < 0:
            raise ValueError(f"{self.case_id}: exec_time_s must be >= 0")


@dataclass(frozen=True)
class RubricScore:
    example_id: str
    system: str  # "ours" | "baseline"
    split: str  # "validation" | "test"
    dataset: str  # e.g. "vaccine" | "disease"
    dimensions: dict[str, float]
    final: float
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = [d for d in RUBRIC_DIMENSIONS if d not in self.dimensions]
        if missing:
            raise SchemaError(f"rubric score missing dimensions {missing}", field=missing[0])
        for dim, value in self.dimensions.items():
            if not 0.0 <= value <= 5.0:
                raise ValueError(f"{self.example_id}: {dim} score {value} outside [0, 5]")

    @classmethod
    def build(
        cls,
        example_id: str,
        system: str,
        split: str,
        dataset: str,
        dimensions: dict[str, float],
        final: float | None = None,
        extras: dict | None = None,
    ) -> "RubricScore":
        """Create a score; the final value defaults to the mean of the dimensions.

        A supplied final is kept verbatim: aggregate fixtures carry published
        per-row finals that are judged independently of the dimension means.
        """
        if final is None:
            final = sum(dimensions.get(d, 0.0) for d in RUBRIC_DIMENSIONS) / len(RUBRIC_DIMENSIONS)
        return cls(
            example_id=example_id,
            system=system,
            split=split,
            dataset=dataset,
            dimensions=dict(dimensions),
            final=float(final),
            extras=extras or {},
        )


def _require(record: dict, kind: str, lineno: int) -> None:
    for fieldname in _REQUIRED[kind]:
        if fieldname not in record:
            raise SchemaError(
                f"{kind} record missing field {fieldname!r}", field=fieldname, line=lineno
            )


def _extras(record: dict, kind: str) -> dict:
    known = set(_REQUIRED[kind]) | {"final"}
    return {key: value for key, value in record.items() if key not in known}


def sniff_kind(record: dict) -> str:
    """Pick the record kind whose required fields are all present."""
    for kind in ("rubric", "diagnosis", "examples", "classification"):
        if all(fieldname in record for fieldname in _REQUIRED[kind]):
            return kind
    raise SchemaError(
        f"record matches no known kind (fields: {sorted(record)})", field="<kind>"
    )


def _build(record: dict, kind: str, lineno: int):
    _require(record, kind, lineno)
    extras = _extras(record, kind)
    if kind == "examples":
        source = record["document_source"]
        if not isinstance(source, (list, tuple)) or len(source) != 2:
            raise SchemaError(
                "document_source must be a [file, page] pair", field="document_source", line=lineno
            )
        return LabeledExample(
            question=record["question"],
            scenario=record["scenario"],
            question_type=record["question_type"],
            document_source=(str(source[0]), int(source[1])),
            example_answer=record["example_answer"],
            split=record["split"],
            extras=extras,
        )
    if kind == "classification":
        return ClassificationRecord(
            actual=record["actual"], predicted=record["predicted"], extras=extras
        )
    if kind == "diagnosis":
        return DiagnosisRecord(
            case_id=str(record["case_id"]),
            actual=record["actual"],
            ranking=tuple(record["ranking"]),
            exec_time_s=float(record["exec_time_s"]),
            extras=extras,
        )
    return RubricScore.build(
        example_id=str(record["example_id"]),
        system=record["system"],
        split=record["split"],
        dataset=record["dataset"],
        dimensions={k: float(v) for k, v in record["dimensions"].items()},
        final=record.get("final"),
        extras=extras,
    )


def load_dataset(path: str | Path, kind: str | None = None) -> list:
    """Load a JSONL fixture; returns records of the given (or sniffed) kind."""
    if kind is not None and kind not in KINDS:
        raise ValueError(f"unknown dataset kind {kind!r}; expected one of {KINDS}")
    path = Path(path)
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", line=lineno) from exc
            if not isinstance(record, dict):
                raise ParseError("record is not a JSON object", line=lineno)
            if kind is None:
                kind = sniff_kind(record)
            records.append(_build(record, kind, lineno))
    return records
