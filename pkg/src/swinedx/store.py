"""Chunked, embedded, metadata-tagged document store with filtered search.

Pages are split into overlapping token windows, embedded, and scanned
exhaustively at query time; the corpus is desk-scale, so a brute-force cosine
scan is the reference behavior, not an approximation. Records persist in a
single append-only file: a JSON header line followed by length-prefixed JSON
records.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import struct
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyStore

logger = logging.getLogger(__name__)

CHUNK_TOKENS = 512
CHUNK_OVERLAP = 64

METADATA_KEYS = {"domain", "disease_code", "trade_names", "group"}
DOMAINS = ("disease", "vaccine")


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: str
    source_file: str
    page: int
    chunk_index: int
    text: str
    metadata: dict

    def __post_init__(self):
        if not self.text:
            raise ValueError("record text must be non-empty")
        if self.page < 1:
            raise ValueError("page numbers start at 1")
        if "domain" not in self.metadata:
            raise ValueError(f"{self.doc_id}: metadata must carry a domain")

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.source_file, self.page, self.chunk_index)


@dataclass(frozen=True)
class FilterClause:
    key: str
    op: str  # "equals" | "in"
    value: object

    def __post_init__(self):
        if self.op not in ("equals", "in"):
            raise ValueError(f"unknown filter operator {self.op!r}")

    def matches(self, metadata: Mapping) -> bool:
        if self.key not in metadata:
            return False
        actual = metadata[self.key]
        # List-valued metadata (trade_names) matches when any element hits.
        if self.op == "equals":
            if isinstance(actual, (list, tuple)):
                return self.value in actual
            return actual == self.value
        candidates = set(self.value) if not isinstance(self.value, str) else {self.value}
        if isinstance(actual, (list, tuple)):
            return bool(candidates & set(actual))
        return actual in candidates


@dataclass(frozen=True)
class FilterExpression:
    """Conjunction of clauses; no clauses means match-all."""

    clauses: tuple[FilterClause, ...] = ()

    @classmethod
    def match_all(cls) -> "FilterExpression":
        return cls(())

    def matches(self, record: DocumentRecord) -> bool:
        return all(clause.matches(record.metadata) for clause in self.clauses)

    def to_dict(self) -> list[dict]:
        return [
            {"key": c.key, "op": c.op,
             "value": sorted(c.value) if isinstance(c.value, (set, frozenset)) else c.value}
            for c in self.clauses
        ]


@dataclass(frozen=True)
class RetrievalHit:
    record: DocumentRecord
    similarity: float


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization; exact model tokenizers are backend-specific."""
    return text.split()


def chunk_text(text: str, window: int = CHUNK_TOKENS, overlap: int = CHUNK_OVERLAP) -> list[str]:
    """Split into windows of at most ``window`` tokens overlapping by ``overlap``."""
    if overlap >= window:
        raise ValueError("overlap must be smaller than the window")
    tokens = tokenize(text)
    if not tokens:
        return []
    chunks = []
    start = 0
    while True:
        end = min(start + window, len(tokens))
        chunks.append(" ".join(tokens[start:end]))
        if end >= len(tokens):
            return chunks
        start = end - overlap


class Embedder:
    """Adapter interface for embedding backends."""

    dimension: int
    embedder_id: str

    def embed(self, text: str) -> np.ndarray:
        raise NotImplementedError


class HashingEmbedder(Embedder):
    """Deterministic offline embedder.

    Token unigrams and bigrams are hashed into a fixed-dimension signed
    count vector, then L2-normalized. No model weights, no randomness: the
    same text always embeds to bitwise-identical values.
    """

    def __init__(self, dimension: int = 256):
        if dimension < 8:
            raise ValueError("dimension must be at least 8")
        self.dimension = dimension
        self.embedder_id = f"hashing-{dimension}"

    def _slot(self, feature: str) -> tuple[int, float]:
        digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
        raw = struct.unpack(">Q", digest)[0]
        index = raw % self.dimension
        sign = 1.0 if (raw >> 63) & 1 else -1.0
        return index, sign

    def embed(self, text: str) -> np.ndarray:
        tokens = [t.lower() for t in tokenize(text)]
        if not tokens:
            raise ValueError("cannot embed empty text")
        vec = np.zeros(self.dimension, dtype=np.float64)
        features = tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
        for feature in features:
            index, sign = self._slot(feature)
            vec[index] += sign
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            # All features cancelled; fall back to a deterministic unit vector.
            index, _ = self._slot(" ".join(tokens))
            vec[index] = 1.0
            norm = 1.0
        return vec / norm


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    denom = float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    if denom == 0.0:
        return 0.0
    return float(np.dot(a, b) / denom)


_HEADER_FORMAT = 1
_LENGTH_PREFIX = struct.Struct(">I")


class VectorStore:
    """Exhaustive-scan vector store over document records.

    Reads operate on an immutable snapshot; ingestion swaps the snapshot
    atomically under a writer lock, so concurrent searches never see a
    half-written state.
    """

    def __init__(self, embedder: Embedder, path: str | Path | None = None):
        self.embedder = embedder
        self.dimension = embedder.dimension
        self.path = Path(path) if path is not None else None
        self._write_lock = threading.Lock()
        # Records and their vector matrix live in one snapshot tuple so a
        # reader never observes them out of step with each other.
        self._snapshot: tuple[tuple[DocumentRecord, ...], np.ndarray] = (
            (),
            np.zeros((0, self.dimension), dtype=np.float64),
        )
        self._keys: set[tuple[str, int, int]] = set()
        if self.path is not None and self.path.exists():
            self._load()

    def __len__(self) -> int:
        return len(self._snapshot[0])

    @property
    def records(self) -> tuple[DocumentRecord, ...]:
        return self._snapshot[0]

    # --- persistence ---

    def _load(self) -> None:
        with open(self.path, "rb") as fh:
            header_line = fh.readline()
            header = json.loads(header_line)
            if header.get("format") != _HEADER_FORMAT:
                raise ValueError(f"unsupported store format in {self.path}")
            if header["dimension"] != self.dimension:
                raise DimensionMismatch(
                    f"store dimension {header['dimension']} != embedder dimension {self.dimension}"
                )
            records = []
            vectors = []
            while True:
                prefix = fh.read(_LENGTH_PREFIX.size)
                if not prefix:
                    break
                (length,) = _LENGTH_PREFIX.unpack(prefix)
                payload = json.loads(fh.read(length))
                record = DocumentRecord(
                    doc_id=payload["doc_id"],
                    source_file=payload["source_file"],
                    page=payload["page"],
                    chunk_index=payload["chunk_index"],
                    text=payload["text"],
                    metadata=payload["metadata"],
                )
                vector = np.asarray(payload["vector"], dtype=np.float64)
                if vector.shape != (self.dimension,):
                    raise DimensionMismatch(f"stored vector for {record.doc_id} has wrong length")
                records.append(record)
                vectors.append(vector)
        matrix = np.vstack(vectors) if vectors else np.zeros((0, self.dimension))
        self._snapshot = (tuple(records), matrix)
        self._keys = {r.key for r in records}
        logger.info("loaded %d records from %s", len(records), self.path)

    def _append_to_disk(self, batch: list[tuple[DocumentRecord, np.ndarray]]) -> None:
        if self.path is None or not batch:
            return
        new_file = not self.path.exists()
        with open(self.path, "ab") as fh:
            if new_file:
                header = {
                    "format": _HEADER_FORMAT,
                    "dimension": self.dimension,
                    "embedder": self.embedder.embedder_id,
                }
                fh.write(json.dumps(header).encode("utf-8") + b"\n")
            for record, vector in batch:
                payload = json.dumps(
                    {
                        "doc_id": record.doc_id,
                        "source_file": record.source_file,
                        "page": record.page,
                        "chunk_index": record.chunk_index,
                        "text": record.text,
                        "metadata": record.metadata,
                        "vector": vector.tolist(),
                    }
                ).encode("utf-8")
                fh.write(_LENGTH_PREFIX.pack(len(payload)))
                fh.write(payload)

    # --- ingestion ---

    def ingest(self, documents: Iterable[Mapping]) -> int:
        """Chunk, embed, and store pages. Returns the number of new records.

        Each document is a mapping with source_file, page, text, and
        metadata. Re-ingesting an existing (source_file, page, chunk_index)
        is a no-op, so ingestion is idempotent.
        """
        with self._write_lock:
            batch: list[tuple[DocumentRecord, np.ndarray]] = []
            for doc in documents:
                source_file = doc["source_file"]
                page = int(doc["page"])
                text = doc["text"]
                metadata = dict(doc.get("metadata") or {})
                if not text or not text.strip():
                    raise ValueError(f"{source_file} p.{page}: text must be non-empty")
                unknown = set(metadata) - METADATA_KEYS
                if unknown:
                    logger.warning(
                        "%s p.%d: untyped metadata keys %s kept as-is",
                        source_file, page, sorted(unknown),
                    )
                for chunk_index, chunk in enumerate(chunk_text(text)):
                    key = (source_file, page, chunk_index)
                    if key in self._keys:
                        continue
                    vector = self.embedder.embed(chunk)
                    if vector.shape != (self.dimension,):
                        raise DimensionMismatch(
                            f"embedder produced length {vector.shape[0]}, store expects {self.dimension}"
                        )
                    if not np.all(np.isfinite(vector)):
                        raise ValueError(f"{source_file} p.{page}: non-finite embedding")
                    record = DocumentRecord(
                        doc_id=f"{source_file}:p{page}",
                        source_file=source_file,
                        page=page,
                        chunk_index=chunk_index,
                        text=chunk,
                        metadata=metadata,
                    )
                    self._keys.add(key)
                    batch.append((record, vector))
            if batch:
                records, matrix = self._snapshot
                records = records + tuple(r for r, _ in batch)
                matrix = np.vstack([matrix] + [v for _, v in batch])
                self._snapshot = (records, matrix)
                self._append_to_disk(batch)
            return len(batch)

    # --- search ---

    def search(
        self,
        query_vector: np.ndarray,
        filter_expression: FilterExpression | None = None,
        k: int = 4,
    ) -> list[RetrievalHit]:
        """Top-k filtered cosine search over the full record set.

        Results are sorted by similarity descending; ties break by doc_id
        then chunk_index ascending.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        query_vector = np.asarray(query_vector, dtype=np.float64)
        if query_vector.shape != (self.dimension,):
            raise DimensionMismatch(
                f"query vector length {query_vector.shape[0]} != store dimension {self.dimension}"
            )
        records, matrix = self._snapshot
        filter_expression = filter_expression or FilterExpression.match_all()
        candidates = [i for i, r in enumerate(records) if filter_expression.matches(r)]
        if not candidates:
            return []
        qnorm = float(np.linalg.norm(query_vector))
        sims = []
        for i in candidates:
            row = matrix[i]
            denom = qnorm * float(np.linalg.norm(row))
            sims.append(float(np.dot(row, query_vector) / denom) if denom else 0.0)
        order = sorted(
            range(len(candidates)),
            key=lambda j: (-sims[j], records[candidates[j]].doc_id, records[candidates[j]].chunk_index),
        )
        return [
            RetrievalHit(record=records[candidates[j]], similarity=sims[j])
            for j in order[:k]
        ]

    def retrieval_probabilities(
        self,
        query_vector: np.ndarray,
        filter_expression: FilterExpression | None = None,
    ) -> dict[tuple[str, int, int], float]:
        """Diagnostic softmax over similarities of all filter-matching records.

        Retrieval itself ranks by raw similarity; this normalization exists
        only so the probability mass of a top-k slice can be inspected.
        """
        records = self._snapshot[0]
        if not records:
            raise EmptyStore("no records ingested")
        hits = self.search(query_vector, filter_expression, k=len(records))
        if not hits:
            return {}
        exps = [math.exp(h.similarity) for h in hits]
        total = sum(exps)
        return {h.record.key: e / total for h, e in zip(hits, exps)}


def build_filter(
    diagnosis: str | None = None,
    medical_entities: Sequence | None = None,
    disease_codes: Sequence[str] | None = None,
) -> FilterExpression:
    """Tailored filter for a retrieval task.

    Rule order: an explicit diagnosis wins; otherwise medicine or vaccine
    entities select the vaccine domain (with trade-name clauses when trade
    names were extracted); otherwise disease codes pulled from the query
    text select the disease domain. No context at all matches everything.
    """
    if diagnosis:
        return FilterExpression(
            (
                FilterClause("domain", "equals", "disease"),
                FilterClause("disease_code", "equals", diagnosis),
            )
        )
    if medical_entities:
        clauses = [FilterClause("domain", "equals", "vaccine")]
        trade_names = sorted(
            {e.trade_name for e in medical_entities if getattr(e, "trade_name", None)}
        )
        if trade_names:
            clauses.append(FilterClause("trade_names", "in", frozenset(trade_names)))
        return FilterExpression(tuple(clauses))
    if disease_codes:
        codes = sorted(set(disease_codes))
        if len(codes) == 1:
            code_clause = FilterClause("disease_code", "equals", codes[0])
        else:
            code_clause = FilterClause("disease_code", "in", frozenset(codes))
        return FilterExpression(
            (FilterClause("domain", "equals", "disease"), code_clause)
        )
    return FilterExpression.match_all()


def load_corpus_jsonl(path: str | Path) -> list[dict]:
    """Read a corpus file: one JSON object per line with source_file, page, text, metadata."""
    documents = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            for fieldname in ("source_file", "page", "text"):
                if fieldname not in doc:
                    raise ValueError(f"{path}:{lineno}: missing field {fieldname!r}")
            documents.append(doc)
    return documents
