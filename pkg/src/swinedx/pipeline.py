"""Seven-stage retrieval-augmented recommendation flow.

A task moves through registration, general and medical entity extraction,
two-stage query rewriting, filtered vector retrieval, backed-off answer
generation, and output assembly. Every stage is instrumented so tests can
assert ordering and timing, and every citation in the output comes from the
task's own retrieval hits.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import BackendUnavailable, EmptyQuery, EmptyStore, RetriesExhausted
from .gateway import Gateway, ModelRequest
from .store import FilterExpression, RetrievalHit, VectorStore, build_filter

logger = logging.getLogger(__name__)

DEFAULT_K = 4
HISTORY_WINDOW = 6

DEFAULT_REFUSAL = (
    "Sorry, I cannot provide information on this topic. However, I can assist "
    "with swine diseases, vaccine diagnostics, or treatments."
)

STAGES = (
    "register",
    "extract_general",
    "extract_medical",
    "contextualize",
    "retrieve",
    "generate",
    "assemble",
)


@dataclass(frozen=True)
class GeneralEntity:
    term: str
    kind: str  # disease | status-transition | procedure | husbandry


@dataclass(frozen=True)
class MedicalEntity:
    kind: str  # medicine | vaccine
    trade_name: str | None = None
    group: str | None = None


@dataclass(frozen=True)
class EntitySet:
    general: tuple[GeneralEntity, ...] = ()
    medical: tuple[MedicalEntity, ...] = ()

    @classmethod
    def build(cls, general=(), medical=()) -> "EntitySet":
        """Deduplicate case-insensitively, preserving first occurrence."""
        seen: set[str] = set()
        general_out = []
        for e in general:
            key = e.term.lower()
            if key not in seen:
                seen.add(key)
                general_out.append(e)
        seen.clear()
        medical_out = []
        for e in medical:
            key = (e.trade_name or e.group or "").lower() + "/" + e.kind
            if key not in seen:
                seen.add(key)
                medical_out.append(e)
        return cls(general=tuple(general_out), medical=tuple(medical_out))

    def merge(self, other: "EntitySet") -> "EntitySet":
        return EntitySet.build(self.general + other.general, self.medical + other.medical)


@dataclass(frozen=True)
class ContextualizedQuery:
    original: str
    stage1: str
    stage2: str

    @property
    def final(self) -> str:
        return self.stage2


@dataclass(frozen=True)
class Citation:
    source_file: str
    page: int
    chunk_index: int
    similarity: float

    def to_dict(self) -> dict:
        return {
            "source_file": self.source_file,
            "page": self.page,
            "chunk_index": self.chunk_index,
            "similarity": self.similarity,
        }


@dataclass
class TaskState:
    task_id: str
    diagnosis: str | None
    query: str
    history: tuple[tuple[str, str], ...]
    metadata: dict = field(default_factory=dict)
    filter: FilterExpression = field(default_factory=FilterExpression.match_all)


@dataclass(frozen=True)
class RecommendationOutput:
    answer: str
    citations: tuple[Citation, ...]
    metadata: dict
    task_id: str

    def to_dict(self) -> dict:
        return {
            "answer": self.answer,
            "citations": [c.to_dict() for c in self.citations],
            "metadata": self.metadata,
            "task_id": self.task_id,
        }


# Gazetteer for offline entity extraction. Phrases are matched
# case-insensitively against the query plus recent history.
GENERAL_GAZETTEER: dict[str, GeneralEntity] = {
    "asf": GeneralEntity("ASF", "disease"),
    "african swine fever": GeneralEntity("ASF", "disease"),
    "prrs": GeneralEntity("PRRS", "disease"),
    "porcine reproductive and respiratory syndrome": GeneralEntity("PRRS", "disease"),
    "ped": GeneralEntity("PED", "disease"),
    "porcine epidemic diarrhea": GeneralEntity("PED", "disease"),
    "fmd": GeneralEntity("FMD", "disease"),
    "foot-and-mouth": GeneralEntity("FMD", "disease"),
    "foot and mouth": GeneralEntity("FMD", "disease"),
    "roll over": GeneralEntity("Roll Over", "status-transition"),
    "necropsy": GeneralEntity("necropsy", "procedure"),
    "biosecurity": GeneralEntity("biosecurity", "husbandry"),
}

MEDICAL_TRADE_NAMES = ("Agita", "Baycox", "Draxxin", "Excede")
MEDICAL_GROUPS = (
    "disinfectant", "vitamin", "hormone", "antihelminthic", "antibiotic", "vaccine",
)


def extract_general_terms(text: str) -> list[GeneralEntity]:
    lowered = text.lower()
    return [entity for phrase, entity in GENERAL_GAZETTEER.items() if phrase in lowered]


def extract_medical_terms(text: str) -> list[MedicalEntity]:
    lowered = text.lower()
    entities = []
    for name in MEDICAL_TRADE_NAMES:
        if name.lower() in lowered:
            entities.append(MedicalEntity(kind="medicine", trade_name=name))
    for group in MEDICAL_GROUPS:
        if group in lowered:
            kind = "vaccine" if group == "vaccine" else "medicine"
            entities.append(MedicalEntity(kind=kind, group=group))
    return entities


def _fold_history(history: Sequence[tuple[str, str]], window: int) -> str:
    turns = list(history)[-window:]
    return " | ".join(f"{role}: {text}" for role, text in turns)


def generation_prompt(
    final_query: str,
    hits: Sequence[RetrievalHit],
    history: Sequence[tuple[str, str]],
    window: int = HISTORY_WINDOW,
) -> str:
    """Stable prompt for answer generation over the retrieved context."""
    lines = [
        "You are a swine health assistant. Answer the question using only the",
        "numbered reference excerpts below, and cite them.",
        "References:",
    ]
    for i, hit in enumerate(hits, start=1):
        lines.append(
            f"[{i}] ({hit.record.source_file} p.{hit.record.page}) {hit.record.text}"
        )
    folded = _fold_history(history, window)
    if folded:
        lines.append(f"Conversation so far: {folded}")
    lines.append(f"Question: {final_query}")
    lines.append("Answer:")
    return "\n".join(lines)


def extract_prompt(which: str, scope: str) -> str:
    if which == "general":
        ask = (
            "List veterinary terms and expert jargon (diseases, status "
            "transitions, procedures) found in the text."
        )
        example = '{"general": [["ASF", "disease"], ["Roll Over", "status-transition"]]}'
    else:
        ask = "List pharmaceutical trade names and medicine or vaccine groups found in the text."
        example = '{"medical": [{"kind": "medicine", "trade_name": "Agita"}, {"kind": "medicine", "group": "disinfectant"}]}'
    return f"Extract entities. {ask}\nReply with JSON like {example}.\nText: {scope}\nEntities:"


def parse_entity_response(which: str, text: str) -> EntitySet:
    """Parse the extraction reply; malformed JSON degrades to no entities."""
    import json

    try:
        payload = json.loads(text)
    except json.JSONDecodeError:
        logger.warning("unparseable entity reply %r; treating as empty", text)
        return EntitySet()
    if which == "general":
        general = [
            GeneralEntity(term=str(term), kind=str(kind))
            for term, kind in payload.get("general", [])
        ]
        return EntitySet.build(general=general)
    medical = [
        MedicalEntity(
            kind=str(e.get("kind", "medicine")),
            trade_name=e.get("trade_name"),
            group=e.get("group"),
        )
        for e in payload.get("medical", [])
    ]
    return EntitySet.build(medical=medical)


def rewrite_prompt(stage: int, query: str, entity_terms: str, folded_history: str) -> str:
    return (
        f"Rewrite stage {stage}: enrich the query with the given context. "
        f"Reply with the rewritten query only.\n"
        f"Query: {query}\nContext terms: {entity_terms}\nHistory: {folded_history}\n"
        f"Rewritten:"
    )


class RecommendationPipeline:
    """Orchestrates the full flow; stages are also callable individually."""

    def __init__(
        self,
        store: VectorStore,
        gateway: Gateway | None = None,
        k: int = DEFAULT_K,
        history_window: int = HISTORY_WINDOW,
        refusal_template: str = DEFAULT_REFUSAL,
        gateway_rewrite: bool = False,
        gateway_extract: bool = False,
        clock: Callable[[], float] = time.monotonic,
        task_ids: Callable[[], str] | None = None,
    ):
        self.store = store
        self.gateway = gateway
        self.k = k
        self.history_window = history_window
        self.refusal_template = refusal_template
        self.gateway_rewrite = gateway_rewrite
        self.gateway_extract = gateway_extract
        self._clock = clock
        if task_ids is None:
            counter = itertools.count(1)
            task_ids = lambda: f"task-{next(counter):04d}"
        self._task_ids = task_ids

    # --- instrumentation ---

    def _mark(self, ts: TaskState, stage: str) -> None:
        ts.metadata.setdefault("stages", []).append(stage)
        ts.metadata.setdefault("timings", {})[stage] = self._clock()

    # --- stages ---

    def register(
        self,
        diagnosis: str | None,
        query: str,
        history: Sequence[tuple[str, str]] = (),
    ) -> TaskState:
        """Stage 1: pin down the task and formulate its retrieval filter."""
        if not query.strip():
            raise EmptyQuery("query is blank")
        disease_codes = [e.term for e in extract_general_terms(query) if e.kind == "disease"]
        medical = extract_medical_terms(query)
        task_filter = build_filter(
            diagnosis=diagnosis,
            medical_entities=medical,
            disease_codes=disease_codes,
        )
        ts = TaskState(
            task_id=self._task_ids(),
            diagnosis=diagnosis,
            query=query.strip(),
            history=tuple(tuple(t) for t in history),
            filter=task_filter,
        )
        self._mark(ts, "register")
        return ts

    def _extract_scope(self, text: str, history: Sequence[tuple[str, str]]) -> str:
        if not text.strip():
            raise EmptyQuery("text is blank")
        return " ".join([text] + [t for _, t in list(history)[-self.history_window:]])

    def extract_general_entities(
        self, text: str, history: Sequence[tuple[str, str]] = ()
    ) -> EntitySet:
        """Stage 2a: veterinary terms and expert jargon from query plus history.

        The built-in gazetteer is the offline extractor; gateway_extract
        switches to model-based extraction over the same scope.
        """
        scope = self._extract_scope(text, history)
        if self.gateway_extract and self.gateway is not None:
            return self._gateway_entities(scope, "general")
        return EntitySet.build(general=extract_general_terms(scope))

    def extract_medical_entities(
        self, text: str, history: Sequence[tuple[str, str]] = ()
    ) -> EntitySet:
        """Stage 2b: trade names and medicine or vaccine groups."""
        scope = self._extract_scope(text, history)
        if self.gateway_extract and self.gateway is not None:
            return self._gateway_entities(scope, "medical")
        return EntitySet.build(medical=extract_medical_terms(scope))

    def _gateway_entities(self, scope: str, which: str) -> EntitySet:
        request = ModelRequest(purpose="extract", prompt=extract_prompt(which, scope))
        try:
            response = self.gateway.call(request)
        except RetriesExhausted as exc:
            raise BackendUnavailable(str(exc)) from exc
        return parse_entity_response(which, response.text)

    def contextualize(
        self,
        query: str,
        entities: EntitySet,
        history: Sequence[tuple[str, str]] = (),
    ) -> ContextualizedQuery:
        """Stage 3: two-stage rewrite.

        Stage one folds in general entities and history, stage two layers in
        medicine and vaccine specifics. With no entities at all both stages
        are the original query verbatim. Template substitution is the default
        realization; gateway_rewrite switches to model-based rewriting.
        """
        if not query.strip():
            raise EmptyQuery("query is blank")
        query = query.strip()
        folded = _fold_history(history, self.history_window)
        if (
            self.gateway_rewrite
            and self.gateway is not None
            and (entities.general or entities.medical)
        ):
            stage1 = self._rewrite(1, query, entities.general, folded)
            stage2 = self._rewrite(2, stage1, entities.medical, folded) if entities.medical else stage1
            return ContextualizedQuery(original=query, stage1=stage1, stage2=stage2)
        stage1 = query
        if entities.general:
            terms = ", ".join(f"{e.term} ({e.kind})" for e in entities.general)
            stage1 = f"{query} [context: {terms}]"
            if folded:
                stage1 += f" [history: {folded}]"
        stage2 = stage1
        if entities.medical:
            specifics = ", ".join(
                e.trade_name or e.group or e.kind for e in entities.medical
            )
            stage2 = f"{stage1} [medical: {specifics}]"
        return ContextualizedQuery(original=query, stage1=stage1, stage2=stage2)

    def _rewrite(self, stage: int, query: str, entities: tuple, folded_history: str) -> str:
        terms = ", ".join(
            getattr(e, "term", None) or e.trade_name or e.group or e.kind for e in entities
        )
        request = ModelRequest(
            purpose="rewrite", prompt=rewrite_prompt(stage, query, terms, folded_history)
        )
        try:
            return self.gateway.call(request).text.strip()
        except RetriesExhausted as exc:
            raise BackendUnavailable(str(exc)) from exc

    def retrieve(
        self,
        cq: ContextualizedQuery,
        filter_expression: FilterExpression,
        k: int | None = None,
    ) -> list[RetrievalHit]:
        """Stage 4: embed the final rewrite and run the filtered search."""
        if len(self.store) == 0:
            raise EmptyStore("no documents ingested")
        query_vector = self.store.embedder.embed(cq.final)
        return self.store.search(query_vector, filter_expression, k=k or self.k)

    def generate(
        self,
        ts: TaskState,
        cq: ContextualizedQuery,
        hits: Sequence[RetrievalHit],
    ) -> str:
        """Stage 5: one backed-off gateway call over the assembled context.

        Empty retrieval short-circuits to the refusal template instead of
        letting the model answer without evidence.
        """
        if not hits:
            ts.metadata["retry_count"] = 0
            ts.metadata["backend_id"] = None
            return self.refusal_template
        if self.gateway is None:
            raise EmptyStore("a gateway is required for generation")
        request = ModelRequest(
            purpose="generate",
            prompt=generation_prompt(cq.final, hits, ts.history, self.history_window),
        )
        response = self.gateway.call(request)
        ts.metadata["retry_count"] = response.attempts
        ts.metadata["backend_id"] = response.backend_id
        return response.text

    def assemble(
        self,
        answer: str,
        hits: Sequence[RetrievalHit],
        ts: TaskState,
    ) -> RecommendationOutput:
        """Stage 6: bundle the answer with citations and run metadata."""
        citations = tuple(
            Citation(
                source_file=h.record.source_file,
                page=h.record.page,
                chunk_index=h.record.chunk_index,
                similarity=h.similarity,
            )
            for h in hits
        )
        timings = ts.metadata.get("timings", {})
        started = timings.get("register")
        elapsed = (self._clock() - started) if started is not None else None
        metadata = {
            "stages": list(ts.metadata.get("stages", [])),
            "timings": dict(timings),
            "backend_id": ts.metadata.get("backend_id"),
            "retry_count": ts.metadata.get("retry_count", 0),
            "elapsed_s": elapsed,
            "k": self.k,
        }
        return RecommendationOutput(
            answer=answer, citations=citations, metadata=metadata, task_id=ts.task_id
        )

    # --- full flow ---

    def run(
        self,
        query: str,
        diagnosis: str | None = None,
        history: Sequence[tuple[str, str]] = (),
    ) -> RecommendationOutput:
        ts = self.register(diagnosis, query, history)
        general = self.extract_general_entities(ts.query, ts.history)
        self._mark(ts, "extract_general")
        medical = self.extract_medical_entities(ts.query, ts.history)
        self._mark(ts, "extract_medical")
        entities = general.merge(medical)
        cq = self.contextualize(ts.query, entities, ts.history)
        self._mark(ts, "contextualize")
        hits = self.retrieve(cq, ts.filter)
        self._mark(ts, "retrieve")
        answer = self.generate(ts, cq, hits)
        self._mark(ts, "generate")
        self._mark(ts, "assemble")
        return self.assemble(answer, hits, ts)
