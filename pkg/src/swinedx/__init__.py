"""Swine disease diagnostic assistant.

Query routing, bounded symptom-collection dialogue, confidence-weighted
multi-agent fusion with out-of-distribution escalation, retrieval-augmented
recommendations over a local document store, and an evaluation harness that
recomputes every reported metric from raw fixtures.
"""

__version__ = "0.1.0"

from .dialogue import (
    DialogueSession,
    DialogueState,
    Specificity,
    SymptomFact,
    SymptomReport,
    finalize,
    ingest_answer,
    next_question,
    start_session,
    transition,
)
from .fusion import (
    AgentOpinion,
    ConfidenceTier,
    DiagnosisOutcome,
    DiseaseRegistry,
    escalate,
    fuse,
    panel_opinion,
    predict,
    rank_top_k,
    tier,
)
from .gateway import BackoffPolicy, Gateway, ModelRequest, ScriptedMockBackend
from .pipeline import RecommendationOutput, RecommendationPipeline
from .router import ClassificationResult, QueryClass, RoutingDecision, classify, route
from .store import (
    DocumentRecord,
    FilterClause,
    FilterExpression,
    HashingEmbedder,
    RetrievalHit,
    VectorStore,
    build_filter,
)

__all__ = [
    "AgentOpinion",
    "BackoffPolicy",
    "ClassificationResult",
    "ConfidenceTier",
    "DiagnosisOutcome",
    "DialogueSession",
    "DialogueState",
    "DiseaseRegistry",
    "DocumentRecord",
    "FilterClause",
    "FilterExpression",
    "Gateway",
    "HashingEmbedder",
    "ModelRequest",
    "QueryClass",
    "RecommendationOutput",
    "RecommendationPipeline",
    "RetrievalHit",
    "RoutingDecision",
    "ScriptedMockBackend",
    "Specificity",
    "SymptomFact",
    "SymptomReport",
    "VectorStore",
    "build_filter",
    "classify",
    "escalate",
    "finalize",
    "fuse",
    "ingest_answer",
    "next_question",
    "panel_opinion",
    "predict",
    "rank_top_k",
    "route",
    "start_session",
    "tier",
    "transition",
]
