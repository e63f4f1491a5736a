"""Query classification and routing.

Incoming queries fall into four classes: knowledge retrieval (K), symptom
diagnostic (D), to-be-clarified (T), and general (G). Scoring is delegated to
a gateway backend when one is configured; a rule-based keyword classifier
covers fully offline operation. Routing is a fixed function of the chosen
class.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .errors import BackendUnavailable, EmptyQuery, RetriesExhausted
from .gateway import Gateway, ModelRequest


class QueryClass(Enum):
    K = "K"  # knowledge retrieval
    D = "D"  # symptom-based diagnostic
    T = "T"  # to-be-clarified
    G = "G"  # general


# Ties prefer the least committal route: a wrong G or T costs one
# clarification turn, a wrong D or K sends the user down the wrong pipeline.
TIE_BREAK_PRIORITY = (QueryClass.G, QueryClass.T, QueryClass.D, QueryClass.K)

ROUTE_TARGETS = {
    QueryClass.K: "recommendation-pipeline",
    QueryClass.D: "symptom-dialogue",
    QueryClass.T: "clarification-prompt",
    QueryClass.G: "general-reply",
}

HISTORY_WINDOW = 6

PROBABILITY_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ClassificationResult:
    probabilities: dict[QueryClass, float]
    chosen: QueryClass
    raw_query: str

    def __post_init__(self):
        missing = set(QueryClass) - set(self.probabilities)
        if missing:
            raise ValueError(f"probabilities missing classes: {sorted(c.value for c in missing)}")
        for cls, p in self.probabilities.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability for {cls.value} outside [0, 1]: {p}")
        total = sum(self.probabilities.values())
        if abs(total - 1.0) > PROBABILITY_SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        if self.chosen is not argmax_class(self.probabilities):
            raise ValueError("chosen class is not the tie-broken argmax")


@dataclass(frozen=True)
class RoutingDecision:
    target: str
    rationale: str


def argmax_class(probabilities: Mapping[QueryClass, float]) -> QueryClass:
    """Highest-probability class, ties broken by the fixed G > T > D > K priority."""
    best = max(probabilities.values())
    for cls in TIE_BREAK_PRIORITY:
        if probabilities.get(cls, 0.0) == best:
            return cls
    raise ValueError("empty probability mapping")


def classify_prompt(query: str, history: Sequence[tuple[str, str]]) -> str:
    """Stable prompt for backend-based classification over the recent history window."""
    lines = [
        "Classify the final user query into exactly one of four classes:",
        "K (knowledge retrieval), D (symptom-based diagnostic), T (to-be-clarified), G (general).",
        'Reply with a JSON object of probabilities, e.g. {"K": 0.1, "D": 0.7, "T": 0.1, "G": 0.1}.',
        "Recent conversation:",
    ]
    for role, text in list(history)[-HISTORY_WINDOW:]:
        lines.append(f"  {role}: {text}")
    lines.append(f"Query: {query}")
    return "\n".join(lines)


def parse_backend_scores(text: str) -> dict[QueryClass, float]:
    """Parse a backend reply into raw per-class scores.

    Accepts a JSON object keyed by class letter. Missing classes score 0.
    """
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"backend classification reply is not JSON: {text!r}") from exc
    if not isinstance(payload, dict):
        raise ValueError(f"backend classification reply is not an object: {text!r}")
    scores = {}
    for cls in QueryClass:
        scores[cls] = float(payload.get(cls.value, 0.0))
    return scores


# Keyword lexicons for the offline rule classifier. Clinical sign words drive
# D; question words paired with knowledge nouns drive K; mortality or
# problem words without concrete signs are ambiguous and drive T; greetings
# and off-topic smalltalk drive G.
_SIGN_WORDS = (
    "red", "purple", "blue", "pale", "lesion", "lesions", "blister", "blisters",
    "discharge", "cough", "coughing", "sneeze", "sneezing", "vomit", "vomiting",
    "diarrhea", "diarrhoea", "tremor", "tremors", "seizure", "seizures",
    "stillbirth", "stillbirths", "stillborn", "abortion", "abortions", "lame",
    "lameness", "fever", "anorexia", "mummified",
)
_KNOWLEDGE_WORDS = (
    "sample", "samples", "test", "testing", "tests", "vaccine", "vaccines",
    "vaccination", "dose", "dosage", "treat", "treatment", "prevent",
    "prevention", "disinfect", "disinfectant", "biosecurity", "medicine",
    "medication", "drug", "injection", "protocol",
)
_QUESTION_WORDS = ("what", "which", "how", "when", "where", "why", "should", "can", "do", "does")
_PROBLEM_WORDS = ("died", "dying", "dead", "death", "deaths", "sick", "ill", "unwell", "problem", "losing")
_GREETING_WORDS = ("hello", "hi", "hey", "thanks", "thank", "goodbye", "morning", "afternoon", "evening")
_DOMAIN_WORDS = ("pig", "pigs", "swine", "sow", "sows", "piglet", "piglets", "herd", "farm", "disease")


def rule_scores(query: str, history: Sequence[tuple[str, str]] = ()) -> dict[QueryClass, float]:
    """Keyword fallback scores; operates on the query text alone."""
    tokens = re.findall(r"[a-z]+", query.lower())
    token_set = set(tokens)
    scores = {cls: 0.0 for cls in QueryClass}
    scores[QueryClass.D] += sum(2.0 for w in _SIGN_WORDS if w in token_set)
    knowledge_hits = sum(1.0 for w in _KNOWLEDGE_WORDS if w in token_set)
    if knowledge_hits and token_set & set(_QUESTION_WORDS):
        scores[QueryClass.K] += 2.0 * knowledge_hits + 1.0
    elif knowledge_hits:
        scores[QueryClass.K] += knowledge_hits
    scores[QueryClass.T] += sum(1.5 for w in _PROBLEM_WORDS if w in token_set)
    scores[QueryClass.G] += sum(2.0 for w in _GREETING_WORDS if w in token_set)
    if not any(scores.values()):
        # Nothing matched: domain wording without substance needs clarifying,
        # anything else is smalltalk.
        if token_set & set(_DOMAIN_WORDS):
            scores[QueryClass.T] = 1.0
        else:
            scores[QueryClass.G] = 1.0
    return scores


def normalize_scores(scores: Mapping[QueryClass, float]) -> dict[QueryClass, float]:
    for cls, s in scores.items():
        if s < 0:
            raise ValueError(f"negative score for {cls.value}: {s}")
    total = sum(scores.values())
    if total <= 0:
        raise ValueError("all-zero score vector cannot be normalized")
    return {cls: scores.get(cls, 0.0) / total for cls in QueryClass}


def classify(
    query: str,
    history: Sequence[tuple[str, str]] = (),
    gateway: Gateway | None = None,
) -> ClassificationResult:
    """Classify a query into one of the four classes.

    With a gateway the backend scores the query over the last six turns of
    history; without one the rule classifier runs. Backend scores are
    renormalized by their sum.
    """
    stripped = query.strip()
    if not stripped:
        raise EmptyQuery("query is blank")
    if gateway is not None:
        request = ModelRequest(purpose="classify", prompt=classify_prompt(stripped, history))
        try:
            response = gateway.call(request)
        except RetriesExhausted as exc:
            raise BackendUnavailable(str(exc)) from exc
        raw = parse_backend_scores(response.text)
    else:
        raw = rule_scores(stripped, history)
    probabilities = normalize_scores(raw)
    chosen = argmax_class(probabilities)
    return ClassificationResult(probabilities=probabilities, chosen=chosen, raw_query=query)


def route(result: ClassificationResult) -> RoutingDecision:
    """Fixed mapping from chosen class to downstream target."""
    target = ROUTE_TARGETS[result.chosen]
    return RoutingDecision(
        target=target,
        rationale=f"class {result.chosen.value} routes to {target}",
    )
