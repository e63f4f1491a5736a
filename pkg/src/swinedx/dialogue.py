"""Stage-wise symptom collection.

A diagnostic session walks three states: General (broad health indicators),
External (visible physical signs), and Specific (targeted symptom clusters),
capped at three user answers. Facts are extracted by keyword matching, or by
a gateway-assisted extractor when one is supplied. Answers are graded for
specificity and the grade drives the state transition.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from .errors import EmptySession, TurnLimitReached

MAX_EXCHANGES = 3

CATEGORY_GENERAL = "general-indicator"
CATEGORY_EXTERNAL = "external-sign"
CATEGORY_SPECIFIC = "specific-cluster"

CLUSTERS = ("respiratory", "gastrointestinal", "neurological", "reproductive")


class DialogueState(Enum):
    GENERAL = "G"
    EXTERNAL = "E"
    SPECIFIC = "S"


class Specificity(Enum):
    GENERAL = "general"
    EXTERNAL = "external"
    SPECIFIC = "specific"
    MISSING_CRUCIAL = "missing-crucial"


# Transition table. Sequential progression advances G to E and E to S once
# the state's question is answered (or bettered); specific details jump
# straight from G to S; a Specific-state answer that reveals missing general
# indicators reverts to G. Every other combination holds the current state;
# in particular E never falls back to G.
TRANSITIONS: dict[tuple[DialogueState, Specificity], DialogueState] = {
    (DialogueState.GENERAL, Specificity.GENERAL): DialogueState.EXTERNAL,
    (DialogueState.GENERAL, Specificity.EXTERNAL): DialogueState.GENERAL,
    (DialogueState.GENERAL, Specificity.SPECIFIC): DialogueState.SPECIFIC,
    (DialogueState.GENERAL, Specificity.MISSING_CRUCIAL): DialogueState.GENERAL,
    (DialogueState.EXTERNAL, Specificity.GENERAL): DialogueState.EXTERNAL,
    (DialogueState.EXTERNAL, Specificity.EXTERNAL): DialogueState.SPECIFIC,
    (DialogueState.EXTERNAL, Specificity.SPECIFIC): DialogueState.SPECIFIC,
    (DialogueState.EXTERNAL, Specificity.MISSING_CRUCIAL): DialogueState.EXTERNAL,
    (DialogueState.SPECIFIC, Specificity.GENERAL): DialogueState.SPECIFIC,
    (DialogueState.SPECIFIC, Specificity.EXTERNAL): DialogueState.SPECIFIC,
    (DialogueState.SPECIFIC, Specificity.SPECIFIC): DialogueState.SPECIFIC,
    (DialogueState.SPECIFIC, Specificity.MISSING_CRUCIAL): DialogueState.GENERAL,
}


@dataclass(frozen=True)
class SymptomFact:
    category: str
    attribute: str
    value: str
    source_turn: int

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "attribute": self.attribute,
            "value": self.value,
            "source_turn": self.source_turn,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SymptomFact":
        return cls(
            category=data["category"],
            attribute=data["attribute"],
            value=data["value"],
            source_turn=int(data["source_turn"]),
        )


@dataclass
class DialogueSession:
    """Mutable per-conversation collection state. Single-writer by contract."""

    state: DialogueState = DialogueState.GENERAL
    exchanges_used: int = 0
    facts: list[SymptomFact] = field(default_factory=list)
    confirmed: bool = False
    finalizable: bool = False
    complaint: str = ""

    def to_json(self) -> str:
        return json.dumps(
            {
                "state": self.state.value,
                "exchanges_used": self.exchanges_used,
                "facts": [f.to_dict() for f in self.facts],
                "confirmed": self.confirmed,
                "finalizable": self.finalizable,
                "complaint": self.complaint,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, payload: str) -> "DialogueSession":
        data = json.loads(payload)
        return cls(
            state=DialogueState(data["state"]),
            exchanges_used=int(data["exchanges_used"]),
            facts=[SymptomFact.from_dict(f) for f in data["facts"]],
            confirmed=bool(data["confirmed"]),
            finalizable=bool(data["finalizable"]),
            complaint=data.get("complaint", ""),
        )


@dataclass(frozen=True)
class SymptomReport:
    facts: tuple[SymptomFact, ...]
    summary: str
    user_confirmed: bool
    truncated: bool


# Keyword vocabulary: phrase pattern -> (category, attribute, canonical value).
# ``{m}`` substitutes the matched text. Patterns are checked in order.
_VOCAB: list[tuple[str, tuple[str, str, str]]] = [
    (r"red bod(?:y|ies)|red skin|redness", (CATEGORY_EXTERNAL, "skin", "red body")),
    (r"purple ears?", (CATEGORY_EXTERNAL, "skin", "purple ears")),
    (r"blue ears?", (CATEGORY_EXTERNAL, "skin", "blue ears")),
    (r"(?:skin )?lesions?", (CATEGORY_EXTERNAL, "skin-lesion", "skin lesions")),
    (r"blisters?", (CATEGORY_EXTERNAL, "skin-lesion", "blisters")),
    (r"(?:nasal|ocular)? ?discharge", (CATEGORY_EXTERNAL, "discharge", "{m}")),
    (r"lame(?:ness)?", (CATEGORY_EXTERNAL, "mobility", "lameness")),
    (r"refus\w+ to stand", (CATEGORY_EXTERNAL, "behavior", "refusal to stand")),
    (r"aggressi\w+", (CATEGORY_EXTERNAL, "behavior", "aggression")),
    (r"lethargy|lethargic", (CATEGORY_EXTERNAL, "behavior", "lethargy")),
    (r"fever", (CATEGORY_EXTERNAL, "condition", "fever")),
    (r"cough\w*", (CATEGORY_SPECIFIC, "respiratory", "coughing")),
    (r"sneez\w*", (CATEGORY_SPECIFIC, "respiratory", "sneezing")),
    (r"labou?red breathing|respiratory", (CATEGORY_SPECIFIC, "respiratory", "respiratory distress")),
    (r"vomit\w*", (CATEGORY_SPECIFIC, "gastrointestinal", "vomiting")),
    (r"diarr?hoea|diarr?hea", (CATEGORY_SPECIFIC, "gastrointestinal", "diarrhea")),
    (r"tremors?", (CATEGORY_SPECIFIC, "neurological", "tremors")),
    (r"seizures?", (CATEGORY_SPECIFIC, "neurological", "seizures")),
    (r"stillbirths?|stillborn", (CATEGORY_SPECIFIC, "reproductive", "stillbirths")),
    (r"abortions?", (CATEGORY_SPECIFIC, "reproductive", "abortions")),
    (r"mummified", (CATEGORY_SPECIFIC, "reproductive", "mummified fetuses")),
    (r"infertil\w+", (CATEGORY_SPECIFIC, "reproductive", "infertility")),
    (r"died|dead|death(?:s)?|dying|mortality", (CATEGORY_GENERAL, "mortality-rate", "deaths reported")),
    (r"morbidity", (CATEGORY_GENERAL, "morbidity-rate", "morbidity reported")),
    (r"piglets?|breeders?|finishers?|sows?|boars?|weaners?", (CATEGORY_GENERAL, "pig-classification", "{m}")),
    (r"ventilation|weather|humidity|temperature drop", (CATEGORY_GENERAL, "environment", "{m}")),
    (r"(\d+)\s*(?:pigs?|animals?|head)", (CATEGORY_GENERAL, "affected-count", "{m}")),
]

_NO_MORE_INFO = re.compile(
    r"no (?:extra|more|further|additional) information|nothing (?:else|more|further)",
    re.IGNORECASE,
)


def extract_facts(text: str, source_turn: int) -> list[SymptomFact]:
    """Keyword extraction of symptom facts; deduplicates on (attribute, value)."""
    lowered = text.lower()
    facts = []
    seen = set()
    for pattern, (category, attribute, value_template) in _VOCAB:
        for match in re.finditer(rf"\b(?:{pattern})\b", lowered):
            value = value_template.replace("{m}", match.group(0).strip())
            key = (attribute, value)
            if key in seen:
                continue
            seen.add(key)
            facts.append(SymptomFact(category, attribute, value, source_turn))
    return facts


def is_no_more_information(text: str) -> bool:
    return bool(_NO_MORE_INFO.search(text))


def grade_answer(
    answered_state: DialogueState,
    new_facts: Sequence[SymptomFact],
    session_facts: Sequence[SymptomFact],
) -> Specificity:
    """Specificity grade for an answer given in ``answered_state``.

    An answer to the Specific-state question grades missing-crucial when the
    session still has no general indicators; otherwise any named-cluster fact
    grades specific, and the fallback is the answered state's own grade.
    """
    all_facts = list(session_facts) + list(new_facts)
    if answered_state is DialogueState.SPECIFIC:
        if not any(f.category == CATEGORY_GENERAL for f in all_facts):
            return Specificity.MISSING_CRUCIAL
    if any(f.category == CATEGORY_SPECIFIC and f.attribute in CLUSTERS for f in new_facts):
        return Specificity.SPECIFIC
    return {
        DialogueState.GENERAL: Specificity.GENERAL,
        DialogueState.EXTERNAL: Specificity.EXTERNAL,
        DialogueState.SPECIFIC: Specificity.SPECIFIC,
    }[answered_state]


def transition(state: DialogueState, specificity: Specificity) -> DialogueState:
    """Total transition function over state x specificity."""
    return TRANSITIONS[(state, specificity)]


_CLUSTER_QUESTIONS = {
    "respiratory": "Are there respiratory symptoms such as coughing or sneezing?",
    "gastrointestinal": "Are there gastrointestinal symptoms such as vomiting or diarrhea?",
    "neurological": "Are there neurological symptoms such as tremors or seizures?",
    "reproductive": "Are there reproductive issues such as stillbirths or infertility?",
}

_GENERIC_SPECIFIC_QUESTION = (
    "Which symptom cluster fits best: respiratory (coughing, sneezing), "
    "gastrointestinal (vomiting, diarrhea), neurological (tremors, seizures), "
    "or reproductive (stillbirths, infertility)?"
)


def _cluster_hint(session: DialogueSession) -> str | None:
    for fact in reversed(session.facts):
        if fact.category == CATEGORY_SPECIFIC and fact.attribute in CLUSTERS:
            return fact.attribute
    return None


def next_question(session: DialogueSession) -> str:
    """State-appropriate question for the next exchange."""
    if session.exchanges_used >= MAX_EXCHANGES:
        raise TurnLimitReached(f"all {MAX_EXCHANGES} exchanges used")
    if session.state is DialogueState.GENERAL:
        return (
            "How many pigs are affected? What is their age/type? "
            "Any recent environmental changes such as ventilation or weather?"
        )
    if session.state is DialogueState.EXTERNAL:
        return (
            "Are there visible signs such as skin lesions or color changes? "
            "Any nasal or ocular discharge, or unusual behavior?"
        )
    hint = _cluster_hint(session)
    if hint is not None:
        return _CLUSTER_QUESTIONS[hint]
    return _GENERIC_SPECIFIC_QUESTION


def apply_answer(
    session: DialogueSession,
    specificity: Specificity,
    new_facts: Sequence[SymptomFact] = (),
    finalizable: bool = False,
) -> DialogueSession:
    """Core step: count the exchange, append facts, transition if turns remain.

    After the final exchange the state is left untouched; finalization fires
    before any transition output would be consulted.
    """
    if session.exchanges_used >= MAX_EXCHANGES:
        raise TurnLimitReached(f"all {MAX_EXCHANGES} exchanges used")
    session.exchanges_used += 1
    session.facts.extend(new_facts)
    if finalizable:
        session.finalizable = True
    elif session.exchanges_used < MAX_EXCHANGES:
        session.state = transition(session.state, specificity)
    return session


def ingest_answer(
    session: DialogueSession,
    answer: str,
    extractor: Callable[[str, int], list[SymptomFact]] | None = None,
) -> DialogueSession:
    """Consume one user answer: extract facts, grade, and step the machine.

    A no-more-information reply counts the exchange, adds nothing, and marks
    the session finalizable.
    """
    if session.exchanges_used >= MAX_EXCHANGES:
        raise TurnLimitReached(f"all {MAX_EXCHANGES} exchanges used")
    stripped = answer.strip()
    if not stripped:
        raise ValueError("answer is blank; pass a no-more-information reply to stop early")
    if is_no_more_information(stripped):
        return apply_answer(session, Specificity.GENERAL, (), finalizable=True)
    extractor = extractor or extract_facts
    new_facts = extractor(stripped, session.exchanges_used + 1)
    specificity = grade_answer(session.state, new_facts, session.facts)
    return apply_answer(session, specificity, new_facts)


def start_session(complaint: str, extractor: Callable[[str, int], list[SymptomFact]] | None = None) -> DialogueSession:
    """Open a session from the initial complaint.

    The complaint does not count toward the exchange cap. Sessions start in
    General unless the complaint already grades specific, in which case the
    direct jump to Specific applies immediately.
    """
    extractor = extractor or extract_facts
    session = DialogueSession(complaint=complaint.strip())
    facts = extractor(session.complaint, 0) if session.complaint else []
    session.facts.extend(facts)
    if any(f.category == CATEGORY_SPECIFIC and f.attribute in CLUSTERS for f in facts):
        session.state = DialogueState.SPECIFIC
    return session


def finalize(session: DialogueSession, force: bool = False) -> SymptomReport:
    """Close collection and emit the symptom report.

    Pure function of the session, hence idempotent. ``truncated`` is set only
    when the exchange cap, not the user, ended collection.
    """
    if not (session.exchanges_used >= MAX_EXCHANGES or session.finalizable or force):
        raise ValueError("session is not finalizable yet; turns remain")
    if not session.facts and not session.complaint:
        raise EmptySession("nothing was collected: no facts and no complaint text")
    if session.facts:
        listed = ", ".join(f.value for f in session.facts)
    else:
        listed = session.complaint
    summary = f"Summary: {listed}. Is this correct?"
    return SymptomReport(
        facts=tuple(session.facts),
        summary=summary,
        user_confirmed=session.confirmed,
        truncated=session.exchanges_used >= MAX_EXCHANGES and not session.finalizable,
    )


def facts_digest(facts: Sequence[SymptomFact]) -> str:
    """Canonical one-line rendering of facts, used in specialist prompts."""
    if not facts:
        return "(no structured facts collected)"
    parts = [f"{f.category}/{f.attribute}: {f.value}" for f in facts]
    return "; ".join(parts)
