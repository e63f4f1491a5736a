"""Conversational orchestration binding the routing, dialogue, fusion, and
recommendation pieces into the end-to-end multi-turn flow.

Every user turn is classified exactly once and recorded with its class.
While a symptom dialogue is open, messages feed the collection machine; once
a summary is confirmed (or the exchange cap forces it), the specialist panel
scores the case, fused scores become a tiered outcome, and knowledge queries
afterwards flow through the recommendation pipeline.
"""

from __future__ import annotations

import logging
import re
import threading
import time
from dataclasses import dataclass, field

from .. import dialogue as dlg
from ..errors import SwineDxError
from ..fusion import (
    DEFAULT_TAU,
    DEFAULT_TIER_BOUNDS,
    ConfidenceTier,
    DiagnosisOutcome,
    DiseaseRegistry,
    escalate,
    fuse,
    panel_opinion,
    predict,
)
from ..gateway import Gateway
from ..pipeline import RecommendationPipeline
from ..router import classify, route
from .sessions import Session, SessionStore, Turn

logger = logging.getLogger(__name__)

GENERAL_REPLY = "Hello! How can I assist you with pig care?"
CLARIFICATION_REPLY = (
    "I see. Are you looking for: disease diagnosis, or general pig disease information?"
)
DETAIL_PROMPT = "Interesting. Can you provide more details?"

_YES = re.compile(r"^\s*(yes|yeah|yep|correct|right|accurate)\b", re.IGNORECASE)
_NO = re.compile(r"^\s*(no|nope|wrong|incorrect)\b", re.IGNORECASE)


def parse_confirmation(text: str) -> bool | None:
    if _YES.search(text):
        return True
    if _NO.search(text):
        return False
    return None


def render_outcome(outcome: DiagnosisOutcome) -> str:
    """Human-readable prediction block mirroring the conversational flow."""
    fused = outcome.fused
    lines = ["Based on the symptoms:"]
    if outcome.ood:
        top_code, _ = outcome.ranking[0]
        flagged = top_code if outcome.escalation == "expert-review" else None
        unlikely = [code for code, _ in outcome.ranking if code != flagged]
        if unlikely:
            lines.append(f"- {', '.join(unlikely)} are unlikely.")
        if flagged:
            lines.append(f"- There is a small chance of {flagged}.")
        lines.append(escalate(outcome).instructions)
    else:
        for code, score in outcome.ranking:
            if code in fused.prediction_set:
                tier_name = fused.tiers[code].value
                lines.append(f"- {code}: {tier_name} confidence ({score:.2f}).")
        low = [
            code for code, _ in outcome.ranking
            if code not in fused.prediction_set and fused.tiers[code] is ConfidenceTier.LOW
        ]
        if low:
            lines.append(f"- {', '.join(low)} are unlikely.")
    lines.append(f"Would you like details on {outcome.ranking[0][0]} testing?")
    return "\n".join(lines)


@dataclass
class TurnResponse:
    session_id: str
    reply: str
    query_class: str
    target: str
    phase: str
    dialogue_state: str | None = None
    outcome: dict | None = None
    citations: list[dict] = field(default_factory=list)
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "reply": self.reply,
            "query_class": self.query_class,
            "target": self.target,
            "phase": self.phase,
            "dialogue_state": self.dialogue_state,
            "outcome": self.outcome,
            "citations": self.citations,
            "error": self.error,
        }


class ConversationEngine:
    """Session-scoped orchestration; one message per session at a time."""

    def __init__(
        self,
        sessions: SessionStore,
        pipeline: RecommendationPipeline,
        gateway: Gateway,
        registry: DiseaseRegistry | None = None,
        tau: float = DEFAULT_TAU,
        tier_bounds: tuple[float, float, float] = DEFAULT_TIER_BOUNDS,
        agent_weights: dict[str, float] | None = None,
        clock=time.time,
    ):
        self.sessions = sessions
        self.pipeline = pipeline
        self.gateway = gateway
        self.registry = registry or DiseaseRegistry()
        self.tau = tau
        self.tier_bounds = tier_bounds
        self.agent_weights = agent_weights or {}
        self._clock = clock
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    # --- public API ---

    def create_session(self) -> str:
        return self.sessions.create().session_id

    def get_session(self, session_id: str) -> dict:
        with self._lock_for(session_id):
            return self.sessions.load(session_id).snapshot()

    def post_message(self, session_id: str, text: str) -> TurnResponse:
        with self._lock_for(session_id):
            session = self.sessions.load(session_id)
            result = classify(text, history=session.history(), gateway=self.gateway)
            decision = route(result)
            self._append_turn(session, "user", text, result.chosen.value)
            response = TurnResponse(
                session_id=session_id,
                reply="",
                query_class=result.chosen.value,
                target=decision.target,
                phase=session.phase,
            )
            try:
                if session.phase == "collecting":
                    self._continue_collection(session, text, response)
                elif session.phase == "confirming":
                    self._handle_confirmation(session, text, response)
                else:
                    self._route_fresh(session, text, result.chosen.value, response)
            except SwineDxError as exc:
                logger.warning("session %s: turn failed: %s", session_id, exc)
                response.error = f"{type(exc).__name__}: {exc}"
                response.reply = (
                    "Something went wrong while handling that message; please try again."
                )
            self._append_turn(
                session, "system", response.reply, None,
                outcome=response.outcome, citations=response.citations or None,
            )
            response.phase = session.phase
            if session.dialogue is not None:
                response.dialogue_state = session.dialogue.state.value
            return response

    # --- flow pieces ---

    def _append_turn(
        self,
        session: Session,
        role: str,
        text: str,
        query_class: str | None,
        outcome: dict | None = None,
        citations: list | None = None,
    ):
        turn = Turn(
            role=role,
            text=text,
            query_class=query_class,
            timestamp=self._clock(),
            outcome=outcome,
            citations=citations,
        )
        session.turns.append(turn)
        self.sessions.append(session.session_id, {"type": "turn", **turn.to_dict()})

    def _persist_dialogue(self, session: Session) -> None:
        import json as _json

        data = _json.loads(session.dialogue.to_json()) if session.dialogue else None
        self.sessions.append(
            session.session_id, {"type": "dialogue", "data": data, "phase": session.phase}
        )

    def _route_fresh(self, session: Session, text: str, query_class: str, response: TurnResponse):
        if query_class == "G":
            response.reply = GENERAL_REPLY
        elif query_class == "T":
            response.reply = CLARIFICATION_REPLY
        elif query_class == "D":
            session.dialogue = dlg.start_session(text)
            session.phase = "collecting"
            question = dlg.next_question(session.dialogue)
            response.reply = f"{DETAIL_PROMPT}\n{question}"
            self._persist_dialogue(session)
        else:
            output = self.pipeline.run(text, diagnosis=None, history=session.history()[:-1])
            response.reply = self._render_recommendation(output)
            response.citations = [c.to_dict() for c in output.citations]

    def _continue_collection(self, session: Session, text: str, response: TurnResponse):
        dialogue = session.dialogue
        dlg.ingest_answer(dialogue, text)
        if dialogue.finalizable or dialogue.exchanges_used >= dlg.MAX_EXCHANGES:
            report = dlg.finalize(dialogue)
            session.phase = "confirming"
            response.reply = f"Understood. {report.summary}"
        else:
            response.reply = dlg.next_question(dialogue)
        self._persist_dialogue(session)

    def _handle_confirmation(self, session: Session, text: str, response: TurnResponse):
        dialogue = session.dialogue
        confirmed = parse_confirmation(text)
        if confirmed is None:
            report = dlg.finalize(dialogue, force=True)
            response.reply = f"Please confirm. {report.summary}"
            return
        if not confirmed and dialogue.exchanges_used < dlg.MAX_EXCHANGES:
            dialogue.finalizable = False
            session.phase = "collecting"
            response.reply = f"Understood, let's continue. {dlg.next_question(dialogue)}"
            self._persist_dialogue(session)
            return
        dialogue.confirmed = confirmed
        outcome = self._diagnose(dialogue)
        session.phase = "idle"
        session.last_outcome = outcome.to_dict()
        response.outcome = session.last_outcome
        response.reply = render_outcome(outcome)
        self._persist_dialogue(session)
        self.sessions.append(
            session.session_id, {"type": "outcome", "data": session.last_outcome}
        )

    def _diagnose(self, dialogue) -> DiagnosisOutcome:
        report = dlg.finalize(dialogue, force=True)
        summary = dlg.facts_digest(report.facts)
        opinion = panel_opinion(
            self.gateway,
            summary,
            registry=self.registry,
            weight=self.agent_weights.get("panel", 1.0),
        )
        fused = fuse([opinion], registry=self.registry)
        return predict(fused, tau=self.tau, bounds=self.tier_bounds)

    def _render_recommendation(self, output) -> str:
        if not output.citations:
            return output.answer
        files = sorted({c.source_file for c in output.citations})
        return f"{output.answer}\nWould you like to read more? ({', '.join(files)})"
