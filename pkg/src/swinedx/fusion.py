"""Confidence-weighted fusion of per-agent disease opinions.

Each agent contributes a weight and a per-disease confidence; the fused score
for a disease is the weighted sum after the weights are normalized to 1.
Fused scores map onto four confidence tiers, a threshold cut produces the
prediction set, and an empty prediction set flags the case as
out-of-distribution with an escalation action attached.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .errors import NoOpinions, NotOOD, OutOfRange, ZeroTotalWeight

logger = logging.getLogger(__name__)

# Band edges: very-high / high / medium lower bounds. Each edge is inclusive
# on the band above it.
DEFAULT_TIER_BOUNDS = (0.75, 0.624, 0.375)
DEFAULT_TAU = 0.375

# Fused score at or above this marks a near-miss worth human review when the
# case is otherwise out-of-distribution.
NEAR_MISS_FLOOR = 0.2


@dataclass(frozen=True)
class Disease:
    code: str
    display_name: str


class DiseaseRegistry:
    """Registered diseases, in registration order. The core four are always present."""

    CORE = (
        Disease("ASF", "African Swine Fever"),
        Disease("PRRS", "Porcine Reproductive and Respiratory Syndrome"),
        Disease("PED", "Porcine Epidemic Diarrhea"),
        Disease("FMD", "Foot-and-Mouth Disease"),
    )

    def __init__(self):
        self._diseases: dict[str, Disease] = {d.code: d for d in self.CORE}

    def register(self, code: str, display_name: str) -> Disease:
        if code in self._diseases:
            raise ValueError(f"disease code {code!r} already registered")
        disease = Disease(code, display_name)
        self._diseases[code] = disease
        return disease

    def codes(self) -> tuple[str, ...]:
        return tuple(self._diseases)

    def get(self, code: str) -> Disease:
        return self._diseases[code]

    def __contains__(self, code: str) -> bool:
        return code in self._diseases

    def __len__(self) -> int:
        return len(self._diseases)


class ConfidenceTier(Enum):
    VERY_HIGH = "VeryHigh"
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"


@dataclass(frozen=True)
class AgentOpinion:
    """One agent's weight and per-disease confidences.

    Confidences outside [0, 1] are clamped with a warning rather than
    rejected; noisy model backends do produce them. Diseases the agent did
    not score are materialized as 0.0 during fusion.
    """

    agent_id: str
    weight: float
    confidences: Mapping[str, float]

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError(f"agent {self.agent_id!r}: weight must be >= 0")
        clamped = {}
        for code, p in self.confidences.items():
            if not 0.0 <= p <= 1.0:
                logger.warning(
                    "agent %s: confidence %.4f for %s clamped to [0, 1]",
                    self.agent_id, p, code,
                )
                p = min(1.0, max(0.0, p))
            clamped[code] = float(p)
        object.__setattr__(self, "confidences", clamped)


@dataclass(frozen=True)
class FusedScores:
    scores: dict[str, float]
    tau: float
    prediction_set: frozenset[str]
    tiers: dict[str, ConfidenceTier]


@dataclass(frozen=True)
class EscalationAction:
    kind: str  # "expert-review" | "additional-tests"
    instructions: str


@dataclass(frozen=True)
class DiagnosisOutcome:
    fused: FusedScores
    ranking: tuple[tuple[str, float], ...]
    ood: bool
    escalation: str | None  # present iff ood

    def to_dict(self) -> dict:
        return {
            "scores": dict(self.fused.scores),
            "tau": self.fused.tau,
            "prediction_set": sorted(self.fused.prediction_set),
            "tiers": {code: tier.value for code, tier in self.fused.tiers.items()},
            "ranking": [[code, score] for code, score in self.ranking],
            "ood": self.ood,
            "escalation": self.escalation,
        }


def fuse(
    opinions: Iterable[AgentOpinion],
    registry: DiseaseRegistry | None = None,
) -> dict[str, float]:
    """Weighted sum of agent confidences with weights normalized to sum 1.

    Raises NoOpinions for an empty list and ZeroTotalWeight when the raw
    weights sum to zero. Every registered disease appears in the output.
    """
    opinions = list(opinions)
    if not opinions:
        raise NoOpinions("at least one agent opinion is required")
    total = sum(op.weight for op in opinions)
    if total <= 0:
        raise ZeroTotalWeight("agent weights sum to zero")
    registry = registry or DiseaseRegistry()
    fused = {code: 0.0 for code in registry.codes()}
    for op in opinions:
        alpha = op.weight / total
        for code in fused:
            fused[code] += alpha * op.confidences.get(code, 0.0)
    return fused


def tier(c: float, bounds: tuple[float, float, float] = DEFAULT_TIER_BOUNDS) -> ConfidenceTier:
    """Band assignment for a confidence in [0, 1]; lower band edges are inclusive."""
    if not 0.0 <= c <= 1.0:
        raise OutOfRange(f"confidence {c!r} outside [0, 1]")
    very_high, high, medium = bounds
    if c >= very_high:
        return ConfidenceTier.VERY_HIGH
    if c >= high:
        return ConfidenceTier.HIGH
    if c >= medium:
        return ConfidenceTier.MEDIUM
    return ConfidenceTier.LOW


def rank_top_k(fused: Mapping[str, float], k: int) -> list[tuple[str, float]]:
    """Top-k diseases by fused score, ties broken by code lexicographically."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(fused.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def predict(
    fused: Mapping[str, float],
    tau: float = DEFAULT_TAU,
    bounds: tuple[float, float, float] = DEFAULT_TIER_BOUNDS,
) -> DiagnosisOutcome:
    """Threshold cut over fused scores.

    The prediction set keeps every disease whose score meets or exceeds tau
    (the boundary is inclusive). An empty set marks the case
    out-of-distribution and attaches the escalation kind: expert review when
    a near-miss exists, additional diagnostic tests otherwise.
    """
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau {tau!r} outside (0, 1]")
    scores = {code: float(c) for code, c in fused.items()}
    prediction_set = frozenset(code for code, c in scores.items() if c >= tau)
    tiers = {code: tier(c, bounds) for code, c in scores.items()}
    ranking = tuple(rank_top_k(scores, len(scores)))
    ood = not prediction_set
    escalation = None
    if ood:
        best = max(scores.values(), default=0.0)
        escalation = "expert-review" if best >= NEAR_MISS_FLOOR else "additional-tests"
    fused_scores = FusedScores(
        scores=scores, tau=tau, prediction_set=prediction_set, tiers=tiers
    )
    return DiagnosisOutcome(fused=fused_scores, ranking=ranking, ood=ood, escalation=escalation)


def escalate(outcome: DiagnosisOutcome, context: str = "") -> EscalationAction:
    """Build the escalation action for an out-of-distribution outcome."""
    if not outcome.ood:
        raise NotOOD("escalation only applies when the prediction set is empty")
    suffix = f" Case summary: {context}" if context else ""
    if outcome.escalation == "expert-review":
        top_code, top_score = outcome.ranking[0]
        return EscalationAction(
            kind="expert-review",
            instructions=(
                f"No disease reached the decision threshold, but {top_code} scored "
                f"{top_score:.2f}. Consult a vet for manual review before acting."
                + suffix
            ),
        )
    return EscalationAction(
        kind="additional-tests",
        instructions=(
            "No disease came close to the decision threshold. Collect additional "
            "diagnostics (blood samples, pathogen screening) before a final "
            "diagnosis." + suffix
        ),
    )


def opinion_prompt(disease: Disease, case_summary: str) -> str:
    """Prompt sent to the per-disease agent; answer must be a bare number in [0, 1]."""
    return (
        f"You are a veterinary diagnostic agent specialized in {disease.display_name} "
        f"({disease.code}).\n"
        f"Given the collected case facts below, reply with a single number between "
        f"0 and 1: your confidence that the case is {disease.code}.\n"
        f"Case facts:\n{case_summary}\n"
        f"Confidence:"
    )


def panel_opinion(
    gateway,
    case_summary: str,
    registry: DiseaseRegistry | None = None,
    agent_id: str | None = None,
    weight: float = 1.0,
) -> AgentOpinion:
    """Assemble one agent opinion from per-disease specialist calls.

    Each registered disease gets its own gateway call with a disease-specific
    prompt; the replies fill that backend's confidence mapping. One backend
    therefore contributes one opinion to fusion, so a single-backend setup
    keeps C(D) equal to the specialist confidences instead of diluting them
    by the agent count. Unparseable replies score 0.0 with a warning.
    """
    from .gateway import ModelRequest

    registry = registry or DiseaseRegistry()
    confidences = {}
    for code in registry.codes():
        disease = registry.get(code)
        request = ModelRequest(purpose="opine", prompt=opinion_prompt(disease, case_summary))
        response = gateway.call(request)
        try:
            confidences[code] = float(response.text.strip())
        except ValueError:
            logger.warning(
                "specialist %s returned non-numeric reply %r; scoring 0.0", code, response.text
            )
            confidences[code] = 0.0
    if agent_id is None:
        agent_id = gateway.selected_backend.backend_id
    return AgentOpinion(agent_id=agent_id, weight=weight, confidences=confidences)
