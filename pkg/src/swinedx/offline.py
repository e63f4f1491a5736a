"""Deterministic offline backend.

A scripted-mock backend whose default handler answers every prompt purpose
with rule-driven text: classification replies come from the keyword
classifier, specialist confidences from a sign-weight table, rewrites echo
the enriched query, and generation quotes the top retrieved excerpt. The
handler is a pure function of the prompt, so offline runs are reproducible
byte for byte.
"""

from __future__ import annotations

import json
import re

from .gateway import Gateway, ScriptedMockBackend
from .router import rule_scores

# Additive evidence weights per disease over canonical fact values; every
# disease starts from a small base so "no evidence" stays well below the
# decision threshold.
OPINION_BASE = 0.05
OPINION_SIGN_TABLE: dict[str, dict[str, float]] = {
    "ASF": {
        "red body": 0.15, "purple ears": 0.15, "deaths reported": 0.10,
        "fever": 0.10, "lethargy": 0.05, "skin lesions": 0.05,
    },
    "PRRS": {
        "abortions": 0.20, "stillbirths": 0.20, "mummified fetuses": 0.15,
        "respiratory distress": 0.10, "blue ears": 0.20, "fever": 0.05,
        "coughing": 0.05,
    },
    "PED": {"diarrhea": 0.35, "vomiting": 0.25, "deaths reported": 0.05},
    "FMD": {"blisters": 0.30, "lameness": 0.20, "fever": 0.05, "skin lesions": 0.10},
}


def table_confidence(disease_code: str, fact_values: set[str]) -> float:
    """Sign-table score for one disease given the collected fact values."""
    weights = OPINION_SIGN_TABLE.get(disease_code, {})
    score = OPINION_BASE + sum(w for value, w in weights.items() if value in fact_values)
    return min(1.0, score)


def _parse_fact_values(prompt: str) -> set[str]:
    # The case facts block renders as "category/attribute: value; ...".
    match = re.search(r"Case facts:\n(.*)\nConfidence:", prompt, re.DOTALL)
    if not match:
        return set()
    values = set()
    for part in match.group(1).split(";"):
        if ":" in part:
            values.add(part.split(":", 1)[1].strip())
    return values


def _handle_classify(prompt: str) -> str:
    query = prompt.rsplit("Query: ", 1)[-1]
    scores = rule_scores(query)
    return json.dumps({cls.value: score for cls, score in scores.items()})


def _handle_opine(prompt: str) -> str:
    code_match = re.search(r"\((\w+)\)", prompt)
    code = code_match.group(1) if code_match else ""
    return f"{table_confidence(code, _parse_fact_values(prompt)):.4f}"


def _handle_extract(prompt: str) -> str:
    from .pipeline import extract_general_terms, extract_medical_terms

    match = re.search(r"^Text: (.*)$", prompt, re.MULTILINE)
    scope = match.group(1) if match else ""
    if '"general"' in prompt:
        entities = extract_general_terms(scope)
        return json.dumps({"general": [[e.term, e.kind] for e in entities]})
    entities = extract_medical_terms(scope)
    return json.dumps(
        {
            "medical": [
                {"kind": e.kind, "trade_name": e.trade_name, "group": e.group}
                for e in entities
            ]
        }
    )


def _handle_rewrite(prompt: str) -> str:
    query = ""
    terms = ""
    for line in prompt.splitlines():
        if line.startswith("Query: "):
            query = line[len("Query: "):]
        elif line.startswith("Context terms: "):
            terms = line[len("Context terms: "):]
    return f"{query} [{terms}]" if terms else query


def _handle_generate(prompt: str) -> str:
    # Quote the first reference excerpt; generation without a model is just
    # faithful retrieval reporting.
    match = re.search(r"^\[1\] \(([^)]+)\) (.*)$", prompt, re.MULTILINE)
    if not match:
        return "No supporting reference was retrieved."
    source, excerpt = match.groups()
    words = excerpt.split()
    if len(words) > 80:
        excerpt = " ".join(words[:80]) + " ..."
    return f"According to {source}: {excerpt}"


def offline_handler(prompt: str, parameters: dict) -> str:
    """Dispatch on the stable prompt preambles used by each caller."""
    if prompt.startswith("Classify the final user query"):
        return _handle_classify(prompt)
    if prompt.startswith("You are a veterinary diagnostic agent"):
        return _handle_opine(prompt)
    if prompt.startswith("Extract entities."):
        return _handle_extract(prompt)
    if prompt.startswith("Rewrite stage"):
        return _handle_rewrite(prompt)
    if prompt.startswith("You are a swine health assistant"):
        return _handle_generate(prompt)
    return "I can assist with swine diseases, vaccine diagnostics, or treatments."


def make_offline_backend(backend_id: str = "offline", fixtures: dict[str, str] | None = None) -> ScriptedMockBackend:
    return ScriptedMockBackend(
        backend_id=backend_id, fixtures=fixtures, default_handler=offline_handler
    )


def make_offline_gateway(**kwargs) -> Gateway:
    gateway = Gateway()
    gateway.register_backend(make_offline_backend(**kwargs))
    return gateway
