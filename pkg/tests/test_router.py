"""Classification and routing contracts."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from swinedx.errors import BackendUnavailable, EmptyQuery
from swinedx.gateway import BackoffPolicy, Gateway, ScriptedMockBackend
from swinedx.router import (
    ClassificationResult,
    QueryClass,
    argmax_class,
    classify,
    classify_prompt,
    normalize_scores,
    route,
)


@pytest.mark.parametrize(
    "query,expected",
    [
        ("Hello! What can be done?", QueryClass.G),
        ("Many pigs received from the source have died.", QueryClass.T),
        ("Pigs have red bodies, purple ears..", QueryClass.D),
        ("What samples are used for ASF testing?", QueryClass.K),
        ("Which disinfectant should I use for water?", QueryClass.K),
        ("Sows show abortions and stillbirths", QueryClass.D),
        ("nice weather today", QueryClass.G),
        ("my pigs", QueryClass.T),
    ],
)
def test_rule_classifier_fixed_inputs(query, expected):
    assert classify(query).chosen is expected


def test_classify_rejects_blank_query():
    with pytest.raises(EmptyQuery):
        classify("   ")


def test_uniform_tie_breaks_to_general():
    backend = ScriptedMockBackend()
    backend.script_rule("Query:", '{"K": 0.25, "D": 0.25, "T": 0.25, "G": 0.25}')
    gateway = Gateway(sleep=lambda s: None)
    gateway.register_backend(backend)
    result = classify("ambiguous", gateway=gateway)
    assert result.chosen is QueryClass.G


def test_tie_break_priority_order():
    assert argmax_class({QueryClass.K: 0.4, QueryClass.D: 0.4, QueryClass.T: 0.1, QueryClass.G: 0.1}) is QueryClass.D
    assert argmax_class({QueryClass.K: 0.4, QueryClass.D: 0.1, QueryClass.T: 0.4, QueryClass.G: 0.1}) is QueryClass.T


def test_backend_scores_renormalized():
    backend = ScriptedMockBackend()
    backend.script_rule("Query:", '{"K": 2.0, "D": 1.0, "T": 1.0, "G": 0.0}')
    gateway = Gateway(sleep=lambda s: None)
    gateway.register_backend(backend)
    result = classify("anything", gateway=gateway)
    assert result.probabilities[QueryClass.K] == pytest.approx(0.5)
    assert sum(result.probabilities.values()) == pytest.approx(1.0)


def test_all_zero_backend_scores_are_an_error():
    backend = ScriptedMockBackend()
    backend.script_rule("Query:", '{"K": 0, "D": 0, "T": 0, "G": 0}')
    gateway = Gateway(sleep=lambda s: None)
    gateway.register_backend(backend)
    with pytest.raises(ValueError):
        classify("anything", gateway=gateway)


def test_backend_exhaustion_surfaces_backend_unavailable(fake_clock):
    backend = ScriptedMockBackend(fail_times=10)
    gateway = Gateway(policy=BackoffPolicy(base_delay=0.1), sleep=fake_clock.sleep)
    gateway.register_backend(backend)
    with pytest.raises(BackendUnavailable):
        classify("anything", gateway=gateway)


def test_classification_deterministic_given_fixture():
    backend = ScriptedMockBackend()
    backend.script_rule("Query:", '{"K": 0.7, "D": 0.1, "T": 0.1, "G": 0.1}')
    gateway = Gateway(sleep=lambda s: None)
    gateway.register_backend(backend)
    history = [("user", "hi"), ("system", "hello")]
    first = classify("same query", history=history, gateway=gateway)
    second = classify("same query", history=history, gateway=gateway)
    assert first == second


def test_history_window_limits_prompt():
    history = [("user", f"turn {i}") for i in range(10)]
    prompt = classify_prompt("q", history)
    assert "turn 9" in prompt and "turn 4" in prompt
    assert "turn 3" not in prompt


def test_route_fixed_mapping():
    for cls, target in [
        (QueryClass.K, "recommendation-pipeline"),
        (QueryClass.D, "symptom-dialogue"),
        (QueryClass.T, "clarification-prompt"),
        (QueryClass.G, "general-reply"),
    ]:
        probabilities = {c: (1.0 if c is cls else 0.0) for c in QueryClass}
        result = ClassificationResult(probabilities=probabilities, chosen=cls, raw_query="q")
        assert route(result).target == target


@given(
    st.dictionaries(
        st.sampled_from(list(QueryClass)),
        st.floats(min_value=0.001, max_value=1.0),
        min_size=4,
        max_size=4,
    ),
    st.floats(min_value=0.1, max_value=100.0),
)
def test_route_invariant_under_monotone_rescaling(scores, scale):
    base = normalize_scores(scores)
    rescaled = normalize_scores({cls: s * scale for cls, s in scores.items()})
    before = ClassificationResult(base, argmax_class(base), "q")
    after = ClassificationResult(rescaled, argmax_class(rescaled), "q")
    assert route(before).target == route(after).target


def test_result_invariants_enforced():
    complete = {QueryClass.K: 0.5, QueryClass.D: 0.5, QueryClass.T: 0.0, QueryClass.G: 0.0}
    with pytest.raises(ValueError):
        ClassificationResult({QueryClass.K: 1.0}, QueryClass.K, "q")
    unbalanced = dict(complete)
    unbalanced[QueryClass.K] = 0.9
    with pytest.raises(ValueError):
        ClassificationResult(unbalanced, QueryClass.K, "q")
    with pytest.raises(ValueError):
        ClassificationResult(complete, QueryClass.G, "q")
