"""HTTP service and session orchestration."""

from __future__ import annotations

from pathlib import Path

from ..gateway import Gateway, HostedBackend, ScriptedMockBackend
from ..offline import offline_handler
from ..pipeline import RecommendationPipeline
from ..store import HashingEmbedder, VectorStore
from .config import ServiceConfig, load_config
from .orchestrator import ConversationEngine, TurnResponse
from .sessions import Session, SessionStore, Turn


def build_gateway(config: ServiceConfig) -> Gateway:
    """Gateway per the configured backend kind.

    The offline kind is a scripted mock with the rule-driven default handler;
    scripted-mock adds fixtures from a file in front of that handler so
    unscripted prompts still answer deterministically.
    """
    gateway = Gateway()
    options = config.backend_options
    if config.backend == "hosted":
        backend = HostedBackend(
            backend_id=options.get("backend_id", "hosted"),
            endpoint=options["endpoint"],
            api_key_env=options.get("api_key_env", "SWINEDX_API_KEY"),
        )
    else:
        fixtures = None
        if config.backend == "scripted-mock" and "fixtures" in options:
            backend = ScriptedMockBackend.from_file(
                options["fixtures"], backend_id=options.get("backend_id", "scripted-mock")
            )
            backend.default_handler = offline_handler
            gateway.register_backend(backend)
            return gateway
        backend = ScriptedMockBackend(
            backend_id=options.get("backend_id", config.backend),
            fixtures=fixtures,
            default_handler=offline_handler,
        )
    gateway.register_backend(backend)
    return gateway


def build_service(config: ServiceConfig):
    """Wire the engine, pipeline, and app from a validated configuration."""
    from .app import create_app

    gateway = build_gateway(config)
    embedder = HashingEmbedder(config.embedder_dim)
    store_path = Path(config.store_path)
    store_path.parent.mkdir(parents=True, exist_ok=True)
    store = VectorStore(embedder, path=store_path)
    pipeline = RecommendationPipeline(
        store,
        gateway=gateway,
        k=config.k,
        history_window=config.history_window,
        refusal_template=config.refusal_template,
        gateway_rewrite=True,
        gateway_extract=True,
    )
    sessions = SessionStore(config.sessions_path)
    engine = ConversationEngine(
        sessions,
        pipeline,
        gateway=gateway,
        tau=config.tau,
        tier_bounds=config.tier_bounds,
        agent_weights=config.agent_weights,
    )
    return create_app(engine, pipeline), engine, pipeline


__all__ = [
    "ConversationEngine",
    "ServiceConfig",
    "Session",
    "SessionStore",
    "Turn",
    "TurnResponse",
    "build_gateway",
    "build_service",
    "load_config",
]
