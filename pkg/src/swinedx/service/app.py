"""HTTP surface: JSON endpoints over the conversation engine and pipeline."""

from __future__ import annotations

import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..errors import (
    BackendUnavailable,
    EmptyQuery,
    EmptyStore,
    RetriesExhausted,
    SwineDxError,
    UnknownSession,
)
from ..pipeline import RecommendationPipeline
from ..router import classify, route
from .orchestrator import ConversationEngine

logger = logging.getLogger(__name__)


class MessageRequest(BaseModel):
    text: str


class ClassifyRequest(BaseModel):
    query: str
    history: list[tuple[str, str]] = Field(default_factory=list)


class RecommendRequest(BaseModel):
    query: str
    diagnosis: str | None = None
    history: list[tuple[str, str]] = Field(default_factory=list)


def create_app(engine: ConversationEngine, pipeline: RecommendationPipeline) -> FastAPI:
    app = FastAPI(title="swinedx", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(SwineDxError)
    async def _domain_error(request, exc: SwineDxError):
        status = 500
        if isinstance(exc, UnknownSession):
            status = 404
        elif isinstance(exc, EmptyQuery):
            status = 400
        elif isinstance(exc, (BackendUnavailable, RetriesExhausted, EmptyStore)):
            status = 503
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    @app.post("/v1/sessions")
    def create_session():
        return {"session_id": engine.create_session()}

    @app.post("/v1/sessions/{session_id}/message")
    def post_message(session_id: str, request: MessageRequest):
        return engine.post_message(session_id, request.text).to_dict()

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return engine.get_session(session_id)

    @app.post("/v1/classify")
    def classify_query(request: ClassifyRequest):
        result = classify(request.query, history=request.history, gateway=engine.gateway)
        decision = route(result)
        return {
            "probabilities": {cls.value: p for cls, p in result.probabilities.items()},
            "chosen": result.chosen.value,
            "target": decision.target,
        }

    @app.post("/v1/recommend")
    def recommend(request: RecommendRequest):
        output = pipeline.run(
            request.query, diagnosis=request.diagnosis, history=request.history
        )
        return output.to_dict()

    return app
