"""Per-session persistence as append-only JSONL event logs.

One file per session under the sessions directory; each line is an event.
Loading replays the log, so a restarted service sees exactly the state the
last completed turn left behind.
"""

from __future__ import annotations

import json
import logging
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..dialogue import DialogueSession
from ..errors import StorageFailure, UnknownSession

logger = logging.getLogger(__name__)

PHASES = ("idle", "collecting", "confirming")


@dataclass
class Turn:
    role: str  # "user" | "system"
    text: str
    query_class: str | None = None
    timestamp: float = 0.0
    # System turns produced by a prediction or a recommendation carry their
    # payload so a transcript renders identically from the snapshot alone.
    outcome: dict | None = None
    citations: list | None = None

    def to_dict(self) -> dict:
        return {
            "role": self.role,
            "text": self.text,
            "class": self.query_class,
            "ts": self.timestamp,
            "outcome": self.outcome,
            "citations": self.citations,
        }


@dataclass
class Session:
    session_id: str
    turns: list[Turn] = field(default_factory=list)
    dialogue: DialogueSession | None = None
    phase: str = "idle"
    last_outcome: dict | None = None

    def history(self) -> list[tuple[str, str]]:
        return [(t.role, t.text) for t in self.turns]

    def snapshot(self) -> dict:
        return {
            "session_id": self.session_id,
            "turns": [t.to_dict() for t in self.turns],
            "dialogue": json.loads(self.dialogue.to_json()) if self.dialogue else None,
            "phase": self.phase,
            "last_outcome": self.last_outcome,
        }


class SessionStore:
    """Event-log persistence; the write path is append-and-flush only."""

    def __init__(self, root: str | Path, id_factory: Callable[[], str] | None = None):
        self.root = Path(root)
        self._id_factory = id_factory or (lambda: uuid.uuid4().hex[:12])
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            probe = self.root / ".probe"
            probe.write_text("ok")
            probe.unlink()
        except OSError as exc:
            raise StorageFailure(f"session directory {self.root} is not writable: {exc}") from exc

    def _path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.jsonl"

    def exists(self, session_id: str) -> bool:
        return self._path(session_id).exists()

    def create(self) -> Session:
        session_id = self._id_factory()
        while self.exists(session_id):
            session_id = self._id_factory()
        try:
            self._path(session_id).touch()
        except OSError as exc:
            raise StorageFailure(f"cannot create session {session_id}: {exc}") from exc
        logger.info("created session %s", session_id)
        return Session(session_id=session_id)

    def append(self, session_id: str, event: dict) -> None:
        try:
            with open(self._path(session_id), "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
                fh.flush()
        except OSError as exc:
            raise StorageFailure(f"cannot append to session {session_id}: {exc}") from exc

    def load(self, session_id: str) -> Session:
        path = self._path(session_id)
        if not path.exists():
            raise UnknownSession(f"no session {session_id!r}")
        session = Session(session_id=session_id)
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                event = json.loads(line)
                kind = event.get("type")
                if kind == "turn":
                    session.turns.append(
                        Turn(
                            role=event["role"],
                            text=event["text"],
                            query_class=event.get("class"),
                            timestamp=event.get("ts", 0.0),
                            outcome=event.get("outcome"),
                            citations=event.get("citations"),
                        )
                    )
                elif kind == "dialogue":
                    data = event.get("data")
                    session.dialogue = (
                        DialogueSession.from_json(json.dumps(data)) if data else None
                    )
                    session.phase = event.get("phase", session.phase)
                elif kind == "outcome":
                    session.last_outcome = event.get("data")
        return session
