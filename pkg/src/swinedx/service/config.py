"""Service configuration: one YAML file, validated strictly at startup.

Secrets never live in the file; hosted backends name the environment
variable that carries their API key.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..errors import ConfigError
from ..fusion import DEFAULT_TAU, DEFAULT_TIER_BOUNDS
from ..pipeline import DEFAULT_K, DEFAULT_REFUSAL, HISTORY_WINDOW

_TOP_KEYS = {"listen", "store", "sessions", "backend", "backend_options", "embedder", "fusion", "pipeline"}
_FUSION_KEYS = {"tau", "weights", "tiers"}
_PIPELINE_KEYS = {"k", "history_window", "refusal_template"}
_EMBEDDER_KEYS = {"dim"}
_BACKEND_KINDS = ("offline", "scripted-mock", "hosted")
_BACKEND_OPTION_KEYS = {"fixtures", "endpoint", "api_key_env", "backend_id"}


@dataclass
class ServiceConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080
    store_path: str = "data/store.bin"
    sessions_path: str = "data/sessions"
    backend: str = "offline"
    backend_options: dict = field(default_factory=dict)
    embedder_dim: int = 256
    tau: float = DEFAULT_TAU
    tier_bounds: tuple[float, float, float] = DEFAULT_TIER_BOUNDS
    agent_weights: dict[str, float] = field(default_factory=dict)
    k: int = DEFAULT_K
    history_window: int = HISTORY_WINDOW
    refusal_template: str = DEFAULT_REFUSAL


def _reject_unknown(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def load_config(path: str | Path) -> ServiceConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a mapping")
    _reject_unknown(raw, _TOP_KEYS, "config")
    config = ServiceConfig()

    listen = raw.get("listen")
    if listen is not None:
        host, sep, port = str(listen).rpartition(":")
        if not sep or not port.isdigit():
            raise ConfigError(f"listen must be host:port, got {listen!r}")
        config.listen_host = host
        config.listen_port = int(port)

    if "store" in raw:
        config.store_path = str(raw["store"])
    if "sessions" in raw:
        config.sessions_path = str(raw["sessions"])

    backend = raw.get("backend", "offline")
    if backend not in _BACKEND_KINDS:
        raise ConfigError(f"backend must be one of {_BACKEND_KINDS}, got {backend!r}")
    config.backend = backend
    options = raw.get("backend_options") or {}
    if not isinstance(options, dict):
        raise ConfigError("backend_options must be a mapping")
    _reject_unknown(options, _BACKEND_OPTION_KEYS, "backend_options")
    config.backend_options = options
    if backend == "hosted" and "endpoint" not in options:
        raise ConfigError("hosted backend requires backend_options.endpoint")

    embedder = raw.get("embedder") or {}
    _reject_unknown(embedder, _EMBEDDER_KEYS, "embedder")
    if "dim" in embedder:
        config.embedder_dim = int(embedder["dim"])

    fusion = raw.get("fusion") or {}
    _reject_unknown(fusion, _FUSION_KEYS, "fusion")
    if "tau" in fusion:
        tau = float(fusion["tau"])
        if not 0.0 < tau <= 1.0:
            raise ConfigError(f"fusion.tau must lie in (0, 1], got {tau}")
        config.tau = tau
    if "tiers" in fusion:
        tiers = tuple(float(b) for b in fusion["tiers"])
        if len(tiers) != 3 or not tiers[0] > tiers[1] > tiers[2] > 0:
            raise ConfigError("fusion.tiers must be three descending positive boundaries")
        config.tier_bounds = tiers
    if "weights" in fusion:
        weights = fusion["weights"]
        if not isinstance(weights, dict):
            raise ConfigError("fusion.weights must map agent ids to weights")
        config.agent_weights = {str(k): float(v) for k, v in weights.items()}

    pipeline = raw.get("pipeline") or {}
    _reject_unknown(pipeline, _PIPELINE_KEYS, "pipeline")
    if "k" in pipeline:
        config.k = int(pipeline["k"])
        if config.k < 1:
            raise ConfigError("pipeline.k must be >= 1")
    if "history_window" in pipeline:
        config.history_window = int(pipeline["history_window"])
    if "refusal_template" in pipeline:
        config.refusal_template = str(pipeline["refusal_template"])

    return config
