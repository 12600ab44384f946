"""Pipeline configuration: one flat record, loadable from TOML or JSON,
echoed verbatim by the service's /v1/config endpoint."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from .index import DEFAULT_INSTRUCTION

try:
    import tomllib  # type: ignore[import-not-found]
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as tomllib  # type: ignore[no-redef]

logger = logging.getLogger(__name__)

BIND_ENV_VAR = "MATHDEX_BIND"


@dataclass
class PipelineConfig:
    # extraction
    batch_size: int = 5
    window_length: int = 4000
    overlap: int = 1
    span_cap: int = 4000
    back_margin: int = 0
    match_budget: int = 1_000_000
    pattern_sample_chars: int = 8000
    retries: int = 2
    provider: str = "heuristic"  # heuristic | model
    client: str = "mock"  # mock | model
    # unfolding
    expander: str = "concat"  # concat | model
    budget: int = 20_000
    # retrieval
    instruction: str = DEFAULT_INSTRUCTION
    embedder: str = "test"  # test | service
    embed_dim: int = 256
    embed_service_url: str = ""
    completion_service_url: str = ""
    # execution
    max_inflight: int = 4
    store_path: str = "store"
    ui_dir: str = ""
    host: str = "127.0.0.1"
    port: int = 8370
    cors_origins: list[str] = field(default_factory=lambda: ["*"])

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Load configuration from a TOML or JSON file; missing keys keep their
    defaults, unknown keys are ignored with a warning. The bind address can
    be overridden with the MATHDEX_BIND environment variable (host:port)."""
    data: dict = {}
    if path is not None:
        p = Path(path)
        if p.suffix == ".toml":
            data = tomllib.loads(p.read_text("utf-8"))
        elif p.suffix == ".json":
            data = json.loads(p.read_text("utf-8"))
        else:
            raise ValueError(f"unsupported config format {p.suffix!r} (use .toml or .json)")

    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(data) - known
    for key in sorted(unknown):
        logger.warning("ignoring unknown config key %r", key)
    config = PipelineConfig(**{k: v for k, v in data.items() if k in known})

    bind = os.environ.get(BIND_ENV_VAR)
    if bind:
        host, _, port = bind.rpartition(":")
        if host:
            config.host = host
        if port:
            config.port = int(port)
    return config
